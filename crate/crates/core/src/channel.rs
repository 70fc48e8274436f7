//! Single-qubit noise families and their two-use correlated extension.
//!
//! A correlated channel over two consecutive uses is the convex mixture
//!
//! ```text
//! ρ ↦ (1 − μ) Σ_{k₁k₂} E_{k₁k₂} ρ E_{k₁k₂}† + μ Σ_k E_{kk} ρ E_{kk}†
//! ```
//!
//! where `E_{k₁k₂} = B_{k₁} ⊗ B_{k₂}` are product operators of the
//! single-qubit family and `E_{kk}` are the full-memory operators. Each
//! family is complete on its own, so the mixture is trace preserving.
//!
//! Kraus sets are always ordered with the identity-like operator first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::matrix::ComplexMatrix;
use crate::state::DensityMatrix;

pub const COMPLETENESS_TOL: f64 = 1e-12;
/// Smallest post-selection weight that can still be normalized.
pub const MIN_WEIGHT: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "ad")]
    AmplitudeDamping,
    #[serde(rename = "pd")]
    PhaseDamping,
    #[serde(rename = "depol")]
    Depolarizing,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::AmplitudeDamping,
        ChannelKind::PhaseDamping,
        ChannelKind::Depolarizing,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            ChannelKind::AmplitudeDamping => "ad",
            ChannelKind::PhaseDamping => "pd",
            ChannelKind::Depolarizing => "depol",
        }
    }

    /// Pauli channels leave all four Bell states invariant at full memory.
    pub fn is_pauli(&self) -> bool {
        !matches!(self, ChannelKind::AmplitudeDamping)
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ad" | "amplitude-damping" => Ok(ChannelKind::AmplitudeDamping),
            "pd" | "phase-damping" => Ok(ChannelKind::PhaseDamping),
            "depol" | "depolarizing" => Ok(ChannelKind::Depolarizing),
            other => Err(format!(
                "unknown channel '{other}' (expected ad, pd or depol)"
            )),
        }
    }
}

/// Noise parameter λ = e^{−Γt} and memory strength μ, both in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub lambda: f64,
    pub mu: f64,
}

impl ChannelParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        check_range("lambda", lambda, 0.0, 1.0, "[0, 1]")?;
        check_range("mu", mu, 0.0, 1.0, "[0, 1]")?;
        Ok(Self { lambda, mu })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    dim: usize,
    ops: Vec<ComplexMatrix>,
    complete: bool,
}

impl KrausSet {
    /// Builds a complete (trace-preserving) set; fails if `Σ E†E ≠ I`.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let set = Self::partial(ops)?;
        let residual = set.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::Incomplete { residual });
        }
        Ok(Self {
            complete: true,
            ..set
        })
    }

    /// A trace-non-increasing set, e.g. one post-selected measurement branch.
    pub fn partial(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = ops.first().map(ComplexMatrix::dim).ok_or(Error::BadShape {
            dim: 0,
            len: 0,
            expected: 1,
        })?;
        if let Some(bad) = ops.iter().find(|op| op.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.dim(),
            });
        }
        Ok(Self {
            dim,
            ops,
            complete: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// `max |(Σ E†E − I)[i,j]|`
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim);
        for op in &self.ops {
            sum = sum
                .add(&op.adjoint().matmul(op).expect("same dim"))
                .expect("same dim");
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
            .expect("same dim")
    }

    /// `Σ E ρ E†` without any normalization.
    pub fn act(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dim);
        for op in &self.ops {
            out = out.add(&op.conjugate(rho)?)?;
        }
        Ok(out)
    }
}

/// Applies `set` to `rho` and reports the trace of the result as the weight.
/// With `normalize`, the returned matrix is divided by that weight.
pub fn apply_kraus_set(
    set: &KrausSet,
    rho: &ComplexMatrix,
    normalize: bool,
) -> Result<(ComplexMatrix, f64)> {
    let out = set.act(rho)?;
    let weight = out.trace().re;
    if normalize {
        if weight <= MIN_WEIGHT {
            return Err(Error::VanishingWeight { weight });
        }
        Ok((out.scale(1.0 / weight), weight))
    } else {
        Ok((out, weight))
    }
}

fn pauli_weights(kind: ChannelKind, lambda: f64) -> Vec<(f64, ComplexMatrix)> {
    let p0 = (1.0 + lambda) / 2.0;
    match kind {
        ChannelKind::PhaseDamping => vec![
            (p0, ComplexMatrix::identity(2)),
            ((1.0 - lambda) / 2.0, ComplexMatrix::sigma_z()),
        ],
        ChannelKind::Depolarizing => {
            let p = (1.0 - lambda) / 6.0;
            vec![
                (p0, ComplexMatrix::identity(2)),
                (p, ComplexMatrix::sigma_x()),
                (p, ComplexMatrix::sigma_y()),
                (p, ComplexMatrix::sigma_z()),
            ]
        }
        ChannelKind::AmplitudeDamping => unreachable!("amplitude damping is not a Pauli channel"),
    }
}

fn amplitude_damping_ops(lambda: f64) -> Vec<ComplexMatrix> {
    vec![
        ComplexMatrix::diag(&[1.0, lambda.sqrt()]),
        ComplexMatrix::from_real(2, &[0.0, (1.0 - lambda).sqrt(), 0.0, 0.0]).unwrap(),
    ]
}

/// Kraus operators of one use of the channel.
pub fn single_qubit_kraus(kind: ChannelKind, lambda: f64) -> Result<KrausSet> {
    check_range("lambda", lambda, 0.0, 1.0, "[0, 1]")?;
    let ops = match kind {
        ChannelKind::AmplitudeDamping => amplitude_damping_ops(lambda),
        _ => pauli_weights(kind, lambda)
            .into_iter()
            .map(|(p, s)| s.scale(p.sqrt()))
            .collect(),
    };
    KrausSet::new(ops)
}

/// Memoryless two-use operators `B_{k₁} ⊗ B_{k₂}`, ordered by `(k₁, k₂)`.
pub fn uncorrelated_pair_kraus(kind: ChannelKind, lambda: f64) -> Result<KrausSet> {
    let single = single_qubit_kraus(kind, lambda)?;
    let ops = single
        .ops()
        .iter()
        .flat_map(|a| single.ops().iter().map(move |b| a.kron(b)))
        .collect();
    KrausSet::new(ops)
}

/// Full-memory two-use operators.
///
/// Pauli channels apply the same rotation to both qubits, `√p_k σ_k ⊗ σ_k`.
/// Amplitude damping uses the memory operators `diag(1, 1, 1, √λ)` and
/// `√(1−λ) |00⟩⟨11|`.
pub fn correlated_pair_kraus(kind: ChannelKind, lambda: f64) -> Result<KrausSet> {
    check_range("lambda", lambda, 0.0, 1.0, "[0, 1]")?;
    let ops = match kind {
        ChannelKind::AmplitudeDamping => {
            let mut jump = ComplexMatrix::zeros(4);
            jump.set(0, 3, (1.0 - lambda).sqrt().into());
            vec![ComplexMatrix::diag(&[1.0, 1.0, 1.0, lambda.sqrt()]), jump]
        }
        _ => pauli_weights(kind, lambda)
            .into_iter()
            .map(|(p, s)| s.kron(&s).scale(p.sqrt()))
            .collect(),
    };
    KrausSet::new(ops)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatedChannel {
    kind: ChannelKind,
    params: ChannelParams,
    uncorrelated: KrausSet,
    correlated: KrausSet,
}

pub fn build_channel(kind: ChannelKind, params: ChannelParams) -> Result<CorrelatedChannel> {
    Ok(CorrelatedChannel {
        kind,
        params,
        uncorrelated: uncorrelated_pair_kraus(kind, params.lambda)?,
        correlated: correlated_pair_kraus(kind, params.lambda)?,
    })
}

impl CorrelatedChannel {
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn params(&self) -> ChannelParams {
        self.params
    }

    pub fn mu(&self) -> f64 {
        self.params.mu
    }

    pub fn uncorrelated(&self) -> &KrausSet {
        &self.uncorrelated
    }

    pub fn correlated(&self) -> &KrausSet {
        &self.correlated
    }

    /// The linear map on an arbitrary 4×4 operator (no validation).
    pub fn act(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch {
                left: 4,
                right: rho.dim(),
            });
        }
        let mu = self.params.mu;
        let u = self.uncorrelated.act(rho)?.scale(1.0 - mu);
        let c = self.correlated.act(rho)?.scale(mu);
        u.add(&c)
    }

    /// Applies the channel to a state. A validation failure here means a bug.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::validate(self.act(rho.matrix())?)
    }
}
