//! Closed-form output states for the Bell-like input `α|00⟩ + β|11⟩`.
//!
//! Every state here is X-shaped: four populations plus one coherence
//! between |00⟩ and |11⟩. The expressions are evaluated exactly as written
//! in their `(−1 + x)` factored form; [`cross_validate`] compares them
//! against the generic Kraus pipeline.
//!
//! Population labels follow the basis order |00⟩, |01⟩, |10⟩, |11⟩. In the
//! dephasing forms the second listed population is the |11⟩ entry, since
//! dephasing cannot move population.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{ChannelKind, ChannelParams, MIN_WEIGHT};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::protect::{run_protocol, MeasurementStrengths};
use crate::state::{BellLikeParams, DensityMatrix};

/// Pass threshold for closed-form versus pipeline agreement.
pub const CROSS_VALIDATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedFormElements {
    /// |00⟩, |01⟩, |10⟩, |11⟩
    pub populations: [f64; 4],
    /// ⟨00|ρ|11⟩
    pub coherence: f64,
    pub normalized: bool,
}

impl ClosedFormElements {
    pub fn trace(&self) -> f64 {
        self.populations.iter().sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let t = self.trace();
        if t <= MIN_WEIGHT {
            return Err(Error::VanishingWeight { weight: t });
        }
        Ok(Self {
            populations: self.populations.map(|p| p / t),
            coherence: self.coherence / t,
            normalized: true,
        })
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::diag(&self.populations);
        m.set(0, 3, C64::new(self.coherence, 0.0));
        m.set(3, 0, C64::new(self.coherence, 0.0));
        m
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let n = if self.normalized {
            *self
        } else {
            self.normalize()?
        };
        DensityMatrix::validate(n.to_matrix())
    }
}

fn ab(alpha: f64) -> (f64, f64) {
    let p = BellLikeParams::new(alpha.clamp(0.0, 1.0)).expect("clamped");
    (p.alpha(), p.beta())
}

/// Correlated amplitude damping, no protection.
pub fn ad_elements(lambda: f64, mu: f64, alpha: f64) -> ClosedFormElements {
    let (a, b) = ab(alpha);
    let (a2, b2, l) = (a * a, b * b, lambda);
    let r11 = a2 - (-1.0 + l) * b2 * (1.0 + l * (-1.0 + mu));
    let r22 = (-1.0 + l) * l * b2 * (-1.0 + mu);
    let r44 = l * b2 * (l + mu - l * mu);
    let r14 = -l * a * b * (-1.0 + mu) + l.sqrt() * a * b * mu;
    ClosedFormElements {
        populations: [r11, r22, r22, r44],
        coherence: r14,
        normalized: true,
    }
}

/// Correlated amplitude damping between weak and reversal measurements
/// (un-normalized).
pub fn ad_wm_elements(lambda: f64, mu: f64, alpha: f64, m: f64, n: f64) -> ClosedFormElements {
    let (a, b) = ab(alpha);
    let (a2, b2, l) = (a * a, b * b, lambda);
    let r11 =
        (-1.0 + n).powi(2) * (a2 + (-1.0 + l) * (-1.0 + m).powi(2) * b2 * (-1.0 + l - l * mu));
    let r22 = -(-1.0 + l) * l * (-1.0 + m).powi(2) * (-1.0 + n) * b2 * (-1.0 + mu);
    let r44 = l * (b - m * b).powi(2) * (l + mu - l * mu);
    let r14 = l.sqrt() * (1.0 - m) * (1.0 - n) * a * b * (-l.sqrt() * (-1.0 + mu) + mu);
    ClosedFormElements {
        populations: [r11, r22, r22, r44],
        coherence: r14,
        normalized: false,
    }
}

/// Correlated phase damping, no protection.
pub fn pd_elements(lambda: f64, mu: f64, alpha: f64) -> ClosedFormElements {
    let (a, b) = ab(alpha);
    let l = lambda;
    ClosedFormElements {
        populations: [a * a, 0.0, 0.0, b * b],
        coherence: a * b * (-l * l * (-1.0 + mu) + mu),
        normalized: true,
    }
}

pub fn pd_wm_elements(lambda: f64, mu: f64, alpha: f64, m: f64, n: f64) -> ClosedFormElements {
    let (a, b) = ab(alpha);
    let l = lambda;
    ClosedFormElements {
        populations: [
            (-1.0 + n).powi(2) * a * a,
            0.0,
            0.0,
            (-1.0 + m).powi(2) * b * b,
        ],
        coherence: (-1.0 + m) * (1.0 - n) * a * b * (l * l * (-1.0 + mu) - mu),
        normalized: false,
    }
}

/// Correlated depolarizing, no protection.
pub fn depol_elements(lambda: f64, mu: f64, alpha: f64) -> ClosedFormElements {
    let (a, b) = ab(alpha);
    let (a2, b2, l) = (a * a, b * b, lambda);
    let r11 = (-(2.0 + l) * a2 * (-2.0 + l * (-1.0 + mu) - mu)
        - (-1.0 + l) * b2 * (1.0 + l * (-1.0 + mu) + 2.0 * mu))
        / 9.0;
    let r22 = (-2.0 + l + l * l) * (-1.0 + mu) / 9.0;
    let r44 = (-(-1.0 + l) * a2 * (1.0 + l * (-1.0 + mu) + 2.0 * mu)
        + b2 * ((2.0 + l).powi(2) - (-2.0 + l + l * l) * mu))
        / 9.0;
    let r14 = a * b * (1.0 - 4.0 * l * (1.0 + l) * (-1.0 + mu) + 8.0 * mu) / 9.0;
    ClosedFormElements {
        populations: [r11, r22, r22, r44],
        coherence: r14,
        normalized: true,
    }
}

pub fn depol_wm_elements(lambda: f64, mu: f64, alpha: f64, m: f64, n: f64) -> ClosedFormElements {
    let (a, b) = ab(alpha);
    let (a2, b2, l) = (a * a, b * b, lambda);
    let r11 = (-1.0 + n).powi(2)
        * (-(1.0 / 9.0) * (2.0 + l) * a2 * (-2.0 + l * (-1.0 + mu) - mu)
            - (1.0 / 9.0)
                * (-1.0 + l)
                * (-1.0 + m).powi(2)
                * b2
                * (1.0 + l * (-1.0 + mu) + 2.0 * mu));
    let r22 = -(1.0 / 9.0)
        * (-2.0 + l + l * l)
        * (-1.0 + n)
        * (a2 + (-1.0 + m).powi(2) * b2)
        * (-1.0 + mu);
    let r44 = (1.0 / 9.0)
        * ((1.0 - l) * a2 * (1.0 + l * (-1.0 + mu) + 2.0 * mu)
            + (-1.0 + m).powi(2) * b2 * ((2.0 + l).powi(2) - (-2.0 + l + l * l) * mu));
    let r14 = -(1.0 / 9.0)
        * (1.0 - m)
        * (1.0 - n)
        * a
        * b
        * (-1.0 + 4.0 * l * (1.0 + l) * (-1.0 + mu) - 8.0 * mu);
    ClosedFormElements {
        populations: [r11, r22, r22, r44],
        coherence: r14,
        normalized: false,
    }
}

/// Closed form for any channel; `None` strengths selects the unprotected form.
pub fn elements(
    kind: ChannelKind,
    params: ChannelParams,
    alpha: f64,
    strengths: Option<MeasurementStrengths>,
) -> ClosedFormElements {
    let (l, mu) = (params.lambda, params.mu);
    match (kind, strengths) {
        (ChannelKind::AmplitudeDamping, None) => ad_elements(l, mu, alpha),
        (ChannelKind::PhaseDamping, None) => pd_elements(l, mu, alpha),
        (ChannelKind::Depolarizing, None) => depol_elements(l, mu, alpha),
        (ChannelKind::AmplitudeDamping, Some(s)) => ad_wm_elements(l, mu, alpha, s.m(), s.n()),
        (ChannelKind::PhaseDamping, Some(s)) => pd_wm_elements(l, mu, alpha, s.m(), s.n()),
        (ChannelKind::Depolarizing, Some(s)) => depol_wm_elements(l, mu, alpha, s.m(), s.n()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossValidation {
    pub channel: ChannelKind,
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub m: f64,
    pub n: f64,
    /// Max entrywise |closed form − pipeline| of the normalized states.
    /// Infinite when either side failed to produce a state.
    pub residual: f64,
    pub passed: bool,
}

/// Compares the normalized closed-form state with the Kraus pipeline output.
///
/// `perturbation` is added to the closed-form |00⟩ population before
/// comparison; it exists so callers can check that a corrupted oracle is
/// actually caught. Pass 0 for normal use.
pub fn cross_validate(
    kind: ChannelKind,
    params: ChannelParams,
    alpha: f64,
    strengths: MeasurementStrengths,
    perturbation: f64,
) -> CrossValidation {
    let residual = (|| -> Result<f64> {
        let mut closed = elements(kind, params, alpha, Some(strengths)).normalize()?;
        closed.populations[0] += perturbation;
        let pipeline = run_protocol(kind, params, strengths, alpha)?;
        closed.to_matrix().max_abs_diff(pipeline.rho_out.matrix())
    })()
    .unwrap_or(f64::INFINITY);
    CrossValidation {
        channel: kind,
        lambda: params.lambda,
        mu: params.mu,
        alpha,
        m: strengths.m(),
        n: strengths.n(),
        residual,
        passed: residual <= CROSS_VALIDATION_TOL,
    }
}

/// Points of a cross-validation sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleGrid {
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    pub strengths: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl OracleGrid {
    /// `points` evenly spaced λ and μ values in [0, 1]; m, n over
    /// {0, 0.5, 0.9, 0.95, 0.99}.
    pub fn with_points(points: usize) -> Self {
        let points = points.max(2);
        let axis: Vec<f64> = (0..points)
            .map(|i| i as f64 / (points - 1) as f64)
            .collect();
        Self {
            lambdas: axis.clone(),
            mus: axis,
            strengths: vec![0.0, 0.5, 0.9, 0.95, 0.99],
            alphas: vec![std::f64::consts::FRAC_1_SQRT_2, 0.6],
        }
    }
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self::with_points(5)
    }
}

/// Runs [`cross_validate`] over the whole grid for one channel, in a fixed
/// order (α, λ, μ, m, n) regardless of scheduling.
pub fn cross_validate_grid(
    kind: ChannelKind,
    grid: &OracleGrid,
    perturbation: f64,
) -> Vec<CrossValidation> {
    let mut cases = Vec::new();
    for &alpha in &grid.alphas {
        for &lambda in &grid.lambdas {
            for &mu in &grid.mus {
                for &m in &grid.strengths {
                    for &n in &grid.strengths {
                        cases.push((alpha, lambda, mu, m, n));
                    }
                }
            }
        }
    }
    cases
        .into_par_iter()
        .map(|(alpha, lambda, mu, m, n)| {
            let params = ChannelParams::new(lambda, mu).expect("grid in range");
            let s = MeasurementStrengths::new(m, n).expect("grid in range");
            cross_validate(kind, params, alpha, s, perturbation)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ad_limits_and_point() {
        let e = ad_elements(1.0, 0.3, 0.6);
        for (p, x) in e.populations.iter().zip([0.36, 0.0, 0.0, 0.64]) {
            assert!(close(*p, x, 1e-15));
        }
        assert!(close(e.coherence, 0.48, 1e-15));

        let e = ad_elements(0.5, 0.5, H);
        for (p, x) in e.populations.iter().zip([0.6875, 0.0625, 0.0625, 0.1875]) {
            assert!(close(*p, x, 1e-15));
        }
        assert!(close(e.coherence, 0.30178, 1e-5));

        let e = ad_elements(0.5, 1.0, H);
        assert!(close(e.coherence, 0.5 * 0.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn ad_protected_point() {
        let e = ad_wm_elements(0.5, 0.5, H, 0.9, 0.95);
        assert!(close(e.trace(), 3.1921875e-3, 1e-15));
        let n = e.normalize().unwrap();
        for (p, x) in n.populations.iter().zip([0.3931, 0.0098, 0.0098, 0.5874]) {
            assert!(close(*p, x, 1e-4), "{p} vs {x}");
        }
        assert!(close(n.coherence, 0.4727, 1e-4));
    }

    #[test]
    fn ad_protected_without_noise() {
        let (m, n, a) = (0.4, 0.7, 0.6f64);
        let e = ad_wm_elements(1.0, 0.2, a, m, n);
        let b2 = 1.0 - a * a;
        assert!(close(
            e.populations[0],
            (1.0 - n) * (1.0 - n) * a * a,
            1e-15
        ));
        assert!(close(e.populations[1], 0.0, 1e-15));
        assert!(close(e.populations[3], (1.0 - m) * (1.0 - m) * b2, 1e-15));
    }

    #[test]
    fn pd_forms() {
        assert!(close(pd_elements(0.3, 1.0, H).coherence, 0.5, 1e-15));
        assert!(close(pd_elements(0.0, 0.0, H).coherence, 0.0, 1e-15));
        assert!(close(pd_elements(0.5, 0.5, H).coherence, 0.3125, 1e-15));
    }

    #[test]
    fn depol_forms() {
        let e = depol_elements(0.4, 1.0, H);
        assert!(close(e.coherence, 0.5, 1e-15));
        assert!(close(e.populations[0], 0.5, 1e-15));
        assert!(close(e.populations[1], 0.0, 1e-15));
        assert!(close(e.populations[3], 0.5, 1e-15));

        let e = depol_elements(1.0, 0.3, 0.6);
        assert!(close(e.populations[0], 0.36, 1e-15));
        assert!(close(e.populations[1], 0.0, 1e-15));
        assert!(close(e.coherence, 0.48, 1e-15));

        let e = depol_elements(0.5, 0.0, H);
        assert!(close(e.coherence, 0.5 * 4.0 / 9.0, 1e-15));
    }

    #[test]
    fn protected_forms_reduce_at_zero_strength() {
        for &l in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            for &mu in &[0.0, 0.25, 0.5, 0.75, 1.0] {
                for &a in &[H, 0.6, 0.2] {
                    let pairs = [
                        (ad_elements(l, mu, a), ad_wm_elements(l, mu, a, 0.0, 0.0)),
                        (pd_elements(l, mu, a), pd_wm_elements(l, mu, a, 0.0, 0.0)),
                        (
                            depol_elements(l, mu, a),
                            depol_wm_elements(l, mu, a, 0.0, 0.0),
                        ),
                    ];
                    for (plain, wm) in pairs {
                        for k in 0..4 {
                            assert!(close(plain.populations[k], wm.populations[k], 1e-12));
                        }
                        assert!(close(plain.coherence, wm.coherence, 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn unit_trace_and_x_state_positivity() {
        for &l in &[0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0] {
            for &mu in &[0.0, 0.25, 0.5, 0.75, 1.0] {
                for &a in &[H, 0.6, 0.2, 1.0] {
                    for e in [
                        ad_elements(l, mu, a),
                        pd_elements(l, mu, a),
                        depol_elements(l, mu, a),
                    ] {
                        assert!(close(e.trace(), 1.0, 1e-12));
                        assert!(e.populations.iter().all(|&p| p >= -1e-12));
                        let bound = (e.populations[0] * e.populations[3]).max(0.0).sqrt();
                        assert!(e.coherence.abs() <= bound + 1e-10);
                    }
                    for &m in &[0.0, 0.5, 0.99] {
                        for &n in &[0.0, 0.5, 0.99] {
                            for e in [
                                ad_wm_elements(l, mu, a, m, n),
                                pd_wm_elements(l, mu, a, m, n),
                                depol_wm_elements(l, mu, a, m, n),
                            ] {
                                assert!(e.populations.iter().all(|&p| p >= -1e-12));
                                let bound = (e.populations[0] * e.populations[3]).max(0.0).sqrt();
                                assert!(e.coherence.abs() <= bound + 1e-10);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn perturbed_oracle_fails() {
        let params = ChannelParams::new(0.5, 0.5).unwrap();
        let s = MeasurementStrengths::new(0.0, 0.0).unwrap();
        let ok = cross_validate(ChannelKind::PhaseDamping, params, H, s, 0.0);
        assert!(ok.passed);
        let bad = cross_validate(ChannelKind::PhaseDamping, params, H, s, 1e-6);
        assert!(!bad.passed);
        assert!(close(bad.residual, 1e-6, 1e-12));
    }
}
