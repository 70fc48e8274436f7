//! Weak-measurement protection around the correlated channel.
//!
//! Pipeline: `ρ₀ → M_w ρ₀ M_w† → channel → M_rev · M_rev† → ÷ T`, where `T`
//! is the trace of the un-normalized output, i.e. the probability that both
//! post-selections succeed. Capacity is evaluated on the normalized state
//! and is not weighted by `T`.

use rayon::prelude::*;

use crate::channel::{
    apply_kraus_set, build_channel, ChannelKind, ChannelParams, KrausSet, MIN_WEIGHT,
};
use crate::closed_form;
use crate::coding::capacity;
use crate::error::{check_range, Error, Result};
use crate::matrix::ComplexMatrix;
use crate::state::{bell_like_state, BellLikeParams, DensityMatrix};

/// Upper bound of the strength search box; m = n = 1 is singular.
pub const MAX_SEARCH_STRENGTH: f64 = 1.0 - 1e-3;

/// Weak-measurement strength `m` and reversal strength `n`, each in [0, 1),
/// shared by both qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementStrengths {
    m: f64,
    n: f64,
}

impl MeasurementStrengths {
    pub fn new(m: f64, n: f64) -> Result<Self> {
        check_strength("m", m)?;
        check_strength("n", n)?;
        Ok(Self { m, n })
    }

    pub fn none() -> Self {
        Self { m: 0.0, n: 0.0 }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> f64 {
        self.n
    }
}

fn check_strength(name: &'static str, v: f64) -> Result<()> {
    check_range(name, v, 0.0, 1.0, "[0, 1)")?;
    if v == 1.0 {
        return Err(Error::OutOfRange {
            name,
            value: v,
            range: "[0, 1)",
        });
    }
    Ok(())
}

/// `diag(1, √(1−m)) ⊗ diag(1, √(1−m))`
pub fn weak_measure_op(m: f64) -> Result<ComplexMatrix> {
    check_strength("m", m)?;
    let s = (1.0 - m).sqrt();
    let one = ComplexMatrix::diag(&[1.0, s]);
    Ok(one.kron(&one))
}

/// `diag(√(1−n), 1) ⊗ diag(√(1−n), 1)`
pub fn reversal_op(n: f64) -> Result<ComplexMatrix> {
    check_strength("n", n)?;
    let s = (1.0 - n).sqrt();
    let one = ComplexMatrix::diag(&[s, 1.0]);
    Ok(one.kron(&one))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolResult {
    /// Capacity clamped to [0, 2].
    pub chi: f64,
    pub chi_raw: f64,
    pub entropy_avg: f64,
    pub entropy_state: f64,
    /// Post-selection success probability `T`.
    pub success_prob: f64,
    pub rho_out: DensityMatrix,
}

pub fn run_protocol(
    kind: ChannelKind,
    params: ChannelParams,
    strengths: MeasurementStrengths,
    alpha: f64,
) -> Result<ProtocolResult> {
    let rho0 = bell_like_state(BellLikeParams::new(alpha)?);
    let channel = build_channel(kind, params)?;
    let weak = KrausSet::partial(vec![weak_measure_op(strengths.m)?])?;
    let reversal = KrausSet::partial(vec![reversal_op(strengths.n)?])?;

    let (after_weak, _) = apply_kraus_set(&weak, rho0.matrix(), false)?;
    let after_noise = channel.act(&after_weak)?;
    let (out, t) = apply_kraus_set(&reversal, &after_noise, false)?;
    if t <= MIN_WEIGHT {
        return Err(Error::VanishingWeight { weight: t });
    }
    let rho_out = DensityMatrix::validate(out.scale(1.0 / t))?;
    let cap = capacity(&rho_out)?;
    Ok(ProtocolResult {
        chi: cap.chi,
        chi_raw: cap.raw,
        entropy_avg: cap.entropy_avg,
        entropy_state: cap.entropy_state,
        success_prob: t,
        rho_out,
    })
}

/// The protected output state assembled from the closed-form elements.
pub fn protected_state_elements(
    kind: ChannelKind,
    params: ChannelParams,
    strengths: MeasurementStrengths,
    alpha: f64,
) -> Result<DensityMatrix> {
    BellLikeParams::new(alpha)?;
    closed_form::elements(kind, params, alpha, Some(strengths)).to_state()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub strengths: MeasurementStrengths,
    pub result: ProtocolResult,
    /// χ with no measurements (m = n = 0).
    pub baseline_chi: f64,
}

impl Optimum {
    pub fn improvement(&self) -> f64 {
        self.result.chi - self.baseline_chi
    }
}

/// χ values closer than this are treated as equal by the optimizer.
pub const CHI_TIE_TOL: f64 = 1e-12;

/// Orders candidates by χ, then prefers the smaller `m`, then smaller `n`.
fn better(a: (f64, f64, f64), b: (f64, f64, f64)) -> bool {
    let (ca, ma, na) = a;
    let (cb, mb, nb) = b;
    if (ca - cb).abs() <= CHI_TIE_TOL {
        ma < mb || (ma == mb && na < nb)
    } else {
        ca > cb
    }
}

/// Searches `(m, n) ∈ [0, 1 − 10⁻³]²` for the largest χ.
///
/// A `grid × grid` coarse scan is followed by `refine_iters` rounds that
/// halve the spacing and rescan a 5×5 stencil around the incumbent. Cells
/// are evaluated in parallel but the reduction is order-independent.
pub fn optimize_strengths(
    kind: ChannelKind,
    params: ChannelParams,
    alpha: f64,
    grid: usize,
    refine_iters: usize,
) -> Result<Optimum> {
    if grid < 2 {
        return Err(Error::InvalidGrid(format!(
            "grid must be at least 2, got {grid}"
        )));
    }
    BellLikeParams::new(alpha)?;
    let hi = MAX_SEARCH_STRENGTH;
    let eval = |m: f64, n: f64| -> Result<(f64, f64, f64)> {
        let r = run_protocol(kind, params, MeasurementStrengths::new(m, n)?, alpha)?;
        Ok((r.chi, m, n))
    };
    let pick = |cells: Vec<(f64, f64)>| -> Result<(f64, f64, f64)> {
        let scored = cells
            .into_par_iter()
            .map(|(m, n)| eval(m, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(scored
            .into_iter()
            .reduce(|best, c| if better(c, best) { c } else { best })
            .expect("non-empty"))
    };

    let mut h = hi / (grid - 1) as f64;
    let axis: Vec<f64> = (0..grid)
        .map(|i| if i + 1 == grid { hi } else { i as f64 * h })
        .collect();
    let coarse = axis
        .iter()
        .flat_map(|&m| axis.iter().map(move |&n| (m, n)))
        .collect();
    let mut best = pick(coarse)?;

    for _ in 0..refine_iters {
        h /= 2.0;
        let (_, m0, n0) = best;
        let around = |c: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (-2..=2)
                .map(|k| (c + k as f64 * h).clamp(0.0, hi))
                .collect();
            v.dedup();
            v
        };
        let ms = around(m0);
        let ns = around(n0);
        let cells = ms
            .iter()
            .flat_map(|&m| ns.iter().map(move |&n| (m, n)))
            .collect();
        let cand = pick(cells)?;
        if better(cand, best) {
            best = cand;
        }
    }

    let (_, m, n) = best;
    let strengths = MeasurementStrengths::new(m, n)?;
    let result = run_protocol(kind, params, strengths, alpha)?;
    let baseline_chi = run_protocol(kind, params, MeasurementStrengths::none(), alpha)?.chi;
    Ok(Optimum {
        strengths,
        result,
        baseline_chi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn diag_of(m: &ComplexMatrix) -> Vec<f64> {
        (0..4).map(|i| m.get(i, i).re).collect()
    }

    #[test]
    fn operator_values() {
        assert_eq!(weak_measure_op(0.0).unwrap(), ComplexMatrix::identity(4));
        assert_eq!(reversal_op(0.0).unwrap(), ComplexMatrix::identity(4));
        assert_eq!(
            diag_of(&weak_measure_op(0.75).unwrap()),
            vec![1.0, 0.5, 0.5, 0.25]
        );
        assert_eq!(
            diag_of(&reversal_op(0.75).unwrap()),
            vec![0.25, 0.5, 0.5, 1.0]
        );

        let w = diag_of(&weak_measure_op(0.9).unwrap());
        let s = 0.1f64.sqrt();
        for (a, b) in w.iter().zip([1.0, s, s, 0.1]) {
            assert!((a - b).abs() < 1e-15);
        }
        let r = diag_of(&reversal_op(0.95).unwrap());
        let s = 0.05f64.sqrt();
        for (a, b) in r.iter().zip([0.05, s, s, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn strengths_reject_singular_and_out_of_range() {
        assert!(MeasurementStrengths::new(1.0, 0.5).is_err());
        assert!(MeasurementStrengths::new(0.5, 1.0).is_err());
        assert!(MeasurementStrengths::new(-0.1, 0.0).is_err());
        assert!(weak_measure_op(1.0).is_err());
        assert!(reversal_op(1.2).is_err());
    }

    #[test]
    fn protected_amplitude_damping_point() {
        let params = ChannelParams::new(0.5, 0.5).unwrap();
        let s = MeasurementStrengths::new(0.9, 0.95).unwrap();
        let r = run_protocol(ChannelKind::AmplitudeDamping, params, s, H).unwrap();
        assert!((r.chi - 1.7494).abs() < 5e-4, "{}", r.chi);
        assert!((r.success_prob - 3.1921875e-3).abs() < 1e-15);
        let pops = diag_of(r.rho_out.matrix());
        for (p, e) in pops.iter().zip([0.3931, 0.0098, 0.0098, 0.5874]) {
            assert!((p - e).abs() < 1e-4);
        }
        assert!((r.rho_out.get(0, 3).re - 0.4727).abs() < 1e-4);

        let closed = protected_state_elements(ChannelKind::AmplitudeDamping, params, s, H).unwrap();
        assert!(closed.max_abs_diff(r.rho_out.matrix()).unwrap() < 1e-10);
    }

    #[test]
    fn zero_strength_reproduces_unprotected() {
        let params = ChannelParams::new(0.5, 0.5).unwrap();
        for kind in ChannelKind::ALL {
            let r = run_protocol(kind, params, MeasurementStrengths::none(), H).unwrap();
            let rho0 = bell_like_state(BellLikeParams::maximally_entangled());
            let direct = build_channel(kind, params).unwrap().apply(&rho0).unwrap();
            let cap = capacity(&direct).unwrap();
            assert!(r.rho_out.max_abs_diff(direct.matrix()).unwrap() < 1e-12);
            assert!((r.chi - cap.chi).abs() < 1e-12);
            assert!((r.success_prob - 1.0).abs() < 1e-12);
        }
        let r = run_protocol(
            ChannelKind::AmplitudeDamping,
            params,
            MeasurementStrengths::none(),
            H,
        )
        .unwrap();
        assert!((r.chi - 0.8842).abs() < 5e-4);
    }

    #[test]
    fn matched_strengths_undo_each_other_without_noise() {
        let params = ChannelParams::new(1.0, 0.3).unwrap();
        for m in [0.2, 0.5, 0.9, 0.99] {
            let s = MeasurementStrengths::new(m, m).unwrap();
            let r = run_protocol(ChannelKind::AmplitudeDamping, params, s, H).unwrap();
            let rho0 = bell_like_state(BellLikeParams::maximally_entangled());
            assert!(r.rho_out.max_abs_diff(rho0.matrix()).unwrap() < 1e-12);
            assert!((r.chi - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn chi_is_entropy_difference() {
        let params = ChannelParams::new(0.3, 0.6).unwrap();
        let s = MeasurementStrengths::new(0.4, 0.7).unwrap();
        for kind in ChannelKind::ALL {
            let r = run_protocol(kind, params, s, 0.6).unwrap();
            assert!((r.chi_raw - (r.entropy_avg - r.entropy_state)).abs() < 1e-12);
            assert!(r.success_prob > 0.0 && r.success_prob <= 1.0);
        }
    }

    #[test]
    fn optimizer_rejects_tiny_grid() {
        let params = ChannelParams::new(0.5, 0.5).unwrap();
        assert!(matches!(
            optimize_strengths(ChannelKind::PhaseDamping, params, H, 1, 0),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn optimizer_identity_channel() {
        let params = ChannelParams::new(1.0, 0.5).unwrap();
        for kind in ChannelKind::ALL {
            let opt = optimize_strengths(kind, params, H, 5, 2).unwrap();
            assert!((opt.result.chi - 2.0).abs() < 1e-9);
            assert!(opt.improvement().abs() < 1e-9);
            assert_eq!(opt.strengths, MeasurementStrengths::none());
        }
    }

    #[test]
    fn optimizer_is_deterministic() {
        let params = ChannelParams::new(0.5, 0.5).unwrap();
        let a = optimize_strengths(ChannelKind::AmplitudeDamping, params, H, 9, 3).unwrap();
        let b = optimize_strengths(ChannelKind::AmplitudeDamping, params, H, 9, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tie_break_prefers_small_strengths() {
        assert!(better((1.0, 0.1, 0.5), (1.0, 0.2, 0.0)));
        assert!(better((1.0, 0.1, 0.1), (1.0, 0.1, 0.2)));
        assert!(!better((1.0, 0.1, 0.2), (1.0, 0.1, 0.2)));
        assert!(better((1.1, 0.9, 0.9), (1.0, 0.0, 0.0)));
        assert!(better((1.0, 0.0, 0.0), (1.0 + 1e-15, 0.5, 0.5)));
    }
}
