//! Density matrices, the Bell-like resource state and von Neumann entropy.
//!
//! Two-qubit states use the computational basis order |00⟩, |01⟩, |10⟩,
//! |11⟩ (indices 0..=3), with the first tensor factor as the high bit.

use std::ops::Deref;

use crate::error::{check_range, Error, Result};
use crate::matrix::{ComplexMatrix, HERMITIAN_TOL};

pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_FLOOR, 0)` are treated as numerical zero.
pub const PSD_FLOOR: f64 = 1e-9;

/// A Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    /// Checks Hermiticity, trace and positivity, in that order.
    pub fn validate(mat: ComplexMatrix) -> Result<Self> {
        let residual = mat.hermitian_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let trace = mat.trace();
        let residual = (trace - 1.0).norm();
        if residual > TRACE_TOL {
            return Err(Error::TraceMismatch {
                trace: trace.re,
                residual,
            });
        }
        let eigenvalues = mat.hermitian_eigenvalues(HERMITIAN_TOL)?;
        let min = *eigenvalues.last().expect("dim >= 1");
        if min < -PSD_FLOOR {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { mat, eigenvalues })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::validate(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
            .expect("I/d is a state")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Spectrum in descending order, computed once at validation.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of_spectrum(&self.eigenvalues)
    }
}

impl Deref for DensityMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.mat
    }
}

pub fn validate(mat: ComplexMatrix) -> Result<DensityMatrix> {
    DensityMatrix::validate(mat)
}

/// Von Neumann entropy `-Σ λ log₂ λ` in bits, with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.entropy()
}

fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .map(|&l| l.max(0.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum();
    // -0.0 for pure states
    s.max(0.0)
}

/// Real amplitudes of α|00⟩ + β|11⟩. Only α is stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellLikeParams {
    alpha: f64,
}

impl BellLikeParams {
    pub fn new(alpha: f64) -> Result<Self> {
        check_range("alpha", alpha, 0.0, 1.0, "[0, 1]")?;
        Ok(Self { alpha })
    }

    /// α = β = 1/√2.
    pub fn maximally_entangled() -> Self {
        Self {
            alpha: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        (1.0 - self.alpha * self.alpha).max(0.0).sqrt()
    }
}

/// `|Φ⟩⟨Φ|` for `|Φ⟩ = α|00⟩ + β|11⟩`.
pub fn bell_like_state(p: BellLikeParams) -> DensityMatrix {
    let (a, b) = (p.alpha(), p.beta());
    let mut m = ComplexMatrix::zeros(4);
    m.set(0, 0, (a * a).into());
    m.set(3, 3, (b * b).into());
    m.set(0, 3, (a * b).into());
    m.set(3, 0, (a * b).into());
    DensityMatrix::validate(m).expect("pure Bell-like state is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;

    #[test]
    fn bell_like_entries() {
        let rho = bell_like_state(BellLikeParams::new(1.0).unwrap());
        assert_eq!(*rho.matrix(), ComplexMatrix::diag(&[1.0, 0.0, 0.0, 0.0]));

        let rho = bell_like_state(BellLikeParams::maximally_entangled());
        for (i, j) in [(0, 0), (3, 3), (0, 3), (3, 0)] {
            assert!((rho.get(i, j).re - 0.5).abs() < 1e-15);
        }

        let rho = bell_like_state(BellLikeParams::new(0.6).unwrap());
        assert!((rho.get(0, 0).re - 0.36).abs() < 1e-15);
        assert!((rho.get(3, 3).re - 0.64).abs() < 1e-15);
        assert!((rho.get(0, 3).re - 0.48).abs() < 1e-15);
    }

    #[test]
    fn alpha_out_of_range() {
        assert!(matches!(
            BellLikeParams::new(1.2),
            Err(Error::OutOfRange { name: "alpha", .. })
        ));
        assert!(BellLikeParams::new(-0.1).is_err());
        assert!(BellLikeParams::new(f64::NAN).is_err());
    }

    #[test]
    fn entropy_of_pure_and_mixed() {
        for a in [0.0, 0.25, 0.5, std::f64::consts::FRAC_1_SQRT_2, 1.0] {
            let s = bell_like_state(BellLikeParams::new(a).unwrap()).entropy();
            assert!(s.abs() < 1e-9, "alpha {a}: {s}");
        }
        let s = DensityMatrix::maximally_mixed(4).entropy();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn validate_accepts_maximally_mixed() {
        assert!(validate(ComplexMatrix::identity(4).scale(0.25)).is_ok());
    }

    #[test]
    fn validate_rejects_negative_eigenvalue() {
        let m = ComplexMatrix::diag(&[0.5, 0.6, 0.0, -0.1]);
        match validate(m) {
            Err(Error::NotPositive { min_eigenvalue }) => {
                assert!((min_eigenvalue + 0.1).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_excess_coherence() {
        // det [[0.5, 0.5], [0.5, 0.05]] = 0.025 - 0.25 < 0
        let mut m = ComplexMatrix::diag(&[0.5, 0.4, 0.05, 0.05]);
        m.set(0, 3, C64::new(0.5, 0.0));
        m.set(3, 0, C64::new(0.5, 0.0));
        assert!(matches!(validate(m), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn validate_rejects_trace_and_hermiticity() {
        assert!(matches!(
            validate(ComplexMatrix::identity(2)),
            Err(Error::TraceMismatch { .. })
        ));
        let m = ComplexMatrix::from_real(2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(matches!(validate(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn clamps_tiny_negative_eigenvalues() {
        let m = ComplexMatrix::diag(&[0.5 + 5e-10, 0.5, -5e-10, 0.0]);
        let rho = validate(m).unwrap();
        assert!((rho.entropy() - 1.0).abs() < 1e-8);
    }
}
