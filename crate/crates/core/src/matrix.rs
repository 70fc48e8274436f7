//! Dense complex matrices and a Hermitian eigensolver.
//!
//! Everything here is sized for the 2×2 and 4×4 problems the rest of the
//! crate deals in. Storage is row-major; there is no sparse path.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity tolerance used by validation and the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::BadShape {
                dim,
                len: data.len(),
                expected: dim * dim,
            });
        }
        if let Some(k) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Real diagonal matrix. Panics on non-finite input.
    pub fn diag(values: &[f64]) -> Self {
        assert!(values.iter().all(|v| v.is_finite()), "non-finite diagonal");
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = C64::new(v, 0.0);
        }
        m
    }

    pub fn sigma_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn sigma_y() -> Self {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        Self::new(2, vec![z, -i, i, z]).unwrap()
    }

    pub fn sigma_z() -> Self {
        Self::diag(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product; block `(i, j)` of the result is `self[i, j] * other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (self.dim, other.dim);
        let n = p * q;
        let mut out = Self::zeros(n);
        for i in 0..p {
            for j in 0..p {
                let a = self.data[i * p + j];
                for k in 0..q {
                    for l in 0..q {
                        out.data[(i * q + k) * n + j * q + l] = a * other.data[k * q + l];
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// `self · rho · self†`
    pub fn conjugate(&self, rho: &Self) -> Result<Self> {
        self.matmul(rho)?.matmul(&self.adjoint())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |a[i,j] - conj(a[j,i])|`
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of a Hermitian matrix in descending order, by cyclic
    /// complex Jacobi rotations.
    pub fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        let residual = self.hermitian_residual();
        if residual > tol {
            return Err(Error::NotHermitian { residual });
        }
        let n = self.dim;
        let mut a = self.data.clone();
        // Symmetrize so that rounding in the input cannot leak into the spectrum.
        for i in 0..n {
            a[i * n + i] = C64::new(a[i * n + i].re, 0.0);
            for j in i + 1..n {
                let avg = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
                a[i * n + j] = avg;
                a[j * n + i] = avg.conj();
            }
        }

        let off_norm = |a: &[C64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += a[i * n + j].norm_sqr();
                    }
                }
            }
            s.sqrt()
        };

        let mut sweeps = 0;
        while off_norm(&a) > JACOBI_TOL {
            if sweeps == JACOBI_MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    sweeps,
                    off_norm: off_norm(&a),
                });
            }
            for p in 0..n {
                for q in p + 1..n {
                    jacobi_rotate(&mut a, n, p, q);
                }
            }
            sweeps += 1;
        }

        let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
        values.sort_by(|x, y| y.total_cmp(x));
        Ok(values)
    }
}

/// Zeroes `a[p][q]` with a unitary similarity on rows/columns `p` and `q`.
///
/// The off-diagonal phase is first rotated away so the remaining problem is
/// a real symmetric 2×2 Schur step.
fn jacobi_rotate(a: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;

    // Column q times conj(phase), row q times phase.
    for k in 0..n {
        a[k * n + q] *= phase.conj();
    }
    for k in 0..n {
        a[q * n + k] *= phase;
    }

    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let kp = a[k * n + p];
        let kq = a[k * n + q];
        a[k * n + p] = kp * c - kq * s;
        a[k * n + q] = kp * s + kq * c;
    }
    for k in 0..n {
        let pk = a[p * n + k];
        let qk = a[q * n + k];
        a[p * n + k] = pk * c - qk * s;
        a[q * n + k] = pk * s + qk * c;
    }
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (row, col): (usize, usize)) -> &C64 {
        &self.data[row * self.dim + col]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
