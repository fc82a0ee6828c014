//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.

use nalgebra::DMatrix;

use super::{frobenius, C64, CMat};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_THRESHOLD: f64 = 1e-13;

/// Eigen-decomposition `A = U diag(λ) U†` with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> CMat {
        self.map(|l| l)
    }

    /// `U diag(f(λ)) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_values(&values)
    }

    /// `U diag(values) U†`.
    pub fn with_values(&self, values: &[f64]) -> CMat {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &fl) in values.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        scaled * u.adjoint()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()))
    }
}

fn off_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[i + j * n].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Runs cyclic Jacobi sweeps on a Hermitian matrix. The caller is expected to
/// have symmetrized the input.
pub fn jacobi_eigh(a: &CMat) -> Result<SpectralDecomposition> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    if n == 0 {
        return Ok(SpectralDecomposition { eigenvalues: vec![], eigenvectors: CMat::zeros(0, 0) });
    }
    let scale = frobenius(a);
    let mut m: Vec<C64> = a.as_slice().to_vec();
    let mut v: Vec<C64> = CMat::identity(n, n).as_slice().to_vec();
    let threshold = OFF_DIAGONAL_THRESHOLD * scale;
    let negligible = 1e-18 * scale;

    let mut sweeps = 0;
    let mut off = off_norm(&m, n);
    while off > threshold && scale > 0.0 {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, residual: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = m[p + q * n];
                let r = beta.norm();
                if r <= negligible || r == 0.0 {
                    m[p + q * n] = C64::new(0.0, 0.0);
                    m[q + p * n] = C64::new(0.0, 0.0);
                    continue;
                }
                let alpha = m[p + p * n].re;
                let gamma = m[q + q * n].re;
                let phase = beta / r; // e^{iφ}
                let theta = (gamma - alpha) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e_minus = phase.conj(); // e^{-iφ}

                // A <- A J with J = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on columns p, q.
                for k in 0..n {
                    let akp = m[k + p * n];
                    let akq = m[k + q * n];
                    m[k + p * n] = akp * c - akq * e_minus * s;
                    m[k + q * n] = akp * s + akq * e_minus * c;
                }
                // A <- J† A on rows p, q.
                for k in 0..n {
                    let apk = m[p + k * n];
                    let aqk = m[q + k * n];
                    m[p + k * n] = apk * c - aqk * phase * s;
                    m[q + k * n] = apk * s + aqk * phase * c;
                }
                m[p + p * n] = C64::new(alpha - t * r, 0.0);
                m[q + q * n] = C64::new(gamma + t * r, 0.0);
                m[p + q * n] = C64::new(0.0, 0.0);
                m[q + p * n] = C64::new(0.0, 0.0);
                for k in 0..n {
                    let vkp = v[k + p * n];
                    let vkq = v[k + q * n];
                    v[k + p * n] = vkp * c - vkq * e_minus * s;
                    v[k + q * n] = vkp * s + vkq * e_minus * c;
                }
            }
        }
        off = off_norm(&m, n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[i + i * n].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| v[i + order[j] * n]);
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}
