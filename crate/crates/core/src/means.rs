//! Operator means and the weighted metric `‖ξ‖²_ρ = ⟨ξ, ρ̂ξ⟩`.
//!
//! `ρ̂ = Λ(L(ρ), R(ρ))` is applied as a double operator integral: with
//! `ρ = U diag(λ) U†`, each component of `ξ` is conjugated into the
//! eigenbasis, multiplied entrywise by `m(λ_k, λ_l)` and conjugated back.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::TangentVector;
use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, CMat, CVec};

/// Eigenvalues of ρ below `-NEGATIVE_TOL` are an error, the rest are clamped.
pub const NEGATIVE_TOL: f64 = 1e-10;
const LOG_SERIES_CUTOFF: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorMean {
    Arithmetic,
    Logarithmic,
    Geometric,
    Harmonic,
    Left,
    Right,
}

impl OperatorMean {
    pub const ALL: [OperatorMean; 6] = [
        OperatorMean::Arithmetic,
        OperatorMean::Logarithmic,
        OperatorMean::Geometric,
        OperatorMean::Harmonic,
        OperatorMean::Left,
        OperatorMean::Right,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorMean::Arithmetic => "arithmetic",
            OperatorMean::Logarithmic => "logarithmic",
            OperatorMean::Geometric => "geometric",
            OperatorMean::Harmonic => "harmonic",
            OperatorMean::Left => "left",
            OperatorMean::Right => "right",
        }
    }

    pub fn is_symmetric(self) -> bool {
        !matches!(self, OperatorMean::Left | OperatorMean::Right)
    }

    /// Scalar kernel `m(s, t)` on `[0, ∞)²`.
    pub fn kernel(self, s: f64, t: f64) -> f64 {
        match self {
            OperatorMean::Arithmetic => 0.5 * (s + t),
            OperatorMean::Left => s,
            OperatorMean::Right => t,
            OperatorMean::Geometric => (s * t).sqrt(),
            OperatorMean::Harmonic => {
                if s <= 0.0 || t <= 0.0 {
                    0.0
                } else {
                    2.0 * s * t / (s + t)
                }
            }
            OperatorMean::Logarithmic => log_mean(s, t),
        }
    }

    /// `f(x) = m(1, x)`, the representing function of the mean.
    pub fn representing_function(self, x: f64) -> f64 {
        self.kernel(1.0, x)
    }
}

/// `(t − s)/(ln t − ln s)`, evaluated as `s · expm1(u)/u` with `u = ln(t/s)`.
fn log_mean(s: f64, t: f64) -> f64 {
    if s <= 0.0 || t <= 0.0 {
        return 0.0;
    }
    let u = (t / s).ln();
    if u.abs() < LOG_SERIES_CUTOFF {
        s * (1.0 + u / 2.0 + u * u / 6.0)
    } else {
        s * u.exp_m1() / u
    }
}

impl fmt::Display for OperatorMean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorMean {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorMean::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownMean(s.to_string()))
    }
}

/// `ρ̂` for a fixed mean and density, ready to be applied.
#[derive(Clone, Debug)]
pub struct RhoHat {
    eigenvectors: CMat,
    eigenvalues: Vec<f64>,
    weights: CMat,
}

impl RhoHat {
    pub fn new(mean: OperatorMean, rho: &CMat) -> Result<Self> {
        let sd = linalg::eig_hermitian(rho)?;
        let min = sd.min_eigenvalue();
        if min < -NEGATIVE_TOL {
            return Err(Error::NotPositive { eigenvalue: min });
        }
        let lambda: Vec<f64> = sd.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let n = lambda.len();
        let weights = CMat::from_fn(n, n, |k, l| c(mean.kernel(lambda[k], lambda[l])));
        Ok(Self { eigenvectors: sd.eigenvectors, eigenvalues: lambda, weights })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `ρ̂` on one component.
    pub fn apply_component(&self, x: &CMat) -> CMat {
        let u = &self.eigenvectors;
        let y = u.adjoint() * x * u;
        u * y.component_mul(&self.weights) * u.adjoint()
    }

    pub fn apply(&self, xi: &TangentVector) -> TangentVector {
        TangentVector { components: xi.components.iter().map(|x| self.apply_component(x)).collect() }
    }

    /// Unitary `V = Ū ⊗ U` with `vec(U Y U†) = V vec(Y)`.
    pub fn basis_change(&self) -> CMat {
        kron(&self.eigenvectors.conjugate(), &self.eigenvectors)
    }

    /// Multiplier entries `m(λ_k, λ_l)` in vectorized order.
    pub fn multiplier_diagonal(&self) -> Vec<f64> {
        linalg::vec(&self.weights).iter().map(|z| z.re).collect()
    }

    /// Matrix of `ρ̂` on one component (`D² × D²`).
    pub fn block_matrix(&self) -> CMat {
        let v = self.basis_change();
        let w = CVec::from_iterator(self.weights.len(), linalg::vec(&self.weights).iter().copied());
        let mut scaled = v.clone();
        for (j, wj) in w.iter().enumerate() {
            scaled.column_mut(j).scale_mut(wj.re);
        }
        scaled * v.adjoint()
    }
}

pub fn rho_hat_apply(mean: OperatorMean, rho: &CMat, xi: &TangentVector) -> Result<TangentVector> {
    Ok(RhoHat::new(mean, rho)?.apply(xi))
}

/// Block-diagonal matrix of `ρ̂` on `H` with `n` components.
pub fn rho_hat_matrix(mean: OperatorMean, rho: &CMat, n: usize) -> Result<CMat> {
    let block = RhoHat::new(mean, rho)?.block_matrix();
    let b = block.nrows();
    let mut out = CMat::zeros(n * b, n * b);
    for j in 0..n {
        out.view_mut((j * b, j * b), (b, b)).copy_from(&block);
    }
    Ok(out)
}

/// `⟨ξ, ρ̂ξ⟩_H`, clamped at zero when within tolerance below it.
pub fn metric_norm_sq(mean: OperatorMean, rho: &CMat, xi: &TangentVector) -> Result<f64> {
    let v = xi.inner(&rho_hat_apply(mean, rho, xi)?).re;
    if v < -NEGATIVE_TOL * (1.0 + xi.norm_sq()) {
        return Err(Error::NotPositive { eigenvalue: v });
    }
    Ok(v.max(0.0))
}

/// `Λ(A, B) = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}` for positive definite `A`.
pub fn matrix_mean(mean: OperatorMean, a: &CMat, b: &CMat) -> Result<CMat> {
    let sd = linalg::eig_hermitian(a)?;
    if sd.min_eigenvalue() <= 0.0 {
        return Err(Error::NotPositive { eigenvalue: sd.min_eigenvalue() });
    }
    let half = sd.map(f64::sqrt);
    let inv_half = sd.map(|l| 1.0 / l.sqrt());
    let inner = linalg::hermitian_part(&(&inv_half * b * &inv_half));
    let f = linalg::matrix_function(&inner, |x| Some(mean.representing_function(x.max(0.0))))?;
    Ok(linalg::hermitian_part(&(&half * f * &half)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeanAudit {
    pub mean: OperatorMean,
    /// Smallest relative eigenvalue of `Λ(C, D) − Λ(A, B)` for `A ≤ C`, `B ≤ D`.
    pub monotonicity_margin: f64,
    /// Smallest relative eigenvalue of `Λ(CAC, CBC) − C Λ(A, B) C`.
    pub transformer_margin: f64,
    /// `max ‖Λ(A, A) − A‖ / ‖A‖`.
    pub normalization_residual: f64,
    /// `max ‖Λ(A + εI, B + εI) − Λ(A, B)‖` at `ε = 1e-9`.
    pub continuity_residual: f64,
    /// Scalar kernel symmetric on the grid.
    pub symmetric: bool,
    /// Scalar kernel nondecreasing in each argument and `m(s, s) = s` on the grid.
    pub scalar_checks: bool,
    pub pass: bool,
    pub witness: Option<String>,
}

pub const AUDIT_MARGIN: f64 = -1e-9;

fn rel_min_eig(m: &CMat) -> Result<f64> {
    let sd = linalg::eig_hermitian(m)?;
    Ok(sd.min_eigenvalue() / (1.0 + sd.spectral_norm()))
}

fn random_pd(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    let g = linalg::random_complex(rng, d, d);
    &g * g.adjoint() + CMat::identity(d, d) * c(0.1)
}

/// Sampled matrix-level check of the mean axioms.
pub fn mean_axiom_audit(mean: OperatorMean, samples: usize, seed: u64) -> Result<MeanAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut monotonicity_margin = f64::INFINITY;
    let mut transformer_margin = f64::INFINITY;
    let mut normalization_residual: f64 = 0.0;
    let mut continuity_residual: f64 = 0.0;
    let mut witness = None;
    for s in 0..samples {
        let d = 2 + s % 3;
        let a = random_pd(&mut rng, d);
        let b = random_pd(&mut rng, d);
        let p = linalg::random_complex(&mut rng, d, d);
        let q = linalg::random_complex(&mut rng, d, d);
        let cc = &a + &p * p.adjoint() * c(rng.random::<f64>());
        let dd = &b + &q * q.adjoint() * c(rng.random::<f64>());
        let lab = matrix_mean(mean, &a, &b)?;
        let mono = rel_min_eig(&(matrix_mean(mean, &cc, &dd)? - &lab))?;
        if mono < monotonicity_margin {
            monotonicity_margin = mono;
            if mono < AUDIT_MARGIN {
                witness = Some(format!("monotonicity fails for sample {s} (dimension {d})"));
            }
        }
        let t = linalg::random_hermitian(&mut rng, d) + CMat::identity(d, d) * c(3.0);
        let tr = rel_min_eig(&(matrix_mean(mean, &(&t * &a * &t), &(&t * &b * &t))? - &t * &lab * &t))?;
        if tr < transformer_margin {
            transformer_margin = tr;
            if tr < AUDIT_MARGIN {
                witness = Some(format!("transformer inequality fails for sample {s} (dimension {d})"));
            }
        }
        let aa = matrix_mean(mean, &a, &a)?;
        normalization_residual = normalization_residual.max(linalg::rel_dist(&aa, &a));
        let eps = CMat::identity(d, d) * c(1e-9);
        let shifted = matrix_mean(mean, &(&a + &eps), &(&b + &eps))?;
        continuity_residual = continuity_residual.max(linalg::frobenius(&(shifted - &lab)));
    }
    let grid: Vec<f64> = (0..=40).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 40.0)).collect();
    let mut symmetric = true;
    let mut scalar_checks = true;
    for &s in &grid {
        if (mean.kernel(s, s) - s).abs() > 1e-12 * s {
            scalar_checks = false;
        }
        for (i, &t) in grid.iter().enumerate() {
            let m = mean.kernel(s, t);
            if (m - mean.kernel(t, s)).abs() > 1e-12 * (1.0 + m) {
                symmetric = false;
            }
            if i > 0 {
                let prev = grid[i - 1];
                if mean.kernel(s, t) + 1e-12 * m < mean.kernel(s, prev)
                    || mean.kernel(t, s) + 1e-12 * m < mean.kernel(prev, s)
                {
                    scalar_checks = false;
                }
            }
        }
    }
    let pass = monotonicity_margin >= AUDIT_MARGIN
        && transformer_margin >= AUDIT_MARGIN
        && normalization_residual <= 1e-9
        && continuity_residual <= 1e-6
        && scalar_checks
        && symmetric == mean.is_symmetric();
    Ok(MeanAudit {
        mean,
        monotonicity_margin,
        transformer_margin,
        normalization_residual,
        continuity_residual,
        symmetric,
        scalar_checks,
        pass,
        witness,
    })
}
