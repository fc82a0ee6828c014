//! Intertwining criterion: a family `vecP_t` on the tangent space with
//! `∂P_t = vecP_t ∂` and `vecP_t† L(ρ) vecP_t ≤ e^{−2Kt} L(P_tρ)` (and the
//! same with `R`) implies `GE(K,∞)`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{log_grid, EXACT_CAP};
use crate::calculus::TangentModule;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::qms::LindbladGenerator;
use crate::sampling;

pub const INTERTWINE_TOL: f64 = 1e-9;

#[derive(Clone)]
pub enum Candidate {
    /// `e^{−rate·t} ⊕_j P_t`.
    Semigroup { rate: f64 },
    /// `e^{−rate·t} id_H`.
    ScaledIdentity { rate: f64 },
    /// Any `t ↦ vecP_t` as an `n D² × n D²` matrix.
    Custom(Arc<dyn Fn(f64) -> CMat + Send + Sync>),
}

impl fmt::Debug for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Candidate::Semigroup { rate } => write!(f, "Semigroup {{ rate: {rate} }}"),
            Candidate::ScaledIdentity { rate } => write!(f, "ScaledIdentity {{ rate: {rate} }}"),
            Candidate::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwineConfig {
    pub num_rho: usize,
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub tol: f64,
}

impl Default for IntertwineConfig {
    fn default() -> Self {
        Self { num_rho: 20, t_grid: log_grid(1e-2, 5.0, 10), seed: 0, tol: super::GE_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwinePoint {
    pub t: f64,
    pub rho_id: usize,
    /// Smallest eigenvalue of `e^{−2Kt} L(P_tρ) − vecP† L(ρ) vecP`.
    pub left_margin: f64,
    pub right_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwineReport {
    #[serde(rename = "K")]
    pub k: f64,
    /// Largest relative residual of `∂P_t − vecP_t ∂` over the time grid.
    pub intertwining_residual: f64,
    /// Largest residual of `J vecP_t J − vecP_t`.
    pub j_commutation_residual: f64,
    pub points: Vec<IntertwinePoint>,
    pub min_left_margin: f64,
    pub min_right_margin: f64,
    pub intertwines: bool,
    pub pass: bool,
}

/// `vec(xᵀ) = T vec(x)`.
fn transpose_permutation(d: usize) -> CMat {
    let mut t = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            t[(i * d + j, j * d + i)] = c(1.0);
        }
    }
    t
}

fn ambient_semigroup(gen: &LindbladGenerator) -> Result<linalg::SpectralDecomposition> {
    linalg::eig_hermitian(gen.superop())
}

fn candidate_at(
    candidate: &Candidate,
    module: &TangentModule,
    ambient: &linalg::SpectralDecomposition,
    t: f64,
) -> Result<CMat> {
    let n = module.components();
    let d = module.ambient_dim();
    let size = n * d * d;
    let m = match candidate {
        Candidate::ScaledIdentity { rate } => CMat::identity(size, size) * c((-rate * t).exp()),
        Candidate::Semigroup { rate } => {
            let p = ambient.map(|l| (-t * l.max(0.0)).exp());
            module.block_diagonal(&p) * c((-rate * t).exp())
        }
        Candidate::Custom(f) => f(t),
    };
    if m.nrows() != size || m.ncols() != size {
        return Err(Error::DimensionMismatch { expected: size, got: m.nrows() });
    }
    Ok(m)
}

/// Verifies the three intertwining conditions for `candidate` on sampled
/// times and densities.
pub fn intertwine_check(
    gen: &LindbladGenerator,
    candidate: &Candidate,
    k: f64,
    config: &IntertwineConfig,
) -> Result<IntertwineReport> {
    let module = TangentModule::new(gen);
    let d = gen.ambient_dim();
    let size = module.components() * d * d;
    if size > EXACT_CAP {
        return Err(Error::SizeCap { size, cap: EXACT_CAP });
    }
    let ambient = ambient_semigroup(gen)?;
    let dq = module.stacked() * gen.isometry();
    let dq_norm = linalg::frobenius(&dq);
    let perm = module.block_diagonal(&transpose_permutation(d));

    let mut candidates = Vec::with_capacity(config.t_grid.len());
    let mut intertwining_residual: f64 = 0.0;
    let mut j_residual: f64 = 0.0;
    for &t in &config.t_grid {
        let vp = candidate_at(candidate, &module, &ambient, t)?;
        let lhs = &dq * gen.semigroup_matrix(t)?;
        let rhs = &vp * &dq;
        intertwining_residual = intertwining_residual.max(linalg::frobenius(&(lhs - rhs)) / (1.0 + dq_norm));
        let flipped = &perm * vp.map(|z| z.conj()) * &perm;
        j_residual = j_residual.max(linalg::frobenius(&(flipped - &vp)));
        candidates.push(vp);
    }

    let samples: Vec<CMat> = (0..config.num_rho)
        .map(|i| Ok(sampling::mixed_sample(gen.algebra(), config.seed, i as u64, None)?.1.into_inner()))
        .collect::<Result<_>>()?;
    let nt = config.t_grid.len();
    let points: Vec<IntertwinePoint> = (0..samples.len() * nt)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nt, idx % nt);
            let t = config.t_grid[j];
            let rho = &samples[i];
            let pt_rho = gen.semigroup_apply(t, rho)?;
            let vp = &candidates[j];
            let factor = c((-2.0 * k * t).exp());
            let margin = |before: CMat, after: CMat| -> Result<f64> {
                let m = linalg::hermitian_part(&(after * factor - vp.adjoint() * before * vp));
                Ok(linalg::eig_hermitian(&m)?.min_eigenvalue())
            };
            Ok(IntertwinePoint {
                t,
                rho_id: i,
                left_margin: margin(module.left_superop(rho), module.left_superop(&pt_rho))?,
                right_margin: margin(module.right_superop(rho), module.right_superop(&pt_rho))?,
            })
        })
        .collect::<Result<_>>()?;
    let min_left_margin = points.iter().fold(f64::INFINITY, |m, p| m.min(p.left_margin));
    let min_right_margin = points.iter().fold(f64::INFINITY, |m, p| m.min(p.right_margin));
    let intertwines = intertwining_residual <= INTERTWINE_TOL;
    Ok(IntertwineReport {
        k,
        intertwining_residual,
        j_commutation_residual: j_residual,
        points,
        min_left_margin,
        min_right_margin,
        intertwines,
        pass: intertwines && min_left_margin >= -config.tol && min_right_margin >= -config.tol,
    })
}
