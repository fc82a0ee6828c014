//! Discretized transport: continuity-equation solves with gradient velocity
//! fields `ξ = ∂φ`, the action of a density path, and upper bounds on the
//! transport distance by path optimization.
//!
//! Potentials live in the real span of a GNS-orthonormal self-adjoint basis
//! of the algebra. There the weighted Laplacian `A(σ) = D† σ̂ D` is a real
//! symmetric matrix and the continuity equation reads `A φ = ρ̇`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::algebra::{DensityOperator, Subalgebra};
use crate::error::{Error, Result};
use crate::gradest::GeContext;
use crate::linalg::{self, c, json::MatrixJson, CMat};
use crate::means::OperatorMean;
use crate::qms::{fixed_point_algebra, LindbladGenerator};
use crate::sampling;

/// Relative eigenvalue cutoff of the pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Relative residual above which the right side is outside `range(A)`.
pub const CONNECT_TOL: f64 = 1e-9;

pub const UPPER_BOUND_KIND: &str = "discretized upper bound";

/// Quadrature of the metric along each straight segment of a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "points")]
pub enum SegmentRule {
    /// Metric frozen at the segment midpoint.
    Midpoint,
    /// Gauss–Legendre with the given number of nodes per segment.
    Gauss(usize),
}

/// Shared data for one generator and mean.
pub struct TransportContext<'a> {
    ge: GeContext<'a>,
    /// Algebra coordinates of the self-adjoint basis, one column each.
    herm: CMat,
    basis: Vec<CMat>,
    fixed: Subalgebra,
}

impl<'a> TransportContext<'a> {
    pub fn new(gen: &'a LindbladGenerator, mean: OperatorMean) -> Result<Self> {
        let basis = gen.algebra().hermitian_basis();
        let mut herm = CMat::zeros(gen.gns_dim(), basis.len());
        for (j, h) in basis.iter().enumerate() {
            herm.set_column(j, &gen.to_coords(h));
        }
        let fixed = fixed_point_algebra(gen)?.subalgebra;
        Ok(Self { ge: GeContext::new(gen, mean), herm, basis, fixed })
    }

    pub fn generator(&self) -> &LindbladGenerator {
        self.ge.generator()
    }

    /// `A(σ)` on self-adjoint coordinates. Algebra coordinates are
    /// orthonormal for the unnormalized trace, hence the `1/D`.
    pub fn metric(&self, sigma: &CMat) -> Result<DMatrix<f64>> {
        let form = self.ge.metric_form(sigma)?;
        let m = self.herm.adjoint() * form * &self.herm;
        let (n, d) = (m.nrows(), self.generator().ambient_dim() as f64);
        Ok(DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re) / d))
    }

    /// Self-adjoint coordinates of `x`.
    pub fn coords(&self, x: &CMat) -> DVector<f64> {
        let d = x.nrows() as f64;
        DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().map(|h| (h.adjoint() * x).trace().re / d),
        )
    }

    pub fn element(&self, phi: &DVector<f64>) -> CMat {
        let d = self.generator().ambient_dim();
        let mut out = CMat::zeros(d, d);
        for (h, &p) in self.basis.iter().zip(phi.iter()) {
            out += h * c(p);
        }
        out
    }

    pub fn fixed_point_expectation(&self, rho: &CMat) -> CMat {
        self.fixed.apply(rho)
    }

    /// Minimal-norm `φ` with `A(σ) φ = r`, and `φ·r`.
    fn solve(&self, sigma: &CMat, r: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let a = self.metric(sigma)?;
        let eig = SymmetricEigen::new(a.clone());
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let mut phi = DVector::zeros(r.len());
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l > PINV_CUTOFF * top {
                let v = eig.eigenvectors.column(k);
                phi += v * (v.dot(r) / l);
            }
        }
        let residual = (&a * &phi - r).norm();
        if residual > CONNECT_TOL * r.norm().max(1.0) {
            return Err(Error::NotConnectable { residual });
        }
        let q = phi.dot(r);
        Ok((phi, q))
    }

    /// `∫₀¹ (δ·A(ρ_s)⁺δ)^{p} ds` for `p = 1` and `p = ½` along the straight
    /// segment, with `δ = ρ_b − ρ_a`.
    fn segment(&self, a: &CMat, b: &CMat, rule: &Rule) -> Result<(f64, f64)> {
        let delta = b - a;
        let r = self.coords(&delta);
        if r.norm() == 0.0 {
            return Ok((0.0, 0.0));
        }
        let (mut q, mut l) = (0.0, 0.0);
        for &(s, w) in &rule.nodes {
            let sigma = a * c(1.0 - s) + b * c(s);
            let (_, qs) = self.solve(&sigma, &r)?;
            let qs = qs.max(0.0);
            q += w * qs;
            l += w * qs.sqrt();
        }
        Ok((q, l))
    }
}

struct Rule {
    /// Nodes on `[0, 1]` with weights summing to one.
    nodes: Vec<(f64, f64)>,
}

impl Rule {
    fn new(rule: SegmentRule) -> Self {
        match rule {
            SegmentRule::Midpoint => Rule { nodes: vec![(0.5, 1.0)] },
            SegmentRule::Gauss(n) => {
                let q = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("nonzero"));
                Rule { nodes: q.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect() }
            }
        }
    }
}

/// Minimal-norm potential `φ` of the continuity equation
/// `D† ρ̂_m D φ = (ρ_b − ρ_a)/Δt` with `ρ_m` the midpoint.
pub fn continuity_solve(
    gen: &LindbladGenerator,
    mean: OperatorMean,
    rho_a: &CMat,
    rho_b: &CMat,
    dt: f64,
) -> Result<CMat> {
    let ctx = TransportContext::new(gen, mean)?;
    continuity_solve_with(&ctx, rho_a, rho_b, dt)
}

pub fn continuity_solve_with(ctx: &TransportContext, rho_a: &CMat, rho_b: &CMat, dt: f64) -> Result<CMat> {
    let alg = ctx.generator().algebra();
    DensityOperator::new(alg, rho_a.clone())?;
    DensityOperator::new(alg, rho_b.clone())?;
    let mid = (rho_a + rho_b) * c(0.5);
    let r = ctx.coords(&((rho_b - rho_a) / c(dt)));
    let (phi, _) = ctx.solve(&mid, &r)?;
    Ok(ctx.element(&phi))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Action {
    /// `Σ_k ∫ ‖Dρ‖ dt`.
    pub length: f64,
    /// `∫ ‖Dρ‖² dt`.
    pub energy: f64,
}

/// Length and energy of the piecewise-linear path through `densities` on a
/// uniform grid of `[0, 1]`.
pub fn action(ctx: &TransportContext, densities: &[CMat], rule: SegmentRule) -> Result<Action> {
    let rule = Rule::new(rule);
    let n = densities.len().saturating_sub(1);
    let (mut q, mut l) = (0.0, 0.0);
    for w in densities.windows(2) {
        let (qs, ls) = ctx.segment(&w[0], &w[1], &rule)?;
        q += qs;
        l += ls;
    }
    let act = Action { length: l, energy: n as f64 * q };
    if act.length * act.length > act.energy * (1.0 + 1e-10) + 1e-14 {
        return Err(Error::Inconsistent(format!("length² {} exceeds energy {}", act.length.powi(2), act.energy)));
    }
    Ok(act)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportConfig {
    /// Number of segments.
    pub n: usize,
    /// Descent sweeps over the interior points.
    pub iters: usize,
    pub seed: u64,
    pub rule: SegmentRule,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self { n: 8, iters: 200, seed: 0, rule: SegmentRule::Gauss(4) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPath {
    /// Always "discretized upper bound": no convergence to the continuum
    /// distance is claimed.
    pub kind: String,
    pub mean: OperatorMean,
    pub rule: SegmentRule,
    pub densities: Vec<MatrixJson>,
    /// Midpoint potentials of each segment.
    pub potentials: Vec<MatrixJson>,
    /// Discretized upper bound: the length of the best path found.
    pub length: f64,
    pub energy: f64,
    /// Energy after each sweep.
    pub action_trace: Vec<f64>,
    pub seed: u64,
}

impl TransportPath {
    pub fn density_matrices(&self) -> Result<Vec<CMat>> {
        self.densities.iter().map(|m| m.to_matrix()).collect()
    }
}

fn check_endpoints(ctx: &TransportContext, rho0: &CMat, rho1: &CMat) -> Result<()> {
    let alg = ctx.generator().algebra();
    DensityOperator::new(alg, rho0.clone())?;
    DensityOperator::new(alg, rho1.clone())?;
    let residual = linalg::frobenius(&(ctx.fixed_point_expectation(rho0) - ctx.fixed_point_expectation(rho1)));
    if residual > CONNECT_TOL * (1.0 + linalg::frobenius(rho0)) {
        return Err(Error::NotConnectable { residual });
    }
    Ok(())
}

/// Linear interpolation with `n` segments.
pub fn linear_path(rho0: &CMat, rho1: &CMat, n: usize) -> Vec<CMat> {
    (0..=n).map(|k| {
        let s = k as f64 / n as f64;
        rho0 * c(1.0 - s) + rho1 * c(s)
    })
    .collect()
}

/// Inserts segment midpoints, doubling the number of segments while keeping
/// the same piecewise-linear curve.
pub fn refine_path(path: &[CMat]) -> Vec<CMat> {
    let mut out = Vec::with_capacity(2 * path.len());
    for w in path.windows(2) {
        out.push(w[0].clone());
        out.push((&w[0] + &w[1]) * c(0.5));
    }
    out.extend(path.last().cloned());
    out
}

/// Upper bound on the transport distance: the shortest piecewise-linear path
/// found by coordinate descent on Cholesky factors of the interior points,
/// started from the linear interpolation.
pub fn w_upper_bound(
    gen: &LindbladGenerator,
    mean: OperatorMean,
    rho0: &CMat,
    rho1: &CMat,
    config: &TransportConfig,
) -> Result<TransportPath> {
    let ctx = TransportContext::new(gen, mean)?;
    optimize_path(&ctx, linear_path(rho0, rho1, config.n.max(1)), config)
}

/// Same as [`w_upper_bound`] from a given initial path.
pub fn optimize_path(ctx: &TransportContext, initial: Vec<CMat>, config: &TransportConfig) -> Result<TransportPath> {
    let n = initial.len() - 1;
    let (rho0, rho1) = (&initial[0], &initial[n]);
    check_endpoints(ctx, rho0, rho1)?;
    let alg = ctx.generator().algebra();
    let rule = Rule::new(config.rule);
    let target_fix = ctx.fixed_point_expectation(rho0);

    let mut path = initial;
    let mut seg: Vec<(f64, f64)> =
        path.windows(2).map(|w| ctx.segment(&w[0], &w[1], &rule)).collect::<Result<_>>()?;
    let total = |seg: &[(f64, f64)]| -> (f64, f64) {
        (n as f64 * seg.iter().map(|s| s.0).sum::<f64>(), seg.iter().map(|s| s.1).sum::<f64>())
    };
    let (mut energy, start_len) = total(&seg);
    let mut best = (start_len, path.clone());
    let mut trace = vec![energy];

    let mut params: Vec<Vec<f64>> = Vec::with_capacity(n.saturating_sub(1));
    for rho in &path[1..n] {
        let smoothed = sampling::smooth(alg, &DensityOperator::new(alg, rho.clone())?, 1e-12)?;
        params.push(sampling::to_cholesky(alg, &smoothed).ok_or(Error::NotPositive { eigenvalue: 0.0 })?);
    }
    let scale = params.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    let mut step = 0.05 * scale;
    let mut order: Vec<usize> = (1..n).collect();
    let mut rng = sampling::point_rng(config.seed, 0);

    // candidate interior density from parameters, with the fixed-point part
    // pinned to that of the endpoints
    let realize = |x: &[f64]| -> Option<CMat> {
        let rho = sampling::from_cholesky(alg, x).ok()?.into_inner();
        let rho = &rho - ctx.fixed_point_expectation(&rho) + &target_fix;
        let min = linalg::eig_hermitian(&rho).ok()?.min_eigenvalue();
        (min >= 0.0).then_some(rho)
    };

    for _ in 0..config.iters {
        if n < 2 || step < 1e-9 * scale {
            break;
        }
        order.shuffle(&mut rng);
        let mut improved = false;
        for &k in &order {
            for i in 0..params[k - 1].len() {
                for dir in [1.0, -1.0] {
                    let mut x = params[k - 1].clone();
                    x[i] += dir * step;
                    let Some(rho) = realize(&x) else { continue };
                    let (Ok(left), Ok(right)) =
                        (ctx.segment(&path[k - 1], &rho, &rule), ctx.segment(&rho, &path[k + 1], &rule))
                    else {
                        continue;
                    };
                    let old = seg[k - 1].0 + seg[k].0;
                    if left.0 + right.0 < old {
                        params[k - 1] = x;
                        path[k] = rho;
                        seg[k - 1] = left;
                        seg[k] = right;
                        improved = true;
                        let (_, len) = total(&seg);
                        if len < best.0 {
                            best = (len, path.clone());
                        }
                        break;
                    }
                }
            }
        }
        energy = total(&seg).0;
        trace.push(energy);
        if !improved {
            step *= 0.5;
        }
    }

    let (length, densities) = best;
    let act = action(ctx, &densities, config.rule)?;
    let potentials = densities
        .windows(2)
        .map(|w| Ok(MatrixJson::from_matrix(&continuity_solve_with(ctx, &w[0], &w[1], 1.0 / n as f64)?)))
        .collect::<Result<Vec<_>>>()
        .unwrap_or_default();
    Ok(TransportPath {
        kind: UPPER_BOUND_KIND.into(),
        mean: ctx.ge.mean(),
        rule: config.rule,
        densities: densities.iter().map(MatrixJson::from_matrix).collect(),
        potentials,
        length: length.min(act.length),
        energy: act.energy,
        action_trace: trace,
        seed: config.seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EviRow {
    pub t: f64,
    /// Upper bound on `W(P_tρ, σ)²`.
    pub w2: f64,
    /// Forward difference of `½W²`.
    pub half_dw2_dt: f64,
    pub lhs: f64,
    /// `Ent(σ) − Ent(P_tρ)`.
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EviReport {
    pub label: String,
    #[serde(rename = "K")]
    pub k: f64,
    pub rows: Vec<EviRow>,
    pub min_margin: f64,
}

/// Indicative check of `d/dt ½W²(P_tρ, σ) + K/2 W²(P_tρ, σ) ≤ Ent(σ) − Ent(P_tρ)`
/// with `W` replaced by path-optimized upper bounds and the derivative by a
/// forward difference of step `h`. Not a proof of anything in either
/// direction.
pub fn evi_indicator(
    ctx: &TransportContext,
    rho: &CMat,
    sigma: &CMat,
    k: f64,
    t_grid: &[f64],
    h: f64,
    config: &TransportConfig,
) -> Result<EviReport> {
    let gen = ctx.generator();
    let w = |t: f64| -> Result<f64> {
        let start = gen.semigroup_apply(t, rho)?;
        let n = config.n.max(1);
        Ok(optimize_path(ctx, linear_path(&start, sigma, n), config)?.length)
    };
    let ent_sigma = crate::entfun::entropy_fix(gen, sigma)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (w0, w1) = (w(t)?, w(t + h)?);
        let half_dw2_dt = 0.5 * (w1 * w1 - w0 * w0) / h;
        let lhs = half_dw2_dt + 0.5 * k * w0 * w0;
        let rhs = ent_sigma - crate::entfun::entropy_fix(gen, &gen.semigroup_apply(t, rho)?)?;
        rows.push(EviRow { t, w2: w0 * w0, half_dw2_dt, lhs, rhs, margin: rhs - lhs });
    }
    let min_margin = rows.iter().fold(f64::INFINITY, |m, r| m.min(r.margin));
    Ok(EviReport {
        label: "indicative only, not rigorous: W is replaced by discretized upper bounds".into(),
        k,
        rows,
        min_margin,
    })
}
