//! Largest `K` for which the GE form is positive, pointwise and globally.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{default_t_grid, GeContext};
use crate::algebra::DensityOperator;
use crate::descent::{coordinate_descent, DescentOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, json::MatrixJson, CMat};
use crate::sampling;

/// Eigenvalues of `B` below `RANGE_CUTOFF · ‖B‖` span its kernel.
pub const RANGE_CUTOFF: f64 = 1e-10;
/// Eigenvalues between this and `RANGE_CUTOFF` (relative) are ambiguous.
pub const AMBIGUOUS_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum PointwiseK {
    Finite(f64),
    /// `A = 0` on the range of `B`: every `K` works.
    Unbounded,
    /// `ker B ⊄ ker A`: no `K` works.
    KernelViolation,
}

impl PointwiseK {
    /// `+∞` for unbounded, `−∞` for a kernel violation.
    pub fn value(self) -> f64 {
        match self {
            PointwiseK::Finite(k) => k,
            PointwiseK::Unbounded => f64::INFINITY,
            PointwiseK::KernelViolation => f64::NEG_INFINITY,
        }
    }
}

/// Solves the generalized eigenproblem `A v = c B v` on `range(B)`.
pub(crate) fn from_terms(t: f64, a: &CMat, b: &CMat) -> Result<PointwiseK> {
    if t <= 0.0 {
        return Err(Error::Inconsistent(format!("optimal K needs t > 0, got {t}")));
    }
    let sd = linalg::eig_hermitian(b)?;
    let nb = sd.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let na = linalg::frobenius(a);
    if nb == 0.0 {
        return Ok(if na == 0.0 { PointwiseK::Unbounded } else { PointwiseK::KernelViolation });
    }
    let ambiguous: Vec<f64> = sd
        .eigenvalues
        .iter()
        .copied()
        .filter(|&l| l >= AMBIGUOUS_FLOOR * nb && l < RANGE_CUTOFF * nb)
        .collect();
    if !ambiguous.is_empty() {
        return Err(Error::RankDetection(sd.eigenvalues.clone()));
    }
    let (range, kernel): (Vec<usize>, Vec<usize>) =
        (0..sd.eigenvalues.len()).partition(|&k| sd.eigenvalues[k] >= RANGE_CUTOFF * nb);
    if !kernel.is_empty() {
        let v0 = sd.eigenvectors.select_columns(&kernel);
        let restricted = v0.adjoint() * a * &v0;
        if linalg::frobenius(&restricted) > RANGE_CUTOFF * na.max(nb) {
            return Ok(PointwiseK::KernelViolation);
        }
    }
    let mut w = sd.eigenvectors.select_columns(&range);
    for (col, &k) in range.iter().enumerate() {
        let s = sd.eigenvalues[k].sqrt();
        w.column_mut(col).unscale_mut(s);
    }
    let m = linalg::hermitian_part(&(w.adjoint() * a * &w));
    let c_star = linalg::eig_hermitian(&m)?.max_eigenvalue();
    if c_star <= 0.0 {
        return Ok(PointwiseK::Unbounded);
    }
    Ok(PointwiseK::Finite(-c_star.ln() / (2.0 * t)))
}

/// Largest `K` with the GE form positive at `(t, ρ)`.
pub fn optimal_k(ctx: &GeContext, t: f64, rho: &CMat) -> Result<PointwiseK> {
    if t <= 0.0 {
        return Err(Error::Inconsistent(format!("optimal K needs t > 0, got {t}")));
    }
    let (a, b) = ctx.terms(t, rho)?;
    from_terms(t, &a, &b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub t_grid: Vec<f64>,
    /// Random restarts in addition to the trace state.
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub max_evals: usize,
    pub seed: u64,
    /// Extra starting densities tried before the random ones.
    #[serde(default)]
    pub starts: Vec<MatrixJson>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { t_grid: default_t_grid(), restarts: 8, max_evals: 4000, seed: 0, starts: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalK {
    /// Infimum found; `None` when every evaluated point is unbounded.
    pub k_star: Option<f64>,
    pub t_star: f64,
    pub rho: MatrixJson,
    /// The infimum sits at the smallest grid time, so `K*(t)` may keep
    /// decreasing as `t → 0`.
    pub small_t_limited: bool,
    pub evaluations: usize,
    pub kernel_violations: usize,
    pub restarts: usize,
    pub seed: u64,
}

struct Eval {
    k: f64,
    t: f64,
    violations: usize,
}

fn curve_min(ctx: &GeContext, rho: &CMat, grid: &[f64]) -> Result<Eval> {
    let c_rho = ctx.metric_form(rho)?;
    let mut best = Eval { k: f64::INFINITY, t: grid[0], violations: 0 };
    for &t in grid {
        let (a, b) = ctx.terms_with(t, rho, &c_rho)?;
        match from_terms(t, &a, &b) {
            Ok(PointwiseK::Finite(k)) if k < best.k => {
                best.k = k;
                best.t = t;
            }
            Ok(PointwiseK::KernelViolation) => best.violations += 1,
            Ok(_) => {}
            Err(Error::RankDetection(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

struct Run {
    k: f64,
    t: f64,
    rho: CMat,
    evaluations: usize,
    violations: usize,
}

fn descend(ctx: &GeContext, start: &CMat, config: &SearchConfig) -> Result<Run> {
    let alg = ctx.generator().algebra();
    let rho0 = sampling::smooth(alg, &DensityOperator::new(alg, start.clone())?, 1e-12)?;
    let x0 = sampling::to_cholesky(alg, &rho0).ok_or(Error::NotPositive { eigenvalue: 0.0 })?;
    let scale = x0.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    let opts = DescentOptions { initial_step: 0.25 * scale, min_step: 1e-7 * scale, max_evals: config.max_evals };
    let mut violations = 0;
    let d = coordinate_descent(x0, opts, |x| {
        if x.iter().all(|v| *v == 0.0) {
            return Ok(None);
        }
        let rho = sampling::from_cholesky(alg, x)?.into_inner();
        match curve_min(ctx, &rho, &config.t_grid) {
            Ok(e) => {
                violations += e.violations;
                Ok(Some((e.k, (e.t, rho))))
            }
            Err(Error::NotPositive { .. }) | Err(Error::Domain { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let (t, rho) = d.extra;
    Ok(Run { k: d.value, t, rho, evaluations: d.evaluations, violations })
}

/// Infimum of the pointwise optimal `K` over the time grid and a density
/// search (trace state, supplied starts, random restarts), each refined by
/// coordinate descent on a Cholesky factor.
pub fn optimal_k_global(ctx: &GeContext, config: &SearchConfig) -> Result<GlobalK> {
    if config.t_grid.is_empty() || config.t_grid.iter().any(|&t| t <= 0.0) {
        return Err(Error::Inconsistent("time grid must be non-empty and positive".into()));
    }
    let alg = ctx.generator().algebra();
    let mut starts = vec![alg.unit()];
    for s in &config.starts {
        starts.push(s.to_matrix()?);
    }
    for r in 0..config.restarts {
        let mut rng = sampling::point_rng(config.seed, r as u64 + 1);
        starts.push(sampling::wishart(alg, &mut rng)?.into_inner());
    }
    let runs: Vec<Result<Run>> = starts.par_iter().map(|s| descend(ctx, s, config)).collect();
    let mut best: Option<Run> = None;
    let (mut evaluations, mut violations) = (0, 0);
    for run in runs {
        let run = match run {
            Ok(r) => r,
            Err(Error::NotPositive { .. }) | Err(Error::NoConvergence { .. }) => continue,
            Err(e) => return Err(e),
        };
        evaluations += run.evaluations;
        violations += run.violations;
        if best.as_ref().is_none_or(|b| run.k < b.k) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| Error::NoValidSample("every restart failed".into()))?;
    Ok(GlobalK {
        k_star: best.k.is_finite().then_some(best.k),
        t_star: best.t,
        rho: MatrixJson::from_matrix(&best.rho),
        small_t_limited: best.k.is_finite() && best.t == config.t_grid[0],
        evaluations,
        kernel_violations: violations,
        restarts: starts.len(),
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Subalgebra, TracialAlgebra};
    use crate::gradest::log_grid;
    use crate::linalg::{c, CVec};
    use crate::means::OperatorMean;
    use crate::qms::{Jump, LindbladGenerator};
    use crate::sampling::wishart;

    fn depolarizing(d: usize) -> LindbladGenerator {
        let e = Subalgebra::scalars(d).conditional_expectation();
        LindbladGenerator::from_expectation(TracialAlgebra::full(d), &e).unwrap()
    }

    fn projection() -> LindbladGenerator {
        let p = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0)]));
        LindbladGenerator::new(TracialAlgebra::full(2), vec![Jump::new(1.0, p).unwrap()]).unwrap()
    }

    #[test]
    fn zero_generator_is_unbounded() {
        let gen = LindbladGenerator::zero(TracialAlgebra::full(2));
        let ctx = GeContext::new(&gen, OperatorMean::Logarithmic);
        let rho = CMat::identity(2, 2);
        assert_eq!(optimal_k(&ctx, 0.5, &rho).unwrap(), PointwiseK::Unbounded);
        let g = optimal_k_global(&ctx, &SearchConfig { restarts: 1, max_evals: 20, ..Default::default() }).unwrap();
        assert!(g.k_star.is_none());
    }

    #[test]
    fn trace_state_projection_is_exactly_one() {
        let gen = projection();
        let ctx = GeContext::new(&gen, OperatorMean::Logarithmic);
        for t in [1e-3, 0.1, 2.0] {
            match optimal_k(&ctx, t, &CMat::identity(2, 2)).unwrap() {
                PointwiseK::Finite(k) => assert!((k - 1.0).abs() < 1e-8, "{k}"),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn pointwise_k_makes_the_form_singular() {
        let gen = depolarizing(2);
        let ctx = GeContext::new(&gen, OperatorMean::Logarithmic);
        let mut rng = sampling::point_rng(4, 1);
        let rho = wishart(gen.algebra(), &mut rng).unwrap().into_inner();
        let k = optimal_k(&ctx, 0.3, &rho).unwrap().value();
        let at = linalg::eig_hermitian(&ctx.form(0.3, &rho, k).unwrap()).unwrap().min_eigenvalue();
        assert!(at.abs() < 1e-9, "{at}");
        let above = linalg::eig_hermitian(&ctx.form(0.3, &rho, k + 0.01).unwrap()).unwrap().min_eigenvalue();
        assert!(above < -1e-6);
        assert!(k >= 0.5 - 1e-9);
    }

    #[test]
    fn invariant_under_unitary_conjugation() {
        let gen = depolarizing(3);
        let ctx = GeContext::new(&gen, OperatorMean::Logarithmic);
        let mut rng = sampling::point_rng(5, 1);
        for _ in 0..4 {
            let rho = wishart(gen.algebra(), &mut rng).unwrap().into_inner();
            let h = linalg::random_hermitian(&mut rng, 3);
            let u = linalg::eig_hermitian(&h).unwrap().eigenvectors;
            let moved = &u * &rho * u.adjoint();
            let k1 = optimal_k(&ctx, 0.7, &rho).unwrap().value();
            let k2 = optimal_k(&ctx, 0.7, &moved).unwrap().value();
            assert!((k1 - k2).abs() < 1e-8, "{k1} vs {k2}");
        }
    }

    #[test]
    fn zero_time_is_rejected() {
        let gen = depolarizing(2);
        let ctx = GeContext::new(&gen, OperatorMean::Logarithmic);
        assert!(optimal_k(&ctx, 0.0, &CMat::identity(2, 2)).is_err());
    }

    #[test]
    fn projection_global_constant_is_one() {
        let gen = projection();
        let ctx = GeContext::new(&gen, OperatorMean::Logarithmic);
        let cfg = SearchConfig { t_grid: log_grid(1e-3, 10.0, 12), restarts: 2, max_evals: 300, ..Default::default() };
        let g = optimal_k_global(&ctx, &cfg).unwrap();
        let k = g.k_star.unwrap();
        assert!((0.999..=1.0 + 1e-6).contains(&k), "{k}");
    }
}
