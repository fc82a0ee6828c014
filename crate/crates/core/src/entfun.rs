//! Entropy, relative entropy, entropy relative to the fixed-point algebra,
//! Fisher information and the modified log-Sobolev constant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{DensityOperator, Subalgebra};
use crate::calculus::TangentModule;
use crate::descent::{coordinate_descent, DescentOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, c, json::MatrixJson, CMat};
use crate::qms::{fixed_point_algebra, LindbladGenerator};
use crate::sampling;

/// Eigenvalues at or below this count as outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;
pub const ENTROPY_FIX_TOL: f64 = 1e-9;
pub const FISHER_CROSS_TOL: f64 = 1e-8;
pub const SMOOTHING_LEVELS: [f64; 3] = [1e-4, 1e-5, 1e-6];
/// Densities with `Ent_fix` below this are skipped by the MLSI search.
pub const MIN_ENTROPY: f64 = 1e-10;

fn xlogx(x: f64) -> f64 {
    if x <= SUPPORT_TOL {
        0.0
    } else {
        x * x.ln()
    }
}

/// `τ(ρ log ρ)` with `0 log 0 = 0`.
pub fn entropy(rho: &CMat) -> Result<f64> {
    let sd = linalg::eig_hermitian(rho)?;
    Ok(sd.eigenvalues.iter().map(|&l| xlogx(l)).sum::<f64>() / rho.nrows() as f64)
}

/// `τ(ρ log ρ) − τ(ρ log σ)`, or `+∞` when `supp ρ ⊄ supp σ`.
pub fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<f64> {
    let d = rho.nrows() as f64;
    let sd = linalg::eig_hermitian(sigma)?;
    let mut log_sigma = Vec::with_capacity(sd.dim());
    for (k, &l) in sd.eigenvalues.iter().enumerate() {
        if l <= SUPPORT_TOL {
            let v = sd.eigenvectors.column(k);
            let weight = (v.adjoint() * rho * v)[(0, 0)].re;
            if weight > SUPPORT_TOL {
                return Ok(f64::INFINITY);
            }
            log_sigma.push(0.0);
        } else {
            log_sigma.push(l.ln());
        }
    }
    let cross = linalg::trace(&(rho * sd.with_values(&log_sigma))).re / d;
    Ok(entropy(rho)? - cross)
}

/// The conditional expectation onto the fixed points of `gen`.
pub fn fixed_point_expectation(gen: &LindbladGenerator) -> Result<Subalgebra> {
    Ok(fixed_point_algebra(gen)?.subalgebra)
}

/// `Ent(ρ ‖ E ρ)` with `E` the expectation onto the fixed points, checked
/// against `Ent(ρ) − Ent(Eρ)`.
pub fn entropy_fix(gen: &LindbladGenerator, rho: &CMat) -> Result<f64> {
    let e = fixed_point_expectation(gen)?;
    entropy_fix_with(&e, rho)
}

fn entropy_fix_with(e: &Subalgebra, rho: &CMat) -> Result<f64> {
    let e_rho = linalg::hermitian_part(&e.apply(rho));
    let relative = relative_entropy(rho, &e_rho)?;
    let difference = entropy(rho)? - entropy(&e_rho)?;
    if !relative.is_finite() || (relative - difference).abs() > ENTROPY_FIX_TOL * (1.0 + relative.abs()) {
        return Err(Error::Inconsistent(format!(
            "Ent(ρ‖Eρ) = {relative} but Ent(ρ) − Ent(Eρ) = {difference}"
        )));
    }
    Ok(relative)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fisher {
    pub value: f64,
    /// Obtained by smoothing and extrapolation.
    pub smoothed: bool,
    /// Smoothed values grow without settling; `value` is then the last one.
    pub diverging: bool,
}

fn fisher_full_support(gen: &LindbladGenerator, module: &TangentModule, rho: &CMat) -> Result<f64> {
    let d = rho.nrows() as f64;
    let log_rho = linalg::matrix_function(rho, |l| (l > 0.0).then(|| l.ln()))?;
    let l_rho = gen.apply(rho)?;
    let direct = linalg::trace(&(l_rho.adjoint() * &log_rho)).re / d;
    let via_module = module.derivative(rho)?.inner(&module.derivative(&log_rho)?).re;
    if (direct - via_module).abs() > FISHER_CROSS_TOL * (1.0 + direct.abs()) {
        return Err(Error::Inconsistent(format!("τ((ℒρ) log ρ) = {direct} but Σ⟨∂ρ, ∂ log ρ⟩ = {via_module}")));
    }
    Ok(direct)
}

/// `I(ρ) = τ((ℒρ) log ρ)`. Degenerate densities are smoothed towards the
/// trace state at three levels and extrapolated linearly in `ε`.
pub fn fisher_information(gen: &LindbladGenerator, rho: &CMat) -> Result<Fisher> {
    let module = TangentModule::new(gen);
    fisher_with(gen, &module, rho)
}

fn fisher_with(gen: &LindbladGenerator, module: &TangentModule, rho: &CMat) -> Result<Fisher> {
    let min = linalg::eig_hermitian(rho)?.min_eigenvalue();
    if min > SUPPORT_TOL {
        return Ok(Fisher { value: fisher_full_support(gen, module, rho)?, smoothed: false, diverging: false });
    }
    let unit = gen.algebra().unit();
    let mut values = [0.0; 3];
    for (v, &eps) in values.iter_mut().zip(&SMOOTHING_LEVELS) {
        let smoothed = rho * c(1.0 - eps) + &unit * c(eps);
        *v = fisher_full_support(gen, module, &smoothed)?;
    }
    let (d1, d2) = (values[1] - values[0], values[2] - values[1]);
    let diverging = d2.abs() > 1e-8 * (1.0 + values[2].abs()) && d2.abs() > 0.5 * d1.abs();
    let value = if diverging { values[2] } else { (10.0 * values[2] - values[1]) / 9.0 };
    Ok(Fisher { value, smoothed: true, diverging })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub rho_id: usize,
    pub t: f64,
    pub fisher: f64,
    /// `e^{−2Kt} I(ρ)`.
    pub bound: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    #[serde(rename = "K")]
    pub k: f64,
    pub points: Vec<DecayPoint>,
    pub min_margin: f64,
    /// Smallest per-density decay rate from a log-linear fit of `I(P_tρ)`.
    pub fitted_exponent: Option<f64>,
    pub pass: bool,
    pub tol: f64,
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Margins `e^{−2Kt} I(ρ) − I(P_tρ)` on every sample and time.
pub fn fisher_decay_check(
    gen: &LindbladGenerator,
    k: f64,
    samples: &[CMat],
    t_grid: &[f64],
    tol: f64,
) -> Result<FunctionalReport> {
    let module = TangentModule::new(gen);
    let per_sample: Vec<(Vec<DecayPoint>, Option<f64>)> = samples
        .par_iter()
        .enumerate()
        .map(|(i, rho)| {
            let i0 = fisher_with(gen, &module, rho)?.value;
            let mut points = Vec::with_capacity(t_grid.len());
            let (mut ts, mut logs) = (Vec::new(), Vec::new());
            for &t in t_grid {
                let moved = gen.semigroup_apply(t, rho)?;
                let fisher = fisher_with(gen, &module, &moved)?.value;
                let bound = (-2.0 * k * t).exp() * i0;
                if fisher > 1e-12 {
                    ts.push(t);
                    logs.push(fisher.ln());
                }
                points.push(DecayPoint { rho_id: i, t, fisher, bound, margin: bound - fisher });
            }
            Ok((points, slope(&ts, &logs).map(|s| -s)))
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    let mut fitted: Option<f64> = None;
    for (p, s) in per_sample {
        points.extend(p);
        if let Some(s) = s {
            fitted = Some(fitted.map_or(s, |f| f.min(s)));
        }
    }
    let min_margin = points.iter().fold(f64::INFINITY, |m, p| m.min(p.margin));
    Ok(FunctionalReport { k, points, min_margin, fitted_exponent: fitted, pass: min_margin >= -tol, tol })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub entropy: f64,
    pub entropy_fix: f64,
    pub fisher: f64,
}

/// `(t, Ent, Ent_fix, I)` along `P_tρ`.
pub fn trajectory(gen: &LindbladGenerator, rho: &CMat, t_grid: &[f64]) -> Result<Vec<TrajectoryRow>> {
    let module = TangentModule::new(gen);
    let e = fixed_point_expectation(gen)?;
    t_grid
        .iter()
        .map(|&t| {
            let moved = gen.semigroup_apply(t, rho)?;
            Ok(TrajectoryRow {
                t,
                entropy: entropy(&moved)?,
                entropy_fix: entropy_fix_with(&e, &moved)?,
                fisher: fisher_with(gen, &module, &moved)?.value,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlsiConfig {
    pub num_rho: usize,
    pub seed: u64,
    /// Descent evaluations per start.
    pub max_evals: usize,
    /// How many of the best samples are refined by descent.
    pub refine: usize,
}

impl Default for MlsiConfig {
    fn default() -> Self {
        Self { num_rho: 50, seed: 0, max_evals: 2000, refine: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlsiEstimate {
    /// Smallest `I(ρ)/Ent_fix(ρ)` found: an upper bound on the constant.
    pub estimate: f64,
    pub rho: MatrixJson,
    pub valid_samples: usize,
    pub evaluations: usize,
    pub seed: u64,
}

fn ratio(gen: &LindbladGenerator, module: &TangentModule, e: &Subalgebra, rho: &CMat) -> Result<Option<f64>> {
    let ent = entropy_fix_with(e, rho)?;
    if ent <= MIN_ENTROPY {
        return Ok(None);
    }
    let fisher = fisher_with(gen, module, rho)?;
    if fisher.smoothed {
        return Ok(None);
    }
    Ok(Some(fisher.value / ent))
}

/// Infimum of `I(ρ)/Ent_fix(ρ)` over sampled full-support densities, the best
/// of which are refined by coordinate descent on a Cholesky factor.
pub fn mlsi_estimate(gen: &LindbladGenerator, config: &MlsiConfig) -> Result<MlsiEstimate> {
    let alg = gen.algebra();
    let module = TangentModule::new(gen);
    let e = fixed_point_expectation(gen)?;
    let scored: Vec<Option<(f64, CMat)>> = (1..=config.num_rho as u64)
        .into_par_iter()
        .map(|i| {
            let rho = sampling::mixed_sample(alg, config.seed, i, None)?.1.into_inner();
            Ok(ratio(gen, &module, &e, &rho)?.map(|r| (r, rho)))
        })
        .collect::<Result<_>>()?;
    let mut valid: Vec<(f64, CMat)> = scored.into_iter().flatten().collect();
    if valid.is_empty() {
        return Err(Error::NoValidSample("every sampled density has vanishing Ent_fix".into()));
    }
    let valid_samples = valid.len();
    valid.sort_by(|a, b| a.0.total_cmp(&b.0));
    valid.truncate(config.refine.max(1));
    let refined: Vec<Result<(f64, CMat, usize)>> = valid
        .par_iter()
        .map(|(r0, rho0)| {
            let start = DensityOperator::new(alg, rho0.clone())?;
            let Some(x0) = sampling::to_cholesky(alg, &start) else {
                return Ok((*r0, rho0.clone(), 0));
            };
            let scale = x0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let opts = DescentOptions { initial_step: 0.1 * scale, min_step: 1e-8 * scale, max_evals: config.max_evals };
            let d = coordinate_descent(x0, opts, |x| {
                let rho = match sampling::from_cholesky(alg, x) {
                    Ok(r) => r.into_inner(),
                    Err(_) => return Ok(None),
                };
                Ok(ratio(gen, &module, &e, &rho)?.map(|r| (r, rho)))
            })?;
            Ok((d.value, d.extra, d.evaluations))
        })
        .collect();
    let mut best: Option<(f64, CMat)> = None;
    let mut evaluations = config.num_rho;
    for r in refined {
        let (v, rho, n) = r?;
        evaluations += n;
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, rho));
        }
    }
    let (estimate, rho) = best.expect("at least one refined start");
    Ok(MlsiEstimate { estimate, rho: MatrixJson::from_matrix(&rho), valid_samples, evaluations, seed: config.seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Subalgebra, TracialAlgebra};
    use crate::linalg::CVec;
    use crate::qms::Jump;
    use proptest::prelude::*;

    fn diag(vals: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&v| c(v))))
    }

    fn depolarizing(d: usize) -> LindbladGenerator {
        let e = Subalgebra::scalars(d).conditional_expectation();
        LindbladGenerator::from_expectation(TracialAlgebra::full(d), &e).unwrap()
    }

    fn projection() -> LindbladGenerator {
        LindbladGenerator::new(TracialAlgebra::full(2), vec![Jump::new(1.0, diag(&[1.0, 0.0])).unwrap()]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!(entropy(&CMat::identity(3, 3)).unwrap().abs() < 1e-15);
        assert!((entropy(&diag(&[2.0, 0.0])).unwrap() - 2f64.ln()).abs() < 1e-14);
        let expected = 0.75 * 1.5f64.ln() - 0.25 * 2f64.ln();
        assert!((entropy(&diag(&[1.5, 0.5])).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.130812).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_support_flag() {
        assert_eq!(relative_entropy(&CMat::identity(2, 2), &diag(&[2.0, 0.0])).unwrap(), f64::INFINITY);
        assert!(relative_entropy(&diag(&[2.0, 0.0]), &CMat::identity(2, 2)).unwrap().is_finite());
    }

    #[test]
    fn entropy_fix_examples() {
        let gen = depolarizing(2);
        let rho = diag(&[1.5, 0.5]);
        assert!((entropy_fix(&gen, &rho).unwrap() - entropy(&rho).unwrap()).abs() < 1e-12);
        let proj = projection();
        assert!(entropy_fix(&proj, &rho).unwrap().abs() < 1e-12);
        let mut rng = sampling::point_rng(3, 3);
        for _ in 0..5 {
            let r = sampling::wishart(proj.algebra(), &mut rng).unwrap().into_inner();
            assert!(entropy_fix(&proj, &r).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn fisher_examples() {
        let gen = depolarizing(2);
        let f = fisher_information(&gen, &diag(&[1.5, 0.5])).unwrap();
        assert!((f.value - 0.25 * 3f64.ln()).abs() < 1e-10, "{}", f.value);
        assert!(!f.smoothed);
        assert!(fisher_information(&projection(), &diag(&[1.5, 0.5])).unwrap().value.abs() < 1e-14);
    }

    #[test]
    fn fisher_of_degenerate_density_diverges() {
        // ℒ pushes mass into the kernel of a pure state, so I = +∞.
        let f = fisher_information(&depolarizing(2), &diag(&[2.0, 0.0])).unwrap();
        assert!(f.smoothed && f.diverging);
        // a fixed pure state stays finite
        let g = fisher_information(&projection(), &diag(&[2.0, 0.0])).unwrap();
        assert!(g.smoothed && !g.diverging && g.value.abs() < 1e-8);
    }

    #[test]
    fn fisher_decay_depolarizing() {
        let gen = depolarizing(2);
        let mut rng = sampling::point_rng(4, 4);
        let samples: Vec<CMat> = (0..4).map(|_| sampling::wishart(gen.algebra(), &mut rng).unwrap().into_inner()).collect();
        let grid: Vec<f64> = (0..11).map(|k| 0.5 * k as f64).collect();
        let rep = fisher_decay_check(&gen, 0.5, &samples, &grid, 1e-8).unwrap();
        assert!(rep.pass, "{}", rep.min_margin);
        assert!(rep.fitted_exponent.unwrap() >= 1.0);
        let fixed = fisher_decay_check(&gen, 0.5, &[CMat::identity(2, 2)], &grid, 1e-8).unwrap();
        assert!(fixed.points.iter().all(|p| p.fisher.abs() < 1e-14 && p.bound.abs() < 1e-14));
    }

    #[test]
    fn entropy_decreases_along_the_flow() {
        let gen = projection();
        let mut rng = sampling::point_rng(6, 1);
        let rho = sampling::wishart(gen.algebra(), &mut rng).unwrap().into_inner();
        let grid: Vec<f64> = (0..20).map(|k| 0.25 * k as f64).collect();
        let rows = trajectory(&gen, &rho, &grid).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].entropy <= w[0].entropy + 1e-12);
            assert!(w[1].fisher >= -1e-12);
        }
    }

    #[test]
    fn mlsi_depolarizing() {
        let gen = depolarizing(2);
        let cfg = MlsiConfig { num_rho: 12, seed: 2, max_evals: 400, refine: 2 };
        let est = mlsi_estimate(&gen, &cfg).unwrap();
        assert!(est.estimate >= 1.0 - 1e-6, "{}", est.estimate);
        let spot = fisher_information(&gen, &diag(&[1.5, 0.5])).unwrap().value / entropy(&diag(&[1.5, 0.5])).unwrap();
        assert!((spot - 2.0996).abs() < 1e-3);
    }

    #[test]
    fn mlsi_needs_non_fixed_samples() {
        let gen = LindbladGenerator::zero(TracialAlgebra::full(2));
        assert!(matches!(mlsi_estimate(&gen, &MlsiConfig { num_rho: 3, ..Default::default() }), Err(Error::NoValidSample(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn relative_entropy_is_nonnegative(seed in any::<u64>()) {
            let alg = TracialAlgebra::full(3);
            let mut rng = sampling::point_rng(seed, 0);
            let a = sampling::wishart(&alg, &mut rng).unwrap().into_inner();
            let b = sampling::wishart(&alg, &mut rng).unwrap().into_inner();
            prop_assert!(relative_entropy(&a, &b).unwrap() >= -1e-10);
            prop_assert!(relative_entropy(&a, &a).unwrap().abs() < 1e-8);
        }

        #[test]
        fn fisher_is_nonnegative(seed in any::<u64>()) {
            let gen = depolarizing(3);
            let mut rng = sampling::point_rng(seed, 1);
            let rho = sampling::wishart(gen.algebra(), &mut rng).unwrap().into_inner();
            prop_assert!(fisher_information(&gen, &rho).unwrap().value >= -1e-12);
        }
    }
}
