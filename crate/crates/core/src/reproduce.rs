//! Reproduction driver: runs each model-level check against the constant
//! attached to the model and collects one summary row per check.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entfun::{self, MlsiConfig};
use crate::error::{Error, Result};
use crate::gradest::{intertwine_check, optimal_k_global, Candidate, IntertwineConfig, SearchConfig};
use crate::gradest::{cge_check, default_t_grid, ge_check, tensor_ge_harness, GeConfig, GeContext, Mode};
use crate::linalg::{self, c, CMat, CVec};
use crate::means::{self, mean_axiom_audit, OperatorMean};
use crate::qms::{fixed_point_algebra, verify_qms, LindbladGenerator};
use crate::transport::{self, SegmentRule, TransportConfig, TransportContext};
use crate::zoo::{self, Model};
use crate::{calculus::TangentModule, sampling};

pub const CRITERIA: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub id: usize,
    pub title: String,
    /// Result the check is measured against.
    pub reference: String,
    pub pass: bool,
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceReport {
    pub seed: u64,
    pub rows: Vec<CriterionRow>,
    pub pass: bool,
}

struct Row {
    values: BTreeMap<String, f64>,
    notes: Vec<String>,
    pass: bool,
}

impl Row {
    fn new() -> Self {
        Self { values: BTreeMap::new(), notes: Vec::new(), pass: true }
    }

    fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), v);
    }

    /// Records `ok` under `what`; a failed check fails the row.
    fn check(&mut self, what: impl Into<String>, ok: bool) {
        let what = what.into();
        if !ok {
            self.notes.push(format!("FAILED: {what}"));
        }
        self.pass &= ok;
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn diag(vals: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&v| c(v))))
}

fn ge(model: &Model, mean: OperatorMean, k: f64, num_rho: usize, mode: Mode, seed: u64) -> Result<crate::gradest::GEReport> {
    let cfg = GeConfig { num_rho, seed, mode, ..Default::default() };
    ge_check(&model.generator, mean, k, &cfg)
}

fn depolarizing_ge(row: &mut Row, seed: u64) -> Result<()> {
    for d in [2, 3] {
        let m = zoo::depolarizing(d)?;
        let rep = ge(&m, OperatorMean::Logarithmic, 0.5, 50, Mode::Exact, seed)?;
        row.value(&format!("ge_min_M{d}"), rep.global_min);
        row.check(format!("GE(1/2) on M{d} over {} points", rep.points.len()), rep.pass && rep.points.len() == 2000);
        let cfg = GeConfig { num_rho: 20, seed, ..Default::default() };
        let cge = cge_check(&m.generator, OperatorMean::Logarithmic, 0.5, 2, &cfg)?;
        row.value(&format!("cge_min_M{d}"), cge.global_min);
        row.check(format!("CGE(1/2) on M{d} with ancilla M2"), cge.pass);
    }
    Ok(())
}

fn projection_optimal(row: &mut Row, seed: u64) -> Result<()> {
    let m = zoo::projection2()?;
    let ctx = GeContext::new(&m.generator, OperatorMean::Logarithmic);
    let g = optimal_k_global(&ctx, &SearchConfig { seed, ..Default::default() })?;
    let k = g.k_star.unwrap_or(f64::INFINITY);
    row.value("k_star", k);
    row.value("t_star", g.t_star);
    row.check("K* in [0.999, 1 + 1e-6]", (0.999..=1.0 + 1e-6).contains(&k));
    Ok(())
}

fn projections_and_hypercube(row: &mut Row, seed: u64) -> Result<()> {
    for m in [zoo::bitmask_projections4()?, zoo::hypercube(2)?] {
        for mean in [OperatorMean::Logarithmic, OperatorMean::Arithmetic] {
            let ok = ge(&m, mean, 1.0, 20, Mode::Exact, seed)?;
            row.value(&format!("{}_{}_K1", m.name, mean.name()), ok.global_min);
            row.check(format!("{} {} GE(1)", m.name, mean.name()), ok.pass);
            let bad = ge(&m, mean, 1.1, 20, Mode::Exact, seed)?;
            row.value(&format!("{}_{}_K1.1", m.name, mean.name()), bad.global_min);
            row.check(format!("{} {} GE(1.1) rejected with witness", m.name, mean.name()), !bad.pass && bad.witness.is_some());
        }
    }
    Ok(())
}

fn group_eigen_residual(m: &Model, psi: impl Fn(usize) -> f64) -> Result<f64> {
    let g = m.group.as_ref().ok_or_else(|| Error::Inconsistent(format!("{} has no group data", m.name)))?;
    let mut worst: f64 = 0.0;
    for k in 0..g.order() {
        let l = g.lambda(k);
        let r = m.generator.apply(&l)? - &l * c(psi(k));
        worst = worst.max(linalg::frobenius(&r) / (g.order() as f64).sqrt());
    }
    Ok(worst)
}

fn cyclic_groups(row: &mut Row, seed: u64) -> Result<()> {
    for n in [4, 6] {
        let m = zoo::cyclic(n)?;
        let res = group_eigen_residual(&m, |k| k.min(n - k) as f64)?;
        row.value(&format!("eigen_residual_Z{n}"), res);
        row.check(format!("Z{n} eigen-relation with word length"), res <= 1e-10);
        let (mode, num_rho) = if n == 6 { (Mode::Sampled, 6) } else { (Mode::Exact, 20) };
        let rep = ge(&m, OperatorMean::Logarithmic, 1.0, num_rho, mode, seed)?;
        row.value(&format!("ge_min_Z{n}"), rep.global_min);
        row.check(format!("Z{n} GE(1)"), rep.pass && (n != 6 || rep.points.len() >= 200));
    }
    let z4 = zoo::cyclic(4)?;
    let cfg = GeConfig { num_rho: 8, seed, t_grid: crate::gradest::log_grid(1e-3, 10.0, 20), ..Default::default() };
    let cge = cge_check(&z4.generator, OperatorMean::Logarithmic, 1.0, 2, &cfg)?;
    row.value("cge_min_Z4", cge.global_min);
    row.check("Z4 CGE(1) with ancilla M2", cge.pass);
    Ok(())
}

fn hamming(p: &[usize]) -> f64 {
    p.iter().enumerate().filter(|(j, &x)| *j != x).count() as f64
}

fn symmetric_group(row: &mut Row, seed: u64) -> Result<()> {
    let m = zoo::symmetric(3)?;
    let labels = m.group.as_ref().map(|g| g.labels.clone()).unwrap_or_default();
    let perms: Vec<Vec<usize>> =
        labels.iter().map(|l| l.chars().map(|ch| ch.to_digit(10).unwrap_or(1) as usize - 1).collect()).collect();
    let res = group_eigen_residual(&m, |k| hamming(&perms[k]))?;
    row.value("eigen_residual_S3", res);
    row.check("S3 eigen-relations with Hamming length", res <= 1e-10 && perms.len() == 6);
    let rep = ge(&m, OperatorMean::Logarithmic, 0.5, 6, Mode::Sampled, seed)?;
    row.value("ge_min_S3", rep.global_min);
    row.value("points", rep.points.len() as f64);
    row.check("S3 GE(1/2), sampled", rep.pass && rep.points.len() >= 200);
    Ok(())
}

/// Weight of the first point in the two-point model used for the mean
/// comparison. With equal weights both means give `K* = 1`.
pub const TWO_POINT_WEIGHT: f64 = 0.25;

/// `K*(t, ρ)` on the two-point space with `ℒ = I − E_π`, where `ρ = (x, y)`
/// with `πx + (1−π)y = 1`.
pub fn two_point_k(mean: OperatorMean, pi: f64, x: f64, t: f64) -> f64 {
    let y = (1.0 - pi * x) / (1.0 - pi);
    let s = (-t).exp();
    let (px, py) = (s * x + 1.0 - s, s * y + 1.0 - s);
    1.0 - (mean.kernel(x, y) / mean.kernel(px, py)).ln() / (2.0 * t)
}

/// Grid infimum of [`two_point_k`] over the density family and `t_grid`.
pub fn two_point_grid_oracle(mean: OperatorMean, pi: f64, t_grid: &[f64], points: usize) -> f64 {
    let hi = 1.0 / pi;
    let mut best = f64::INFINITY;
    for i in 0..=points {
        let x = hi * i as f64 / points as f64;
        for &t in t_grid {
            let k = two_point_k(mean, pi, x, t);
            if k.is_finite() {
                best = best.min(k);
            }
        }
    }
    best
}

fn mean_dependence(row: &mut Row, seed: u64) -> Result<()> {
    let m = zoo::two_point(TWO_POINT_WEIGHT)?;
    let grid = default_t_grid();
    let mut found = Vec::new();
    for mean in [OperatorMean::Logarithmic, OperatorMean::Arithmetic] {
        let ctx = GeContext::new(&m.generator, mean);
        let g = optimal_k_global(&ctx, &SearchConfig { seed, ..Default::default() })?;
        let k = g.k_star.unwrap_or(f64::INFINITY);
        let oracle = two_point_grid_oracle(mean, TWO_POINT_WEIGHT, &grid, 20_000);
        row.value(&format!("k_{}", mean.name()), k);
        row.value(&format!("oracle_{}", mean.name()), oracle);
        row.check(format!("{} K* matches grid oracle", mean.name()), (k - oracle).abs() <= 1e-3);
        found.push(k);
    }
    row.check("means give different K*", (found[0] - found[1]).abs() > 1e-3);
    Ok(())
}

fn tensor_stability(row: &mut Row, seed: u64) -> Result<()> {
    let dep = zoo::depolarizing(2)?.generator;
    let proj = zoo::projection2()?.generator;
    let cfg = GeConfig { num_rho: 20, seed, ..Default::default() };
    for (name, a) in [("dep2xdep2", &dep), ("proj2xdep2", &proj)] {
        let rep = tensor_ge_harness(a, &dep, OperatorMean::Logarithmic, 0.5, &cfg)?;
        row.value(name, rep.global_min);
        row.check(format!("{name} GE(1/2)"), rep.pass);
    }
    Ok(())
}

fn intertwining(row: &mut Row, seed: u64) -> Result<()> {
    let m = zoo::depolarizing(2)?;
    let cfg = IntertwineConfig { num_rho: 20, t_grid: crate::gradest::log_grid(1e-2, 5.0, 10), seed, ..Default::default() };
    let rep = intertwine_check(&m.generator, &Candidate::ScaledIdentity { rate: 1.0 }, 0.5, &cfg)?;
    row.value("intertwining_residual", rep.intertwining_residual);
    row.value("min_left_margin", rep.min_left_margin);
    row.value("min_right_margin", rep.min_right_margin);
    row.check("e^{-t} id intertwines and satisfies both bounds at K = 1/2", rep.pass);
    row.check("intertwining residual <= 1e-9", rep.intertwining_residual <= 1e-9);
    Ok(())
}

fn fisher_decay(row: &mut Row, seed: u64) -> Result<()> {
    let m = zoo::depolarizing(2)?;
    let alg = m.generator.algebra();
    let samples: Vec<CMat> = (0..30)
        .map(|i| Ok(sampling::mixed_sample(alg, seed, i, None)?.1.into_inner()))
        .collect::<Result<_>>()?;
    let rep = entfun::fisher_decay_check(&m.generator, 0.5, &samples, &linspace(0.0, 5.0, 26), 1e-8)?;
    row.value("min_margin", rep.min_margin);
    row.check("I(P_t rho) <= e^{-t} I(rho)", rep.pass);
    let mlsi = entfun::mlsi_estimate(&m.generator, &MlsiConfig { seed, ..Default::default() })?;
    row.value("mlsi_estimate", mlsi.estimate);
    row.check("MLSI estimate >= 1 - 1e-6", mlsi.estimate >= 1.0 - 1e-6);
    let spot = entfun::fisher_information(&m.generator, &diag(&[1.5, 0.5]))?.value;
    row.value("fisher_spot", spot);
    row.check("I(diag(3/2, 1/2)) = ln(3)/4", (spot - 0.25 * 3f64.ln()).abs() <= 1e-10);
    Ok(())
}

/// `∫₀¹ ρ^s ξ ρ^{1−s} ds` by Gauss–Legendre on `[0, 1]`.
pub fn log_mean_quadrature(rho: &CMat, xi: &CMat, nodes: usize) -> Result<CMat> {
    let sd = linalg::eig_hermitian(rho)?;
    let u = &sd.eigenvectors;
    let x = u.adjoint() * xi * u;
    let rule = gauss_quad::GaussLegendre::new(std::num::NonZeroUsize::new(nodes).expect("nonzero"));
    let lam = &sd.eigenvalues;
    let y = CMat::from_fn(x.nrows(), x.ncols(), |k, l| {
        let f = rule.integrate(0.0, 1.0, |s| lam[k].powf(s) * lam[l].powf(1.0 - s));
        x[(k, l)] * c(f)
    });
    Ok(u * y * u.adjoint())
}

fn means_quadrature(row: &mut Row, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let d = 2 + i % 3;
        let g = linalg::random_complex(&mut rng, d, d);
        let rho = &g * g.adjoint() + CMat::identity(d, d) * c(0.05);
        let xi = linalg::random_complex(&mut rng, d, d);
        let hat = means::RhoHat::new(OperatorMean::Logarithmic, &rho)?.apply_component(&xi);
        let quad = log_mean_quadrature(&rho, &xi, 64)?;
        worst = worst.max(linalg::rel_dist(&hat, &quad));
    }
    row.value("max_rel_error", worst);
    row.check("logarithmic multiplier vs 64-point quadrature", worst <= 1e-8);
    for mean in OperatorMean::ALL {
        let audit = mean_axiom_audit(mean, 50, seed)?;
        row.value(&format!("audit_{}", mean.name()), audit.monotonicity_margin.min(audit.transformer_margin));
        row.check(format!("{} mean axioms", mean.name()), audit.pass);
    }
    Ok(())
}

/// Length of the two-point geodesic between `x0` and `x1` (first-point
/// densities) for weight `pi`, by composite Simpson on `points` intervals.
pub fn two_point_distance_oracle(mean: OperatorMean, pi: f64, x0: f64, x1: f64, points: usize) -> f64 {
    let n = points + points % 2;
    let f = |x: f64| {
        let y = (1.0 - pi * x) / (1.0 - pi);
        (pi / ((1.0 - pi) * mean.kernel(x, y))).sqrt()
    };
    let h = (x1 - x0) / n as f64;
    let mut s = f(x0) + f(x1);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x0 + k as f64 * h);
    }
    (s * h / 3.0).abs()
}

/// Two-point density with first-point value `x` in the ambient representation.
pub fn two_point_density(model: &Model, x: f64) -> Result<CMat> {
    let alg = model.generator.algebra();
    let pi = alg.weights()[0];
    let y = (1.0 - pi * x) / (1.0 - pi);
    alg.embed_blocks(&[DMatrix::from_element(1, 1, c(x)), DMatrix::from_element(1, 1, c(y))])
}

fn transport_checks(row: &mut Row, seed: u64) -> Result<()> {
    let mean = OperatorMean::Logarithmic;
    let dep = zoo::depolarizing(2)?;
    let rho = sampling::wishart(dep.generator.algebra(), &mut sampling::point_rng(seed, 11))?.into_inner();
    let same = transport::w_upper_bound(&dep.generator, mean, &rho, &rho, &TransportConfig { seed, ..Default::default() })?;
    row.value("self_distance", same.length);
    row.check("W(rho, rho) <= 1e-8", same.length <= 1e-8);

    let tp = zoo::two_point(TWO_POINT_WEIGHT)?;
    let (x0, x1) = (0.4, 3.2);
    let a = two_point_density(&tp, x0)?;
    let b = two_point_density(&tp, x1)?;
    let cfg = TransportConfig { n: 8, iters: 50, seed, rule: SegmentRule::Gauss(8) };
    let p = transport::w_upper_bound(&tp.generator, mean, &a, &b, &cfg)?;
    let oracle = two_point_distance_oracle(mean, TWO_POINT_WEIGHT, x0, x1, 200_000);
    row.value("two_point_bound", p.length);
    row.value("two_point_oracle", oracle);
    row.check("two-point bound within 2% of the oracle", (p.length - oracle).abs() <= 0.02 * oracle);

    let a = diag(&[1.8, 0.2]);
    let b = CMat::from_row_slice(2, 2, &[c(0.6), linalg::C64::new(0.3, 0.2), linalg::C64::new(0.3, -0.2), c(1.4)]);
    let ctx = TransportContext::new(&dep.generator, mean)?;
    let mut path = transport::linear_path(&a, &b, 2);
    let mut prev = f64::INFINITY;
    let mut worst_increase = f64::NEG_INFINITY;
    for n in [2, 4, 8, 16] {
        let cfg = TransportConfig { n, iters: 40, seed, rule: SegmentRule::Gauss(8) };
        let res = transport::optimize_path(&ctx, path, &cfg)?;
        row.value(&format!("bound_N{n}"), res.length);
        if prev.is_finite() {
            worst_increase = worst_increase.max(res.length - prev);
        }
        prev = res.length;
        path = transport::refine_path(&res.density_matrices()?);
    }
    row.value("max_refinement_increase", worst_increase);
    row.check("refinement N -> 2N never increases the bound by more than 1e-6", worst_increase <= 1e-6);

    let proj = zoo::projection2()?;
    let err = transport::w_upper_bound(&proj.generator, mean, &diag(&[1.5, 0.5]), &diag(&[1.0, 1.0]), &TransportConfig::default());
    row.check("distinct fixed-point parts are not connectable", matches!(err, Err(Error::NotConnectable { .. })));
    Ok(())
}

fn structural(row: &mut Row, _seed: u64) -> Result<()> {
    let no_params = BTreeMap::new();
    for entry in zoo::catalog() {
        let m = zoo::build(entry.name, &no_params)?;
        structural_model(row, &m)?;
    }
    structural_model(row, &zoo::depolarizing(3)?)?;
    Ok(())
}

fn structural_model(row: &mut Row, m: &Model) -> Result<()> {
    let gen: &LindbladGenerator = &m.generator;
    let rep = verify_qms(gen, &[0.1, 1.0])?;
    row.check(format!("{} is a symmetric QMS", m.name), rep.pass);
    let module = TangentModule::new(gen);
    let dd = module.stacked().adjoint() * module.stacked();
    let res = linalg::frobenius(&(dd - gen.superop()));
    row.value(&format!("{}_dd_residual", m.name), res);
    row.check(format!("{} L = D^dag D", m.name), res <= 1e-10);
    let min = gen.spectrum()?.min_eigenvalue();
    row.check(format!("{} spectrum >= -1e-9", m.name), min >= -1e-9);
    if m.name.starts_with("depolarizing") || m.name == "projection2" {
        let gap = fixed_point_algebra(gen)?.spectral_gap.unwrap_or(f64::NAN);
        row.value(&format!("{}_gap", m.name), gap);
        row.check(format!("{} spectral gap 1", m.name), (gap - 1.0).abs() <= 1e-10);
    }
    Ok(())
}

type Check = fn(&mut Row, u64) -> Result<()>;

fn table() -> [(&'static str, &'static str, Check); CRITERIA] {
    [
        ("depolarizing GE/CGE at K = 1/2", "conditional expectation example: CGE(1/2,inf)", depolarizing_ge),
        ("single projection optimal K", "commuting projections theorem: the constant 1 is optimal", projection_optimal),
        ("commuting projections and hypercube at K = 1", "commuting projections theorem: CGE(1,inf)", projections_and_hypercube),
        ("cyclic groups Z4, Z6", "cyclic group example: CGE(1,inf)", cyclic_groups),
        ("symmetric group S3", "symmetric group example: CGE(1/2,inf)", symmetric_group),
        ("mean dependence on the two-point space", "optimal constant depends on the mean", mean_dependence),
        ("tensor stability", "CGE is stable under tensor products", tensor_stability),
        ("intertwining for depolarizing", "intertwining criterion implies GE", intertwining),
        ("Fisher information decay", "GE implies exponential decay of Fisher information", fisher_decay),
        ("logarithmic mean vs quadrature", "integral form of the logarithmic mean", means_quadrature),
        ("transport bounds", "transport metric from the continuity equation", transport_checks),
        ("structural invariants", "L = D^dag D, symmetric QMS, spectral gap 1", structural),
    ]
}

/// Runs one check (1-based id); errors are reported as a failed row.
pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionRow> {
    if id == 0 || id > CRITERIA {
        return Err(Error::IndexOutOfRange { index: id, len: CRITERIA });
    }
    let (title, reference, check) = table()[id - 1];
    let start = Instant::now();
    let mut row = Row::new();
    if let Err(e) = check(&mut row, seed) {
        row.check(format!("error: {e}"), false);
    }
    Ok(CriterionRow {
        id,
        title: title.into(),
        reference: reference.into(),
        pass: row.pass,
        values: row.values,
        notes: row.notes,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Runs the selected checks (all when `only` is empty).
pub fn reproduce(seed: u64, only: &[usize]) -> Result<ReproduceReport> {
    let ids: Vec<usize> = if only.is_empty() { (1..=CRITERIA).collect() } else { only.to_vec() };
    let rows = ids.iter().map(|&id| run_criterion(id, seed)).collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(ReproduceReport { seed, rows, pass })
}

/// Plain-text summary table.
pub fn summary_table(report: &ReproduceReport) -> String {
    let mut out = format!("{:>3}  {:<4}  {:>9}  {:<46}  {}\n", "id", "", "time(ms)", "check", "reference");
    for r in &report.rows {
        let status = if r.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!("{:>3}  {status}  {:>9}  {:<46}  {}\n", r.id, r.runtime_ms, r.title, r.reference));
        for n in &r.notes {
            out.push_str(&format!("           {n}\n"));
        }
    }
    out
}
