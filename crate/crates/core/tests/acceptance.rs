//! Acceptance suite: one PASS/FAIL line per criterion. Reference values come
//! from closed forms and quadratures written here, independent of the
//! library's own helpers.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use ncgrad::calculus::TangentModule;
use ncgrad::entfun::{self, MlsiConfig};
use ncgrad::gradest::{
    cge_check, default_t_grid, ge_check, intertwine_check, log_grid, optimal_k_global, tensor_ge_harness, Candidate,
    GeConfig, GeContext, IntertwineConfig, Mode, SearchConfig,
};
use ncgrad::linalg::{self, c, CMat, CVec, C64};
use ncgrad::means::{mean_axiom_audit, OperatorMean, RhoHat};
use ncgrad::qms::{fixed_point_algebra, verify_qms, LindbladGenerator};
use ncgrad::transport::{self, SegmentRule, TransportConfig, TransportContext};
use ncgrad::zoo::{self, Model};
use ncgrad::{sampling, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;
const GE_TOL: f64 = 1e-8;
const EIGEN_TOL: f64 = 1e-10;
const K_ORACLE_TOL: f64 = 1e-3;
const MEAN_GAP: f64 = 1e-3;
const INTERTWINE_RESIDUAL: f64 = 1e-9;
const SPOT_TOL: f64 = 1e-10;
const MLSI_TOL: f64 = 1e-6;
const QUAD_TOL: f64 = 1e-8;
const AUDIT_MARGIN: f64 = -1e-9;
const SELF_DISTANCE: f64 = 1e-8;
const TRANSPORT_REL: f64 = 0.02;
const REFINE_SLACK: f64 = 1e-6;
const DD_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-9;

type Outcome = Result<Vec<String>, String>;

fn require(failures: &mut Vec<String>, what: impl Into<String>, ok: bool) {
    if !ok {
        failures.push(what.into());
    }
}

fn finish(failures: Vec<String>, info: Vec<String>) -> Outcome {
    if failures.is_empty() {
        Ok(info)
    } else {
        Err(failures.join("; "))
    }
}

fn e<T>(r: ncgrad::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn diag(vals: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&v| c(v))))
}

fn ge_cfg(num_rho: usize, mode: Mode) -> GeConfig {
    GeConfig { num_rho, seed: SEED, mode, ..Default::default() }
}

fn c1_depolarizing() -> Outcome {
    let (mut f, mut info) = (Vec::new(), Vec::new());
    for d in [2, 3] {
        let g = e(zoo::depolarizing(d))?.generator;
        let rep = e(ge_check(&g, OperatorMean::Logarithmic, 0.5, &ge_cfg(50, Mode::Exact)))?;
        require(&mut f, format!("GE on M{d}: min {:.3e}", rep.global_min), rep.global_min >= -GE_TOL);
        require(&mut f, format!("M{d}: {} points", rep.points.len()), rep.points.len() == 40 * 50);
        let cge = e(cge_check(&g, OperatorMean::Logarithmic, 0.5, 2, &ge_cfg(20, Mode::Exact)))?;
        require(&mut f, format!("CGE on M{d}: min {:.3e}", cge.global_min), cge.global_min >= -GE_TOL);
        info.push(format!("M{d} ge_min={:.2e} cge_min={:.2e}", rep.global_min, cge.global_min));
    }
    finish(f, info)
}

fn c2_projection() -> Outcome {
    let g = e(zoo::projection2())?.generator;
    let ctx = GeContext::new(&g, OperatorMean::Logarithmic);
    let r = e(optimal_k_global(&ctx, &SearchConfig { seed: SEED, ..Default::default() }))?;
    let k = r.k_star.unwrap_or(f64::INFINITY);
    let mut f = Vec::new();
    require(&mut f, format!("K* = {k}"), (0.999..=1.0 + 1e-6).contains(&k));
    finish(f, vec![format!("K*={k:.9}")])
}

fn c3_projections_hypercube() -> Outcome {
    let (mut f, mut info) = (Vec::new(), Vec::new());
    for m in [e(zoo::bitmask_projections4())?, e(zoo::hypercube(2))?] {
        for mean in [OperatorMean::Logarithmic, OperatorMean::Arithmetic] {
            let ok = e(ge_check(&m.generator, mean, 1.0, &ge_cfg(20, Mode::Exact)))?;
            require(&mut f, format!("{} {} K=1 min {:.3e}", m.name, mean.name(), ok.global_min), ok.global_min >= -GE_TOL);
            let bad = e(ge_check(&m.generator, mean, 1.1, &ge_cfg(20, Mode::Exact)))?;
            let witnessed = bad.witness.as_ref().is_some_and(|w| w.min_eig < -GE_TOL);
            require(&mut f, format!("{} {} K=1.1 not rejected", m.name, mean.name()), !bad.pass && witnessed);
            // the witness must reproduce: evaluate the form at the reported direction
            if let Some(w) = &bad.witness {
                let ctx = GeContext::new(&m.generator, mean);
                let a = e(w.a.to_matrix())?;
                let rho = e(w.rho.to_matrix())?;
                let v = e(ncgrad::gradest::ge_form_value(&ctx, w.t, &rho, 1.1, &a))?;
                let norm = m.generator.to_coords(&a).norm_squared();
                require(&mut f, format!("{} witness value {v:.3e}", m.name), v / norm < -GE_TOL);
            }
            info.push(format!("{}/{}: {:.1e} vs {:.3}", m.name, mean.name(), ok.global_min, bad.global_min));
        }
    }
    finish(f, info)
}

fn eigen_residual(m: &Model, psi: &[f64]) -> Result<f64, String> {
    let g = m.group.as_ref().ok_or("missing group data")?;
    let mut worst: f64 = 0.0;
    for (k, &p) in psi.iter().enumerate() {
        let l = g.lambda(k);
        worst = worst.max(linalg::frobenius(&(e(m.generator.apply(&l))? - &l * c(p))));
    }
    Ok(worst)
}

fn c4_cyclic() -> Outcome {
    let (mut f, mut info) = (Vec::new(), Vec::new());
    for n in [4usize, 6] {
        let m = e(zoo::cyclic(n))?;
        let labels = &m.group.as_ref().ok_or("missing group data")?.labels;
        let psi: Vec<f64> = labels
            .iter()
            .map(|l| {
                let k: usize = l.parse().unwrap();
                k.min(n - k) as f64
            })
            .collect();
        let res = eigen_residual(&m, &psi)?;
        require(&mut f, format!("Z{n} eigen residual {res:.3e}"), res <= EIGEN_TOL);
        let cfg = if n == 6 { ge_cfg(6, Mode::Sampled) } else { ge_cfg(20, Mode::Exact) };
        let rep = e(ge_check(&m.generator, OperatorMean::Logarithmic, 1.0, &cfg))?;
        require(&mut f, format!("Z{n} GE min {:.3e}", rep.global_min), rep.global_min >= -GE_TOL);
        if n == 6 {
            require(&mut f, format!("Z6 points {}", rep.points.len()), rep.points.len() >= 200);
        }
        info.push(format!("Z{n} residual={res:.1e} ge_min={:.1e}", rep.global_min));
    }
    let z4 = e(zoo::cyclic(4))?.generator;
    let cfg = GeConfig { t_grid: log_grid(1e-3, 10.0, 20), ..ge_cfg(8, Mode::Exact) };
    let cge = e(cge_check(&z4, OperatorMean::Logarithmic, 1.0, 2, &cfg))?;
    require(&mut f, format!("Z4 CGE min {:.3e}", cge.global_min), cge.global_min >= -GE_TOL);
    finish(f, info)
}

fn c5_symmetric() -> Outcome {
    let mut f = Vec::new();
    let m = e(zoo::symmetric(3))?;
    let labels = &m.group.as_ref().ok_or("missing group data")?.labels;
    let psi: Vec<f64> = labels
        .iter()
        .map(|l| l.chars().enumerate().filter(|(i, ch)| ch.to_digit(10) != Some(*i as u32 + 1)).count() as f64)
        .collect();
    require(&mut f, "six elements", psi.len() == 6);
    let res = eigen_residual(&m, &psi)?;
    require(&mut f, format!("S3 eigen residual {res:.3e}"), res <= EIGEN_TOL);
    let rep = e(ge_check(&m.generator, OperatorMean::Logarithmic, 0.5, &ge_cfg(6, Mode::Sampled)))?;
    require(&mut f, format!("S3 GE min {:.3e}", rep.global_min), rep.global_min >= -GE_TOL);
    require(&mut f, format!("S3 points {}", rep.points.len()), rep.points.len() >= 200);
    finish(f, vec![format!("psi={psi:?} ge_min={:.1e} points={}", rep.global_min, rep.points.len())])
}

fn log_mean(a: f64, b: f64) -> f64 {
    if (a - b).abs() < 1e-12 * (a + b) {
        0.5 * (a + b)
    } else if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        (a - b) / (a.ln() - b.ln())
    }
}

/// Closed form of the optimal constant on the two-point space.
fn two_point_grid_inf(m: fn(f64, f64) -> f64, pi: f64, t_grid: &[f64]) -> f64 {
    let n = 40_000;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let x = i as f64 / n as f64 / pi;
        let y = (1.0 - pi * x) / (1.0 - pi);
        for &t in t_grid {
            let s = (-t).exp();
            let k = 1.0 - (m(x, y) / m(s * x + 1.0 - s, s * y + 1.0 - s)).ln() / (2.0 * t);
            if k.is_finite() {
                best = best.min(k);
            }
        }
    }
    best
}

fn c6_mean_dependence() -> Outcome {
    let (mut f, mut info) = (Vec::new(), Vec::new());
    let pi = 0.25;
    let model = e(zoo::two_point(pi))?;
    let grid = default_t_grid();
    let mut ks = Vec::new();
    for (mean, m) in [(OperatorMean::Logarithmic, log_mean as fn(f64, f64) -> f64), (OperatorMean::Arithmetic, |a, b| 0.5 * (a + b))] {
        let ctx = GeContext::new(&model.generator, mean);
        let r = e(optimal_k_global(&ctx, &SearchConfig { seed: SEED, ..Default::default() }))?;
        let k = r.k_star.unwrap_or(f64::INFINITY);
        let oracle = two_point_grid_inf(m, pi, &grid);
        require(&mut f, format!("{}: K*={k} oracle={oracle}", mean.name()), (k - oracle).abs() <= K_ORACLE_TOL);
        info.push(format!("{} K*={k:.6} oracle={oracle:.6}", mean.name()));
        ks.push(k);
    }
    require(&mut f, format!("means agree: {ks:?}"), (ks[0] - ks[1]).abs() > MEAN_GAP);
    finish(f, info)
}

fn c7_tensor() -> Outcome {
    let mut f = Vec::new();
    let dep = e(zoo::depolarizing(2))?.generator;
    let proj = e(zoo::projection2())?.generator;
    let mut info = Vec::new();
    for (name, a) in [("dep2 x dep2", &dep), ("proj2 x dep2", &proj)] {
        let rep = e(tensor_ge_harness(a, &dep, OperatorMean::Logarithmic, 0.5, &ge_cfg(20, Mode::Exact)))?;
        require(&mut f, format!("{name} min {:.3e}", rep.global_min), rep.global_min >= -GE_TOL);
        info.push(format!("{name} min={:.1e}", rep.global_min));
    }
    finish(f, info)
}

fn c8_intertwining() -> Outcome {
    let mut f = Vec::new();
    let g = e(zoo::depolarizing(2))?.generator;
    let cfg = IntertwineConfig { num_rho: 20, t_grid: log_grid(1e-2, 5.0, 10), seed: SEED, ..Default::default() };
    let r = e(intertwine_check(&g, &Candidate::ScaledIdentity { rate: 1.0 }, 0.5, &cfg))?;
    require(&mut f, format!("residual {:.3e}", r.intertwining_residual), r.intertwining_residual <= INTERTWINE_RESIDUAL);
    require(&mut f, format!("left margin {:.3e}", r.min_left_margin), r.min_left_margin >= -GE_TOL);
    require(&mut f, format!("right margin {:.3e}", r.min_right_margin), r.min_right_margin >= -GE_TOL);
    require(&mut f, "report pass flag", r.pass);
    // condition (i) independently: ∂ P_t x = e^{−t} ∂ x on a random x
    let module = TangentModule::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let x = linalg::random_complex(&mut rng, 2, 2);
    for t in [0.1, 1.0] {
        let lhs = e(module.derivative(&e(g.semigroup_apply(t, &x))?))?;
        let rhs = e(module.derivative(&x))?.scale(c((-t).exp()));
        let d = lhs.sub(&rhs).norm_sq().sqrt();
        require(&mut f, format!("intertwining at t={t}: {d:.3e}"), d <= INTERTWINE_RESIDUAL);
    }
    finish(f, vec![format!("residual={:.1e} margins=({:.2e}, {:.2e})", r.intertwining_residual, r.min_left_margin, r.min_right_margin)])
}

fn c9_fisher() -> Outcome {
    let mut f = Vec::new();
    let g = e(zoo::depolarizing(2))?.generator;
    let samples: Vec<CMat> = (0..30)
        .map(|i| e(sampling::mixed_sample(g.algebra(), SEED, i, None)).map(|s| s.1.into_inner()))
        .collect::<Result<_, _>>()?;
    let t_grid: Vec<f64> = (0..=25).map(|k| 0.2 * k as f64).collect();
    let rep = e(entfun::fisher_decay_check(&g, 0.5, &samples, &t_grid, GE_TOL))?;
    require(&mut f, format!("decay margin {:.3e}", rep.min_margin), rep.min_margin >= -GE_TOL);
    require(&mut f, "30 x 26 points", rep.points.len() == 30 * 26);
    let mlsi = e(entfun::mlsi_estimate(&g, &MlsiConfig { seed: SEED, ..Default::default() }))?;
    require(&mut f, format!("MLSI {}", mlsi.estimate), mlsi.estimate >= 1.0 - MLSI_TOL);
    let spot = e(entfun::fisher_information(&g, &diag(&[1.5, 0.5])))?.value;
    let expected = 0.25 * 3f64.ln();
    require(&mut f, format!("I = {spot}, expected {expected}"), (spot - expected).abs() <= SPOT_TOL);
    finish(f, vec![format!("margin={:.1e} mlsi={:.6} I={spot:.12}", rep.min_margin, mlsi.estimate)])
}

/// Gauss–Legendre nodes and weights on `[0, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

fn c10_means() -> Outcome {
    let mut f = Vec::new();
    let rule = gauss_legendre(64);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let d = 2 + i % 3;
        let g = linalg::random_complex(&mut rng, d, d);
        let rho = &g * g.adjoint() + CMat::identity(d, d) * c(0.05);
        let xi = linalg::random_complex(&mut rng, d, d);
        let sd = e(linalg::eig_hermitian(&rho))?;
        let mut quad = CMat::zeros(d, d);
        for &(s, w) in &rule {
            let a = &sd.eigenvectors * diag(&sd.eigenvalues.iter().map(|l| l.powf(s)).collect::<Vec<_>>()) * sd.eigenvectors.adjoint();
            let b = &sd.eigenvectors * diag(&sd.eigenvalues.iter().map(|l| l.powf(1.0 - s)).collect::<Vec<_>>()) * sd.eigenvectors.adjoint();
            quad += a * &xi * b * c(w);
        }
        let hat = e(RhoHat::new(OperatorMean::Logarithmic, &rho))?.apply_component(&xi);
        worst = worst.max(linalg::frobenius(&(hat - &quad)) / linalg::frobenius(&quad));
    }
    require(&mut f, format!("quadrature error {worst:.3e}"), worst <= QUAD_TOL);
    let mut info = vec![format!("quad_err={worst:.1e}")];
    for mean in OperatorMean::ALL {
        let a = e(mean_axiom_audit(mean, 50, SEED))?;
        let margin = a.monotonicity_margin.min(a.transformer_margin);
        require(&mut f, format!("{} audit margin {margin:.3e}", mean.name()), a.pass && margin >= AUDIT_MARGIN);
        info.push(format!("{}={margin:.1e}", mean.name()));
    }
    finish(f, info)
}

fn two_point_density(pi: f64, x: f64) -> CMat {
    // weights (1/4, 3/4) are realized as one copy of the first point and three of the second
    assert_eq!(pi, 0.25);
    let y = (1.0 - pi * x) / (1.0 - pi);
    diag(&[x, y, y, y])
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

fn c11_transport() -> Outcome {
    let (mut f, mut info) = (Vec::new(), Vec::new());
    let mean = OperatorMean::Logarithmic;
    let dep = e(zoo::depolarizing(2))?.generator;
    let rho = e(sampling::wishart(dep.algebra(), &mut sampling::point_rng(SEED, 11)))?.into_inner();
    let cfg = TransportConfig { seed: SEED, ..Default::default() };
    let same = e(transport::w_upper_bound(&dep, mean, &rho, &rho, &cfg))?;
    require(&mut f, format!("W(rho, rho) = {:.3e}", same.length), same.length <= SELF_DISTANCE);

    // two-point space: with ‖∂φ‖²_ρ = π(1−π)θ(x,y)(Δφ)² the distance is
    // ∫ sqrt(π / ((1−π) θ(x, y))) dx
    let pi = 0.25;
    let tp = e(zoo::two_point(pi))?.generator;
    let (x0, x1) = (0.4, 3.2);
    let cfg = TransportConfig { n: 8, iters: 50, seed: SEED, rule: SegmentRule::Gauss(8) };
    let p = e(transport::w_upper_bound(&tp, mean, &two_point_density(pi, x0), &two_point_density(pi, x1), &cfg))?;
    let oracle = simpson(|x| (pi / ((1.0 - pi) * log_mean(x, (1.0 - pi * x) / (1.0 - pi)))).sqrt(), x0, x1, 100_000);
    require(&mut f, format!("two-point bound {} vs {oracle}", p.length), (p.length - oracle).abs() <= TRANSPORT_REL * oracle);
    info.push(format!("two-point {:.6} oracle {oracle:.6}", p.length));

    let ctx = e(TransportContext::new(&dep, mean))?;
    let a = diag(&[1.8, 0.2]);
    let b = CMat::from_row_slice(2, 2, &[c(0.6), C64::new(0.3, 0.2), C64::new(0.3, -0.2), c(1.4)]);
    let mut path = transport::linear_path(&a, &b, 2);
    let mut lengths = Vec::new();
    for n in [2, 4, 8, 16] {
        let cfg = TransportConfig { n, iters: 40, seed: SEED, rule: SegmentRule::Gauss(8) };
        let r = e(transport::optimize_path(&ctx, path, &cfg))?;
        lengths.push(r.length);
        path = transport::refine_path(&e(r.density_matrices())?);
    }
    for w in lengths.windows(2) {
        require(&mut f, format!("refinement {} -> {}", w[0], w[1]), w[1] <= w[0] + REFINE_SLACK);
    }
    info.push(format!("refinement {lengths:.6?}"));

    let proj = e(zoo::projection2())?.generator;
    let err = transport::w_upper_bound(&proj, mean, &diag(&[1.5, 0.5]), &diag(&[1.0, 1.0]), &TransportConfig::default());
    require(&mut f, "not-connectable endpoints accepted", matches!(err, Err(Error::NotConnectable { .. })));
    finish(f, info)
}

/// `Σ c (I⊗v² + (v²)ᵀ⊗I − 2 vᵀ⊗v)` with column-stacking `vec`.
fn lindblad_superop(g: &LindbladGenerator) -> (CMat, CMat) {
    let d = g.ambient_dim();
    let id = CMat::identity(d, d);
    let mut s = CMat::zeros(d * d, d * d);
    let mut dd = CMat::zeros(d * d, d * d);
    for j in g.jumps() {
        let v = &j.v;
        let v2 = v * v;
        s += (id.kronecker(&v2) + v2.transpose().kronecker(&id) - v.transpose().kronecker(v) * c(2.0)) * c(j.weight);
        let der = (id.kronecker(v) - v.transpose().kronecker(&id)) * c(j.weight.sqrt());
        dd += der.adjoint() * der;
    }
    (s, dd)
}

fn c12_structural() -> Outcome {
    let (mut f, mut info) = (Vec::new(), Vec::new());
    let mut models: Vec<Model> = zoo::catalog().iter().map(|c| e(zoo::build(c.name, &BTreeMap::new()))).collect::<Result<_, _>>()?;
    models.push(e(zoo::depolarizing(3))?);
    models.push(e(zoo::cyclic(6))?);
    for m in &models {
        let g = &m.generator;
        let rep = e(verify_qms(g, &[0.1, 1.0]))?;
        require(&mut f, format!("{}: {:?}", m.name, rep.failures), rep.pass);
        let (s, dd) = lindblad_superop(g);
        let r1 = linalg::frobenius(&(&s - g.superop()));
        let r2 = linalg::frobenius(&(&dd - &s));
        let module = TangentModule::new(g);
        let r3 = linalg::frobenius(&(module.stacked().adjoint() * module.stacked() - &s));
        require(&mut f, format!("{}: L = D^dag D residuals {r1:.1e} {r2:.1e} {r3:.1e}", m.name), r1.max(r2).max(r3) <= DD_TOL);
        let min = e(g.spectrum())?.min_eigenvalue();
        require(&mut f, format!("{}: min eigenvalue {min:.3e}", m.name), min >= -SPECTRUM_TOL);
        if m.name.starts_with("depolarizing") || m.name == "projection2" {
            let gap = e(fixed_point_algebra(g))?.spectral_gap.unwrap_or(f64::NAN);
            require(&mut f, format!("{}: spectral gap {gap}", m.name), (gap - 1.0).abs() <= DD_TOL);
            info.push(format!("{} gap={gap:.12}", m.name));
        }
    }
    info.push(format!("{} models", models.len()));
    finish(f, info)
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("depolarizing GE and CGE at K = 1/2", c1_depolarizing),
        ("single projection optimal K", c2_projection),
        ("commuting projections and hypercube at K = 1", c3_projections_hypercube),
        ("cyclic groups Z4 and Z6", c4_cyclic),
        ("symmetric group S3", c5_symmetric),
        ("mean dependence on the two-point space", c6_mean_dependence),
        ("tensor stability", c7_tensor),
        ("intertwining for depolarizing", c8_intertwining),
        ("Fisher information decay and MLSI", c9_fisher),
        ("logarithmic mean vs quadrature, mean axioms", c10_means),
        ("transport bounds", c11_transport),
        ("structural invariants of the model zoo", c12_structural),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        // written to the raw handle so the lines show without --nocapture
        let line = match outcome {
            Ok(info) => format!("PASS {:>2} {name} ({secs:.1}s) {}", i + 1, info.join(", ")),
            Err(why) => {
                failed.push(i + 1);
                format!("FAIL {:>2} {name} ({secs:.1}s) {why}", i + 1)
            }
        };
        writeln!(std::io::stdout(), "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn gauss_legendre_oracle_is_exact_for_polynomials() {
    let rule = gauss_legendre(64);
    let total: f64 = rule.iter().map(|p| p.1).sum();
    assert!((total - 1.0).abs() < 1e-14);
    let m: f64 = rule.iter().map(|&(x, w)| w * x.powi(7)).sum();
    assert!((m - 0.125).abs() < 1e-14);
}
