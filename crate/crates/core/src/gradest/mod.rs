//! Gradient estimates `GE(K,∞)`: the Hermitian form
//!
//! `G = e^{−2Kt} (DQ)† ρ̂_{P_tρ} (DQ) − (DQP_t)† ρ̂_ρ (DQP_t)`
//!
//! on algebra coordinates, whose positivity for all `(t, ρ)` is the estimate.
//! Exact mode diagonalizes `G`; sampled mode only applies it to vectors and
//! is therefore evidence, never a proof.

mod bakry_emery;
mod intertwine;
mod optimal;

pub use bakry_emery::{bakry_emery_cross_check, BakryEmeryReport};
pub use intertwine::{intertwine_check, Candidate, IntertwineConfig, IntertwinePoint, IntertwineReport};
pub use optimal::{optimal_k, optimal_k_global, GlobalK, PointwiseK, SearchConfig};

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::TangentModule;
use crate::error::{Error, Result};
use crate::linalg::{self, c, json::MatrixJson, CMat, CVec};
use crate::means::{OperatorMean, RhoHat};
use crate::qms::LindbladGenerator;
use crate::sampling::{self, SampleKind};

/// Largest algebra (GNS) dimension diagonalized in exact mode.
pub const EXACT_CAP: usize = 1296;
/// Pass threshold for the smallest eigenvalue of the GE form.
pub const GE_TOL: f64 = 1e-8;
pub const SAMPLED_DIRECTIONS: usize = 256;
pub const POWER_ITERATIONS: usize = 50;

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-3, 10.0, 40)
}

/// Precomputed `DQ` for one generator and mean.
pub struct GeContext<'a> {
    gen: &'a LindbladGenerator,
    mean: OperatorMean,
    module: TangentModule,
    blocks: Vec<CMat>,
}

impl<'a> GeContext<'a> {
    pub fn new(gen: &'a LindbladGenerator, mean: OperatorMean) -> Self {
        let module = TangentModule::new(gen);
        let blocks = (0..module.components())
            .map(|j| {
                let dj = module.derivation_superop(j).expect("index in range");
                if gen.algebra().is_full() {
                    dj
                } else {
                    dj * gen.isometry()
                }
            })
            .collect();
        Self { gen, mean, module, blocks }
    }

    pub fn generator(&self) -> &LindbladGenerator {
        self.gen
    }

    pub fn mean(&self) -> OperatorMean {
        self.mean
    }

    pub fn module(&self) -> &TangentModule {
        &self.module
    }

    /// `(DQ)† ρ̂_σ (DQ)`.
    pub fn metric_form(&self, sigma: &CMat) -> Result<CMat> {
        let g = self.gen.gns_dim();
        let mut out = CMat::zeros(g, g);
        if self.blocks.is_empty() {
            return Ok(out);
        }
        let hat = RhoHat::new(self.mean, sigma)?;
        let v = hat.basis_change();
        let w = hat.multiplier_diagonal();
        for x in &self.blocks {
            let z = v.adjoint() * x;
            let mut wz = z.clone();
            for (r, &wr) in w.iter().enumerate() {
                wz.row_mut(r).scale_mut(wr);
            }
            out += z.adjoint() * wz;
        }
        Ok(linalg::hermitian_part(&out))
    }

    /// `(A, B)` with `A = P_t (DQ)† ρ̂_ρ (DQ) P_t` and `B = (DQ)† ρ̂_{P_tρ} (DQ)`.
    pub fn terms(&self, t: f64, rho: &CMat) -> Result<(CMat, CMat)> {
        let c_rho = self.metric_form(rho)?;
        self.terms_with(t, rho, &c_rho)
    }

    fn terms_with(&self, t: f64, rho: &CMat, c_rho: &CMat) -> Result<(CMat, CMat)> {
        let p = self.gen.semigroup_matrix(t)?;
        let a = linalg::hermitian_part(&(&p * c_rho * &p));
        let pt_rho = self.gen.semigroup_apply(t, rho)?;
        let b = self.metric_form(&pt_rho)?;
        Ok((a, b))
    }

    /// The GE form `e^{−2Kt} B − A`.
    pub fn form(&self, t: f64, rho: &CMat, k: f64) -> Result<CMat> {
        let (a, b) = self.terms(t, rho)?;
        Ok(b * c((-2.0 * k * t).exp()) - a)
    }

    /// Matrix-free evaluation of the form at one `(t, ρ)`.
    pub fn operator(&self, t: f64, rho: &CMat, k: f64) -> Result<FormOperator<'_>> {
        let pt_rho = self.gen.semigroup_apply(t, rho)?;
        Ok(FormOperator {
            ctx: self,
            t,
            factor: (-2.0 * k * t).exp(),
            hat_rho: RhoHat::new(self.mean, rho)?,
            hat_pt_rho: RhoHat::new(self.mean, &pt_rho)?,
        })
    }
}

/// `a ↦ G a` without forming `G`.
pub struct FormOperator<'c> {
    ctx: &'c GeContext<'c>,
    t: f64,
    factor: f64,
    hat_rho: RhoHat,
    hat_pt_rho: RhoHat,
}

impl FormOperator<'_> {
    fn weighted(&self, hat: &RhoHat, coords: &CVec) -> Result<CVec> {
        let gen = self.ctx.gen;
        let m = &self.ctx.module;
        let x = gen.from_coords(coords);
        let dx = m.derivative(&x)?;
        let back = m.adjoint_apply(&hat.apply(&dx))?;
        Ok(gen.to_coords(&back))
    }

    pub fn apply(&self, coords: &CVec) -> Result<CVec> {
        let gen = self.ctx.gen;
        let first = self.weighted(&self.hat_pt_rho, coords)? * c(self.factor);
        let moved = gen.semigroup_coords(self.t, coords)?;
        let second = gen.semigroup_coords(self.t, &self.weighted(&self.hat_rho, &moved)?)?;
        Ok(first - second)
    }

    pub fn rayleigh(&self, v: &CVec) -> Result<f64> {
        Ok(v.dotc(&self.apply(v)?).re / v.norm_squared())
    }

    /// Smallest Rayleigh quotient over random directions, refined by shifted
    /// power iteration. An upper bound on the smallest eigenvalue.
    pub fn sampled_min(&self, rng: &mut impl Rng, directions: usize, power_steps: usize) -> Result<(f64, CVec)> {
        let g = self.ctx.gen.gns_dim();
        let mut best = f64::INFINITY;
        let mut best_v = CVec::zeros(g);
        fn random_unit(rng: &mut impl Rng, g: usize) -> CVec {
            let v = linalg::random_complex(rng, g, 1).column(0).into_owned();
            let n = v.norm();
            v / c(n)
        }
        for _ in 0..directions {
            let v = random_unit(rng, g);
            let q = self.rayleigh(&v)?;
            if q < best {
                best = q;
                best_v = v;
            }
        }
        // spectral radius estimate for the shift
        let mut v = random_unit(rng, g);
        let mut radius: f64 = 0.0;
        for _ in 0..20 {
            let w = self.apply(&v)?;
            let n = w.norm();
            if n == 0.0 {
                break;
            }
            radius = radius.max(n);
            v = w / c(n);
        }
        let shift = 1.05 * radius + 1e-300;
        let mut v = best_v.clone();
        for _ in 0..power_steps {
            let w = &v * c(shift) - self.apply(&v)?;
            let n = w.norm();
            if n == 0.0 {
                break;
            }
            v = w / c(n);
            let q = self.rayleigh(&v)?;
            if q < best {
                best = q;
                best_v = v.clone();
            }
        }
        Ok((best, best_v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "sampled" => Ok(Mode::Sampled),
            other => Err(Error::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeConfig {
    pub num_rho: usize,
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub mode: Mode,
    /// Tensor split `(d1, d2)` of the ambient algebra, enabling product and
    /// entangled samples.
    pub tensor_split: Option<(usize, usize)>,
    pub tol: f64,
}

impl Default for GeConfig {
    fn default() -> Self {
        Self { num_rho: 20, t_grid: default_t_grid(), seed: 0, mode: Mode::Exact, tensor_split: None, tol: GE_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GePoint {
    pub t: f64,
    pub rho_id: usize,
    pub rho_kind: SampleKind,
    pub min_eig: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub rho_id: usize,
    pub min_eig: f64,
    pub rho: MatrixJson,
    /// Direction `a` attaining `min_eig`.
    pub a: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GEReport {
    pub model: String,
    pub mean: OperatorMean,
    #[serde(rename = "K")]
    pub k: f64,
    pub mode: Mode,
    pub points: Vec<GePoint>,
    pub global_min: f64,
    pub pass: bool,
    pub seed: u64,
    pub tol: f64,
    pub witness: Option<Witness>,
    pub runtime_ms: u64,
}

fn point_min(
    ctx: &GeContext,
    mode: Mode,
    t: f64,
    rho: &CMat,
    c_rho: &CMat,
    k: f64,
    seed: u64,
    index: u64,
) -> Result<(f64, CVec)> {
    match mode {
        Mode::Exact => {
            let (a, b) = ctx.terms_with(t, rho, c_rho)?;
            let form = b * c((-2.0 * k * t).exp()) - a;
            let sd = linalg::eig_hermitian(&form)?;
            Ok((sd.min_eigenvalue(), sd.eigenvectors.column(0).into_owned()))
        }
        Mode::Sampled => {
            let op = ctx.operator(t, rho, k)?;
            let mut rng = sampling::point_rng(seed ^ 0x5a5a_5a5a, index);
            op.sampled_min(&mut rng, SAMPLED_DIRECTIONS, POWER_ITERATIONS)
        }
    }
}

/// Checks `GE(K,∞)` over sampled densities and times.
pub fn ge_check(gen: &LindbladGenerator, mean: OperatorMean, k: f64, config: &GeConfig) -> Result<GEReport> {
    let start = Instant::now();
    if config.mode == Mode::Exact && gen.gns_dim() > EXACT_CAP {
        return Err(Error::SizeCap { size: gen.gns_dim(), cap: EXACT_CAP });
    }
    let ctx = GeContext::new(gen, mean);
    gen.spectrum()?;
    let samples: Vec<(SampleKind, CMat, CMat)> = (0..config.num_rho)
        .into_par_iter()
        .map(|i| {
            let (kind, rho) = sampling::mixed_sample(gen.algebra(), config.seed, i as u64, config.tensor_split)?;
            let c_rho = if config.mode == Mode::Exact { ctx.metric_form(rho.matrix())? } else { CMat::zeros(0, 0) };
            Ok((kind, rho.into_inner(), c_rho))
        })
        .collect::<Result<_>>()?;
    let nt = config.t_grid.len();
    let results: Vec<(GePoint, CVec)> = (0..samples.len() * nt)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nt, idx % nt);
            let t = config.t_grid[j];
            let (kind, rho, c_rho) = &samples[i];
            let (min_eig, v) = point_min(&ctx, config.mode, t, rho, c_rho, k, config.seed, idx as u64)?;
            Ok((GePoint { t, rho_id: i, rho_kind: *kind, min_eig }, v))
        })
        .collect::<Result<_>>()?;
    let mut global_min = f64::INFINITY;
    let mut witness = None;
    for (p, v) in &results {
        if p.min_eig < global_min {
            global_min = p.min_eig;
            witness = Some(Witness {
                t: p.t,
                rho_id: p.rho_id,
                min_eig: p.min_eig,
                rho: MatrixJson::from_matrix(&samples[p.rho_id].1),
                a: MatrixJson::from_matrix(&gen.from_coords(v)),
            });
        }
    }
    let points: Vec<GePoint> = results.into_iter().map(|(p, _)| p).collect();
    Ok(GEReport {
        model: String::new(),
        mean,
        k,
        mode: config.mode,
        pass: global_min >= -config.tol,
        global_min,
        points,
        seed: config.seed,
        tol: config.tol,
        witness,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Size guard shared by the tensor constructions.
fn guard(gen: &LindbladGenerator, mode: Mode) -> Result<()> {
    if mode == Mode::Exact && gen.gns_dim() > EXACT_CAP {
        return Err(Error::SizeCap { size: gen.gns_dim(), cap: EXACT_CAP });
    }
    Ok(())
}

/// `CGE(K,∞)` against a fixed ancilla `M_m`: GE for `ℒ ⊗ id`.
pub fn cge_check(
    gen: &LindbladGenerator,
    mean: OperatorMean,
    k: f64,
    ancilla: usize,
    config: &GeConfig,
) -> Result<GEReport> {
    let d = gen.ambient_dim();
    let size = gen.gns_dim() * ancilla * ancilla;
    if config.mode == Mode::Exact && size > EXACT_CAP {
        return Err(Error::SizeCap { size, cap: EXACT_CAP });
    }
    let extended = gen.tensor_identity(ancilla)?;
    let cfg = GeConfig { tensor_split: Some((d, ancilla)), ..config.clone() };
    ge_check(&extended, mean, k, &cfg)
}

/// GE for `ℒ₁ ⊗ I + I ⊗ ℒ₂` with derivations `∂_j ⊗ id` and `id ⊗ ∂_k`.
pub fn tensor_ge_harness(
    gen1: &LindbladGenerator,
    gen2: &LindbladGenerator,
    mean: OperatorMean,
    k: f64,
    config: &GeConfig,
) -> Result<GEReport> {
    let product = gen1.tensor_sum(gen2)?;
    guard(&product, config.mode)?;
    let cfg = GeConfig { tensor_split: Some((gen1.ambient_dim(), gen2.ambient_dim())), ..config.clone() };
    ge_check(&product, mean, k, &cfg)
}

/// Value `e^{−2Kt}‖∂a‖²_{P_tρ} − ‖∂P_t a‖²_ρ` of the form at one direction.
pub fn ge_form_value(ctx: &GeContext, t: f64, rho: &CMat, k: f64, a: &CMat) -> Result<f64> {
    let op = ctx.operator(t, rho, k)?;
    let v = ctx.generator().to_coords(a);
    Ok(v.dotc(&op.apply(&v)?).re)
}
