//! Model catalog. Each constructor attaches the curvature constant known for
//! the model, so reports can state what they are checking against.

mod group;

pub use group::{
    cyclic_group_model, group_lindblad_from_cocycle, symmetric_group_model, validate_table, FiniteGroupModel,
    COCYCLE_WARN_TOL,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, Subalgebra, TracialAlgebra};
use crate::error::{Error, Result};
use crate::gradest::Mode;
use crate::linalg::{self, c, CMat, CVec};
use crate::qms::{GeneratorJson, Jump, LindbladGenerator};

/// Tolerance for idempotence and commutation of projections.
pub const PROJECTION_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub generator: LindbladGenerator,
    /// `K` with `CGE(K,∞)` known for this model.
    pub constant: Option<f64>,
    pub reference: String,
    pub group: Option<FiniteGroupModel>,
    /// Default mode for GE checks.
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub name: String,
    pub constant: Option<f64>,
    pub reference: String,
    pub generator: GeneratorJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<FiniteGroupModel>,
}

impl Model {
    fn new(name: impl Into<String>, generator: LindbladGenerator, constant: f64, reference: &str) -> Self {
        Self {
            name: name.into(),
            generator,
            constant: Some(constant),
            reference: reference.into(),
            group: None,
            mode: Mode::Exact,
        }
    }

    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            name: self.name.clone(),
            constant: self.constant,
            reference: self.reference.clone(),
            generator: self.generator.to_json(),
            group: self.group.clone(),
        }
    }

    pub fn from_json(json: &ModelJson) -> Result<Self> {
        let generator = LindbladGenerator::from_json(&json.generator)?;
        let mode = if generator.gns_dim() > crate::gradest::EXACT_CAP / 2 { Mode::Sampled } else { Mode::Exact };
        Ok(Self {
            name: json.name.clone(),
            generator,
            constant: json.constant,
            reference: json.reference.clone(),
            group: json.group.clone(),
            mode,
        })
    }
}

const REF_COND_EXP: &str = "conditional expectation example: L = I - E satisfies CGE(1/2,inf)";
const REF_PROJ: &str = "commuting projections theorem: CGE(1,inf), optimal for a single projection";
const REF_HYPERCUBE: &str = "hypercube example via commuting self-adjoint unitaries: CGE(1,inf)";
const REF_CYCLIC: &str = "cyclic group example (word length): CGE(1,inf)";
const REF_SYMMETRIC: &str = "symmetric group example (Hamming length): CGE(1/2,inf)";
const REF_TWO_POINT: &str = "two-point space, L = I - E_pi: CGE(1/2,inf) as a conditional expectation";

fn diag(vals: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&v| c(v))))
}

/// `ℒ = I − E` for the trace-preserving conditional expectation onto `sub`.
pub fn conditional_expectation_model(algebra: TracialAlgebra, sub: &Subalgebra) -> Result<LindbladGenerator> {
    LindbladGenerator::from_expectation(algebra, &sub.conditional_expectation())
}

pub fn depolarizing(d: usize) -> Result<Model> {
    let gen = conditional_expectation_model(TracialAlgebra::full(d), &Subalgebra::scalars(d))?;
    Ok(Model::new(format!("depolarizing{d}"), gen, 0.5, REF_COND_EXP))
}

/// Conditional expectation onto the diagonal of `M_d`.
pub fn dephasing(d: usize) -> Result<Model> {
    let gen = conditional_expectation_model(TracialAlgebra::full(d), &Subalgebra::diagonal(d))?;
    Ok(Model::new(format!("dephasing{d}"), gen, 0.5, REF_COND_EXP))
}

/// Jumps `(1, p_j)` for commuting projections.
pub fn commuting_projections_model(algebra: TracialAlgebra, projections: &[CMat]) -> Result<LindbladGenerator> {
    for (i, p) in projections.iter().enumerate() {
        let scale = 1.0 + linalg::frobenius(p);
        let herm = linalg::frobenius(&(p - p.adjoint()));
        let idem = linalg::frobenius(&(p * p - p));
        if herm > PROJECTION_TOL * scale || idem > PROJECTION_TOL * scale {
            return Err(Error::InvalidGenerator(format!(
                "p_{i} is not a projection (p − p† = {herm:.3e}, p² − p = {idem:.3e})"
            )));
        }
    }
    for i in 0..projections.len() {
        for j in (i + 1)..projections.len() {
            let comm = linalg::frobenius(&linalg::commutator(&projections[i], &projections[j]));
            if comm > PROJECTION_TOL {
                return Err(Error::InvalidGenerator(format!("p_{i} and p_{j} do not commute (‖[p,q]‖ = {comm:.3e})")));
            }
        }
    }
    let jumps = projections.iter().map(|p| Jump::new(1.0, p.clone())).collect::<Result<Vec<_>>>()?;
    LindbladGenerator::new(algebra, jumps)
}

/// `diag(1, 0)` in `M₂`.
pub fn projection2() -> Result<Model> {
    let gen = commuting_projections_model(TracialAlgebra::full(2), &[diag(&[1.0, 0.0])])?;
    Ok(Model::new("projection2", gen, 1.0, REF_PROJ))
}

/// The two bit-mask projections `p_j = Σ_{x: bit_j(x)=1} |x⟩⟨x|` in `M₄`.
pub fn bitmask_projections4() -> Result<Model> {
    let p1 = diag(&[0.0, 1.0, 0.0, 1.0]);
    let p2 = diag(&[0.0, 0.0, 1.0, 1.0]);
    let gen = commuting_projections_model(TracialAlgebra::full(4), &[p1, p2])?;
    Ok(Model::new("projections4", gen, 1.0, REF_PROJ))
}

/// Swap unitary of bit `j` on `ℓ²({0,1}^d)`.
pub fn bit_swap(d: usize, j: usize) -> CMat {
    let n = 1 << d;
    let mut v = CMat::zeros(n, n);
    for x in 0..n {
        v[(x ^ (1 << j), x)] = c(1.0);
    }
    v
}

/// `ℒA = ½ Σ_j (A − v_j A v_j)` with the coordinate swaps `v_j`, i.e. jumps `(¼, v_j)`.
pub fn hypercube(d: usize) -> Result<Model> {
    if d == 0 || d > 3 {
        return Err(Error::SizeCap { size: d, cap: 3 });
    }
    let jumps = (0..d).map(|j| Jump::new(0.25, bit_swap(d, j))).collect::<Result<Vec<_>>>()?;
    let gen = LindbladGenerator::new(TracialAlgebra::full(1 << d), jumps)?;
    Ok(Model::new(format!("hypercube{d}"), gen, 1.0, REF_HYPERCUBE))
}

/// Commutative `C²` with weights `(π, 1−π)` and `ℒ = I − E_π`, realized in the
/// ambient `M_D` through block multiplicities.
pub fn two_point(pi: f64) -> Result<Model> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::InvalidAlgebra(format!("weight must lie in (0, 1), got {pi}")));
    }
    let alg = TracialAlgebra::from_descriptor(&AlgebraDescriptor { blocks: vec![1, 1], weights: vec![pi, 1.0 - pi] })?;
    let d = alg.ambient_dim();
    let gen = LindbladGenerator::from_expectation(alg, &Subalgebra::scalars(d).conditional_expectation())?;
    Ok(Model::new("two_point", gen, 0.5, REF_TWO_POINT))
}

pub fn cyclic(n: usize) -> Result<Model> {
    let (group, gen) = cyclic_group_model(n)?;
    let mut m = Model::new(format!("cyclic{n}"), gen, 1.0, REF_CYCLIC);
    m.group = Some(group);
    Ok(m)
}

pub fn symmetric(n: usize) -> Result<Model> {
    let (group, gen) = symmetric_group_model(n)?;
    let mut m = Model::new(format!("symmetric{n}"), gen, 0.5, REF_SYMMETRIC);
    if n >= 4 {
        m.mode = Mode::Sampled;
    }
    m.group = Some(group);
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub constant: f64,
    pub reference: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry { name: "depolarizing", params: "d=2", constant: 0.5, reference: REF_COND_EXP },
        CatalogEntry { name: "dephasing", params: "d=2", constant: 0.5, reference: REF_COND_EXP },
        CatalogEntry { name: "projection", params: "", constant: 1.0, reference: REF_PROJ },
        CatalogEntry { name: "projections4", params: "", constant: 1.0, reference: REF_PROJ },
        CatalogEntry { name: "hypercube", params: "d=2 (d<=3)", constant: 1.0, reference: REF_HYPERCUBE },
        CatalogEntry { name: "two_point", params: "p=0.5", constant: 0.5, reference: REF_TWO_POINT },
        CatalogEntry { name: "cyclic", params: "n=4 (even, <=8)", constant: 1.0, reference: REF_CYCLIC },
        CatalogEntry { name: "symmetric", params: "n=3 (<=4)", constant: 0.5, reference: REF_SYMMETRIC },
    ]
}

fn param<T: std::str::FromStr>(params: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| Error::Parse(format!("bad value '{v}' for parameter '{key}'"))),
    }
}

/// Splits names like `cyclic6` into `("cyclic", Some(6))`.
fn split_suffix(name: &str) -> (&str, Option<usize>) {
    let cut = name.trim_end_matches(|ch: char| ch.is_ascii_digit());
    (cut, name[cut.len()..].parse().ok())
}

/// Builds a catalog model. A numeric suffix (`depolarizing3`, `cyclic6`)
/// sets the size parameter.
pub fn build(name: &str, params: &BTreeMap<String, String>) -> Result<Model> {
    let (base, suffix) = split_suffix(name);
    match base {
        "depolarizing" => depolarizing(suffix.map_or_else(|| param(params, "d", 2), Ok)?),
        "dephasing" => dephasing(suffix.map_or_else(|| param(params, "d", 2), Ok)?),
        "projection" if suffix.is_none_or(|s| s == 2) => projection2(),
        "projections" if suffix.is_none_or(|s| s == 4) => bitmask_projections4(),
        "hypercube" => hypercube(suffix.map_or_else(|| param(params, "d", 2), Ok)?),
        "two_point" => two_point(param(params, "p", 0.5)?),
        "cyclic" => cyclic(suffix.map_or_else(|| param(params, "n", 4), Ok)?),
        "symmetric" => symmetric(suffix.map_or_else(|| param(params, "n", 3), Ok)?),
        _ => Err(Error::UnknownModel(name.into())),
    }
}
