//! Tracial matrix algebras `(M, τ)`, density operators, subalgebras and their
//! trace-preserving conditional expectations.
//!
//! An algebra is a direct sum of full matrix blocks `M_{n_b}`, each repeated
//! `k_b` times along the diagonal of an ambient `M_D`. The trace is the
//! normalized trace of the ambient algebra, so block `b` carries weight
//! `n_b k_b / D`. Descriptors given as `{blocks, weights}` are converted to
//! multiplicities; weights must therefore be rational with small denominators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, frobenius, matrix_unit, vec, C64, CMat, CVec};

pub const WEIGHT_TOL: f64 = 1e-12;
pub const MEMBERSHIP_TOL: f64 = 1e-10;
const MAX_MULTIPLICITY_DENOMINATOR: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub dim: usize,
    pub multiplicity: usize,
}

/// JSON descriptor `{blocks: [...], weights: [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDescriptor {
    pub blocks: Vec<usize>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracialAlgebra {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    ambient: usize,
}

impl TracialAlgebra {
    pub fn from_blocks(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        if blocks.iter().any(|b| b.dim == 0 || b.multiplicity == 0) {
            return Err(Error::InvalidAlgebra("block dimensions and multiplicities must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut ambient = 0;
        for b in &blocks {
            offsets.push(ambient);
            ambient += b.dim * b.multiplicity;
        }
        Ok(Self { blocks, offsets, ambient })
    }

    /// The full matrix algebra `M_d` with its normalized trace.
    pub fn full(d: usize) -> Self {
        Self::from_blocks(vec![Block { dim: d, multiplicity: 1 }]).expect("d > 0")
    }

    pub fn from_descriptor(desc: &AlgebraDescriptor) -> Result<Self> {
        if desc.blocks.len() != desc.weights.len() {
            return Err(Error::InvalidAlgebra("blocks and weights differ in length".into()));
        }
        if desc.blocks.iter().any(|&n| n == 0) || desc.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidAlgebra("blocks and weights must be positive".into()));
        }
        let total: f64 = desc.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidAlgebra(format!("weights sum to {total}, not 1")));
        }
        for q in 1..=MAX_MULTIPLICITY_DENOMINATOR {
            let mults: Vec<usize> = desc
                .blocks
                .iter()
                .zip(&desc.weights)
                .map(|(&n, &w)| (q as f64 * w / n as f64).round() as usize)
                .collect();
            if mults.iter().any(|&k| k == 0) {
                continue;
            }
            let d: usize = desc.blocks.iter().zip(&mults).map(|(n, k)| n * k).sum();
            let fits = desc
                .blocks
                .iter()
                .zip(&mults)
                .zip(&desc.weights)
                .all(|((&n, &k), &w)| ((n * k) as f64 / d as f64 - w).abs() <= WEIGHT_TOL);
            if fits {
                let blocks = desc
                    .blocks
                    .iter()
                    .zip(mults)
                    .map(|(&dim, multiplicity)| Block { dim, multiplicity })
                    .collect();
                return Self::from_blocks(blocks);
            }
        }
        Err(Error::InvalidAlgebra(
            "weights are not realizable with small block multiplicities".into(),
        ))
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        AlgebraDescriptor { blocks: self.blocks.iter().map(|b| b.dim).collect(), weights: self.weights() }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Size `D` of the ambient matrices representing elements.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Dimension of `L²(M, τ)`.
    pub fn gns_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| (b.dim * b.multiplicity) as f64 / self.ambient as f64)
            .collect()
    }

    pub fn is_full(&self) -> bool {
        self.blocks.len() == 1 && self.blocks[0].multiplicity == 1
    }

    pub fn unit(&self) -> CMat {
        CMat::identity(self.ambient, self.ambient)
    }

    fn check_dim(&self, x: &CMat) -> Result<()> {
        if x.nrows() != self.ambient || x.ncols() != self.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, got: x.nrows() });
        }
        Ok(())
    }

    pub fn trace(&self, x: &CMat) -> Result<C64> {
        self.check_dim(x)?;
        Ok(x.trace() / self.ambient as f64)
    }

    /// `⟨x, y⟩ = τ(x† y)`.
    pub fn gns_inner(&self, x: &CMat, y: &CMat) -> Result<C64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let s: C64 = x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
        Ok(s / self.ambient as f64)
    }

    pub fn gns_norm(&self, x: &CMat) -> f64 {
        frobenius(x) / (self.ambient as f64).sqrt()
    }

    /// Assembles an element from one matrix per block.
    pub fn embed_blocks(&self, parts: &[CMat]) -> Result<CMat> {
        if parts.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch { expected: self.blocks.len(), got: parts.len() });
        }
        let mut x = CMat::zeros(self.ambient, self.ambient);
        for ((b, &off), part) in self.blocks.iter().zip(&self.offsets).zip(parts) {
            if part.nrows() != b.dim || part.ncols() != b.dim {
                return Err(Error::DimensionMismatch { expected: b.dim, got: part.nrows() });
            }
            for r in 0..b.multiplicity {
                let o = off + r * b.dim;
                x.view_mut((o, o), (b.dim, b.dim)).copy_from(part);
            }
        }
        Ok(x)
    }

    /// The per-block matrices of an element (first copy of each block).
    pub fn block_parts(&self, x: &CMat) -> Vec<CMat> {
        self.blocks
            .iter()
            .zip(&self.offsets)
            .map(|(b, &o)| x.view((o, o), (b.dim, b.dim)).into_owned())
            .collect()
    }

    /// Trace-preserving conditional expectation of `M_D` onto the algebra.
    pub fn project(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.ambient, self.ambient);
        for (b, &off) in self.blocks.iter().zip(&self.offsets) {
            let mut avg = CMat::zeros(b.dim, b.dim);
            for r in 0..b.multiplicity {
                let o = off + r * b.dim;
                avg += x.view((o, o), (b.dim, b.dim));
            }
            avg /= c(b.multiplicity as f64);
            for r in 0..b.multiplicity {
                let o = off + r * b.dim;
                out.view_mut((o, o), (b.dim, b.dim)).copy_from(&avg);
            }
        }
        out
    }

    pub fn contains(&self, x: &CMat) -> bool {
        x.nrows() == self.ambient
            && frobenius(&(x - self.project(x))) <= MEMBERSHIP_TOL * (1.0 + frobenius(x))
    }

    /// Isometry `Q` (`D² × gns_dim`, orthonormal columns in the standard
    /// inner product of vectorizations) whose range is `vec(M)`. For a full
    /// algebra this is the identity.
    pub fn basis_isometry(&self) -> CMat {
        let d = self.ambient;
        let mut q = CMat::zeros(d * d, self.gns_dim());
        let mut col = 0;
        for (b, &off) in self.blocks.iter().zip(&self.offsets) {
            let s = c(1.0 / (b.multiplicity as f64).sqrt());
            for j in 0..b.dim {
                for i in 0..b.dim {
                    for r in 0..b.multiplicity {
                        let o = off + r * b.dim;
                        q[((o + i) + (o + j) * d, col)] = s;
                    }
                    col += 1;
                }
            }
        }
        q
    }

    /// GNS-orthonormal basis of self-adjoint elements.
    pub fn hermitian_basis(&self) -> Vec<CMat> {
        let d = self.ambient as f64;
        let mut out = Vec::with_capacity(self.gns_dim());
        for b in &self.blocks {
            let n = b.dim;
            let scale = (d / b.multiplicity as f64).sqrt();
            let mut parts_for = |m: CMat| {
                let mut parts: Vec<CMat> =
                    self.blocks.iter().map(|bb| CMat::zeros(bb.dim, bb.dim)).collect();
                let idx = self.blocks.iter().position(|bb| std::ptr::eq(bb, b)).unwrap();
                parts[idx] = m * c(scale);
                out.push(self.embed_blocks(&parts).unwrap());
            };
            for i in 0..n {
                parts_for(matrix_unit(n, i, i));
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..n {
                for j in (i + 1)..n {
                    parts_for((matrix_unit(n, i, j) + matrix_unit(n, j, i)) * c(h));
                    parts_for((matrix_unit(n, i, j) - matrix_unit(n, j, i)) * C64::new(0.0, h));
                }
            }
        }
        out
    }

    /// Coordinates of `x ∈ M` in the basis given by [`Self::basis_isometry`].
    pub fn coordinates(&self, x: &CMat) -> CVec {
        self.basis_isometry().adjoint() * vec(x)
    }

    /// `M_{d1} ⊗ M_{d2} = M_{d1 d2}`; only single-block full algebras.
    pub fn tensor(&self, other: &TracialAlgebra) -> Result<TracialAlgebra> {
        if !self.is_full() || !other.is_full() {
            return Err(Error::Unsupported("tensor products of block algebras".into()));
        }
        Ok(TracialAlgebra::full(self.ambient * other.ambient))
    }
}

/// `x ⊗ y` as an element of the tensor product algebra.
pub fn tensor_element(x: &CMat, y: &CMat) -> CMat {
    linalg::kron(x, y)
}

pub const DENSITY_TOL: f64 = 1e-12;

/// A positive element of trace one.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(CMat);

impl DensityOperator {
    pub fn new(alg: &TracialAlgebra, m: CMat) -> Result<Self> {
        let h = linalg::HermitianMatrix::new(m)?;
        if !alg.contains(h.matrix()) {
            return Err(Error::InvalidAlgebra("density is not an element of the algebra".into()));
        }
        let sd = h.eig()?;
        let scale = 1.0 + sd.spectral_norm();
        if sd.min_eigenvalue() < -DENSITY_TOL * scale {
            return Err(Error::NotPositive { eigenvalue: sd.min_eigenvalue() });
        }
        let tr = alg.trace(h.matrix())?.re;
        if (tr - 1.0).abs() > DENSITY_TOL * scale {
            return Err(Error::InvalidAlgebra(format!("density has trace {tr}")));
        }
        Ok(Self(h.into_inner()))
    }

    /// Normalizes a positive element to trace one.
    pub fn normalized(alg: &TracialAlgebra, m: CMat) -> Result<Self> {
        let tr = alg.trace(&m)?.re;
        if !(tr > 0.0) {
            return Err(Error::NotPositive { eigenvalue: tr });
        }
        Self::new(alg, linalg::hermitian_part(&(m / c(tr))))
    }

    /// The trace state `1`.
    pub fn identity(alg: &TracialAlgebra) -> Self {
        Self(alg.unit())
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }
}

/// A unital *-subalgebra `N ⊆ M_D` given by a GNS-orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subalgebra {
    ambient: usize,
    basis: Vec<CMat>,
}

impl Subalgebra {
    /// Orthonormalizes `elements` and checks the result is a unital *-subalgebra.
    pub fn from_spanning(ambient: usize, elements: &[CMat]) -> Result<Self> {
        let basis = orthonormalize(ambient, elements);
        let sub = Self { ambient, basis };
        sub.validate()?;
        Ok(sub)
    }

    /// The *-subalgebra generated by `elements` (iterated products until the
    /// dimension stabilizes).
    pub fn generated_by(ambient: usize, elements: &[CMat]) -> Result<Self> {
        let mut span: Vec<CMat> = vec![CMat::identity(ambient, ambient)];
        for e in elements {
            span.push(e.clone());
            span.push(e.adjoint());
        }
        let mut basis = orthonormalize(ambient, &span);
        loop {
            let mut candidates = basis.clone();
            for a in &basis {
                for b in &basis {
                    candidates.push(a * b);
                }
            }
            let next = orthonormalize(ambient, &candidates);
            if next.len() == basis.len() {
                break;
            }
            basis = next;
        }
        let sub = Self { ambient, basis };
        sub.validate()?;
        Ok(sub)
    }

    pub fn scalars(ambient: usize) -> Self {
        Self { ambient, basis: vec![CMat::identity(ambient, ambient)] }
    }

    pub fn diagonal(ambient: usize) -> Self {
        let s = c((ambient as f64).sqrt());
        let basis = (0..ambient).map(|i| matrix_unit(ambient, i, i) * s).collect();
        Self { ambient, basis }
    }

    /// The algebra itself as a subalgebra of its ambient matrices.
    pub fn whole(alg: &TracialAlgebra) -> Self {
        Self { ambient: alg.ambient_dim(), basis: alg.hermitian_basis() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    fn gns_inner(&self, x: &CMat, y: &CMat) -> C64 {
        x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() / self.ambient as f64
    }

    /// GNS-orthogonal projection; this is the trace-preserving conditional expectation.
    pub fn apply(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.ambient, self.ambient);
        for b in &self.basis {
            out += b * self.gns_inner(b, x);
        }
        out
    }

    pub fn contains(&self, x: &CMat) -> bool {
        frobenius(&(x - self.apply(x))) <= MEMBERSHIP_TOL * (1.0 + frobenius(x))
    }

    /// Superoperator of the conditional expectation on `M_D`.
    pub fn conditional_expectation(&self) -> CMat {
        let n = self.ambient * self.ambient;
        let mut e = CMat::zeros(n, n);
        for b in &self.basis {
            let v = vec(b);
            e += &v * v.adjoint() / c(self.ambient as f64);
        }
        e
    }

    fn validate(&self) -> Result<()> {
        let one = CMat::identity(self.ambient, self.ambient);
        if !self.contains(&one) {
            return Err(Error::NotSubalgebra("does not contain the unit".into()));
        }
        for (i, b) in self.basis.iter().enumerate() {
            if !self.contains(&b.adjoint()) {
                return Err(Error::NotSubalgebra(format!("adjoint of basis element {i} escapes")));
            }
        }
        let pairs: Vec<(usize, usize)> = if self.basis.len() <= 16 {
            (0..self.basis.len()).flat_map(|i| (0..self.basis.len()).map(move |j| (i, j))).collect()
        } else {
            let k = self.basis.len();
            (0..64).map(|s| ((s * 7919) % k, (s * 104729 + 3) % k)).collect()
        };
        for (i, j) in pairs {
            if !self.contains(&(&self.basis[i] * &self.basis[j])) {
                return Err(Error::NotSubalgebra(format!("product of basis elements {i},{j} escapes")));
            }
        }
        Ok(())
    }
}

/// Modified Gram–Schmidt in the GNS inner product, dropping dependent vectors.
fn orthonormalize(ambient: usize, elements: &[CMat]) -> Vec<CMat> {
    let d = ambient as f64;
    let inner = |x: &CMat, y: &CMat| x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() / d;
    let mut out: Vec<CMat> = Vec::new();
    for e in elements {
        let scale = (inner(e, e).re).sqrt();
        if scale == 0.0 {
            continue;
        }
        let mut v = e.clone();
        for _ in 0..2 {
            for b in &out {
                let p = inner(b, &v);
                v -= b * p;
            }
        }
        let n = inner(&v, &v).re.sqrt();
        if n > 1e-9 * scale {
            out.push(v / c(n));
        }
    }
    out
}
