//! Lindblad generators `ℒx = Σ_j c_j (v_j²x + x v_j² − 2 v_j x v_j)` with
//! self-adjoint jumps, their semigroups `P_t = e^{−tℒ}`, Markov property
//! checks and the fixed-point algebra.
//!
//! Superoperators act on column-stacked vectorizations of the ambient
//! `D×D` matrices. Restricted operators live in the coordinates of
//! [`TracialAlgebra::basis_isometry`].

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, Subalgebra, TracialAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{
    self, c, choi_matrix, frobenius, hermitian_defect, json::MatrixJson, kron, unvec, vec, CMat, CVec,
    SpectralDecomposition,
};

/// Eigenvalues of ℒ below this magnitude count as zero.
pub const KERNEL_TOL: f64 = 1e-9;
/// Choi positivity tolerance, relative to the Choi trace.
pub const CHOI_TOL: f64 = 1e-9;
/// Superoperator identities (symmetry, invariance).
pub const SUPEROP_TOL: f64 = 1e-10;
/// Largest ambient dimension `D` for which the Choi test runs.
pub const CHOI_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub struct Jump {
    pub weight: f64,
    pub v: CMat,
    v_sq: CMat,
}

impl Jump {
    pub fn new(weight: f64, v: CMat) -> Result<Self> {
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::InvalidGenerator(format!("jump weight {weight} must be positive")));
        }
        if v.nrows() != v.ncols() {
            return Err(Error::DimensionMismatch { expected: v.nrows(), got: v.ncols() });
        }
        let defect = hermitian_defect(&v);
        let max = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if defect > linalg::HERMITIAN_TOL * (1.0 + max) {
            return Err(Error::NotHermitian { asymmetry: defect });
        }
        let v = linalg::hermitian_part(&v);
        let v_sq = &v * &v;
        Ok(Self { weight, v, v_sq })
    }
}

pub struct LindbladGenerator {
    algebra: TracialAlgebra,
    jumps: Vec<Jump>,
    superop: CMat,
    restricted: CMat,
    isometry: CMat,
    spectrum: OnceLock<SpectralDecomposition>,
}

impl Clone for LindbladGenerator {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self {
            algebra: self.algebra.clone(),
            jumps: self.jumps.clone(),
            superop: self.superop.clone(),
            restricted: self.restricted.clone(),
            isometry: self.isometry.clone(),
            spectrum,
        }
    }
}

impl std::fmt::Debug for LindbladGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LindbladGenerator")
            .field("algebra", &self.algebra)
            .field("jumps", &self.jumps.len())
            .finish()
    }
}

impl LindbladGenerator {
    /// Builds the generator and checks that it leaves the algebra invariant.
    pub fn new(algebra: TracialAlgebra, jumps: Vec<Jump>) -> Result<Self> {
        let d = algebra.ambient_dim();
        for j in &jumps {
            if j.v.nrows() != d {
                return Err(Error::DimensionMismatch { expected: d, got: j.v.nrows() });
            }
        }
        let id = CMat::identity(d, d);
        let mut superop = CMat::zeros(d * d, d * d);
        for j in &jumps {
            let term = kron(&id, &j.v_sq) + kron(&j.v_sq.transpose(), &id)
                - kron(&j.v.transpose(), &j.v) * c(2.0);
            superop += term * c(j.weight);
        }
        let (restricted, isometry) = if algebra.is_full() {
            (superop.clone(), CMat::identity(d * d, d * d))
        } else {
            let q = algebra.basis_isometry();
            let sq = &superop * &q;
            let leak = frobenius(&(&sq - &q * (q.adjoint() * &sq)));
            if leak > SUPEROP_TOL * (1.0 + frobenius(&sq)) {
                return Err(Error::InvalidGenerator(format!(
                    "generator does not leave the algebra invariant (leak {leak:.3e})"
                )));
            }
            (q.adjoint() * sq, q)
        };
        Ok(Self { algebra, jumps, superop, restricted, isometry, spectrum: OnceLock::new() })
    }

    pub fn zero(algebra: TracialAlgebra) -> Self {
        Self::new(algebra, vec![]).expect("zero generator")
    }

    /// `ℒ = I − E` for a unital, trace-symmetric, completely positive
    /// projection `E` given as a superoperator on the ambient matrices.
    /// Kraus operators `K = a + ib` of `E` give `E(x) = Σ h x h` over the
    /// Hermitian parts `h`; the jumps are the principal axes of the traceless
    /// parts, so `ℒ = ½ Σ_l [h_l,[h_l,·]]`.
    pub fn from_expectation(algebra: TracialAlgebra, e: &CMat) -> Result<Self> {
        let d = algebra.ambient_dim();
        if e.nrows() != d * d || e.ncols() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: e.nrows() });
        }
        let kraus = linalg::kraus_operators(e, d, 1e-13)?;
        let full = TracialAlgebra::full(d);
        let basis = full.hermitian_basis();
        let unit = CMat::identity(d, d);
        let n = basis.len();
        let mut gram = CMat::zeros(n, n);
        for k in &kraus {
            let a = linalg::hermitian_part(k);
            let b = (k - k.adjoint()) * crate::linalg::C64::new(0.0, -0.5);
            for h in [a, b] {
                let tr = full.trace(&h)?;
                let traceless = h - &unit * tr;
                let coords = CVec::from_iterator(
                    n,
                    basis.iter().map(|e| c(full.gns_inner(e, &traceless).unwrap().re)),
                );
                gram += &coords * coords.transpose();
            }
        }
        let sd = linalg::eig_hermitian(&gram)?;
        let top = sd.max_eigenvalue().max(0.0);
        let mut jumps = Vec::new();
        for (r, &mu) in sd.eigenvalues.iter().enumerate().rev() {
            if mu <= 1e-12 * top.max(1.0) {
                continue;
            }
            let mut g = CMat::zeros(d, d);
            for (i, e) in basis.iter().enumerate() {
                g += e * c(sd.eigenvectors[(i, r)].re);
            }
            // the Gram matrix is real symmetric, so its eigenvectors stay real
            let norm = full.gns_norm(&g);
            jumps.push(Jump::new(0.5 * mu * norm * norm, g / c(norm))?);
        }
        let gen = Self::new(algebra, jumps)?;
        let target = CMat::identity(d * d, d * d) - e;
        let dev = frobenius(&(gen.restricted_ambient() - gen.restrict_ambient(&target)));
        if dev > 1e-9 * (1.0 + frobenius(&target)) {
            return Err(Error::InvalidGenerator(format!(
                "expectation is not symmetric with respect to the trace (deviation {dev:.3e})"
            )));
        }
        Ok(gen)
    }

    fn restricted_ambient(&self) -> CMat {
        &self.isometry * &self.restricted * self.isometry.adjoint()
    }

    fn restrict_ambient(&self, s: &CMat) -> CMat {
        let p = &self.isometry * self.isometry.adjoint();
        &p * s * &p
    }

    pub fn algebra(&self) -> &TracialAlgebra {
        &self.algebra
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn ambient_dim(&self) -> usize {
        self.algebra.ambient_dim()
    }

    pub fn gns_dim(&self) -> usize {
        self.algebra.gns_dim()
    }

    /// Superoperator on the ambient `M_D`.
    pub fn superop(&self) -> &CMat {
        &self.superop
    }

    /// `Q† ℒ Q` on the coordinates of the algebra.
    pub fn restricted(&self) -> &CMat {
        &self.restricted
    }

    pub fn isometry(&self) -> &CMat {
        &self.isometry
    }

    pub fn is_zero(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Coordinates of an element of the algebra.
    pub fn to_coords(&self, x: &CMat) -> CVec {
        if self.algebra.is_full() {
            vec(x)
        } else {
            self.isometry.adjoint() * vec(x)
        }
    }

    pub fn from_coords(&self, v: &CVec) -> CMat {
        let d = self.ambient_dim();
        if self.algebra.is_full() {
            unvec(v, d)
        } else {
            unvec(&(&self.isometry * v), d)
        }
    }

    /// Spectral decomposition of the restricted generator (computed once).
    pub fn spectrum(&self) -> Result<&SpectralDecomposition> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = linalg::eig_hermitian(&self.restricted)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// Matrix `e^{−tℒ}` in algebra coordinates.
    pub fn semigroup_matrix(&self, t: f64) -> Result<CMat> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.spectrum()?.map(|l| (-t * l.max(0.0)).exp()))
    }

    /// `P_t` applied to algebra coordinates.
    pub fn semigroup_coords(&self, t: f64, v: &CVec) -> Result<CVec> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let sd = self.spectrum()?;
        let u = &sd.eigenvectors;
        let mut w = u.adjoint() * v;
        for (k, &l) in sd.eigenvalues.iter().enumerate() {
            w[k] *= (-t * l.max(0.0)).exp();
        }
        Ok(u * w)
    }

    /// `P_t` as a superoperator on the ambient matrices, composed with the
    /// conditional expectation onto the algebra.
    pub fn semigroup_ambient(&self, t: f64) -> Result<CMat> {
        let p = self.semigroup_matrix(t)?;
        if self.algebra.is_full() {
            Ok(p)
        } else {
            Ok(&self.isometry * p * self.isometry.adjoint())
        }
    }

    fn check_dim(&self, x: &CMat) -> Result<()> {
        let d = self.ambient_dim();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.nrows() });
        }
        Ok(())
    }

    /// Matrix-free `ℒx`.
    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        self.check_dim(x)?;
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for j in &self.jumps {
            let vx = &j.v * x;
            out += (&j.v_sq * x + x * &j.v_sq - (&vx * &j.v) * c(2.0)) * c(j.weight);
        }
        Ok(out)
    }

    /// `P_t x` for `x` in the algebra.
    pub fn semigroup_apply(&self, t: f64, x: &CMat) -> Result<CMat> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        self.check_dim(x)?;
        if !self.algebra.contains(x) {
            return Err(Error::InvalidAlgebra("argument is not an element of the algebra".into()));
        }
        Ok(self.from_coords(&self.semigroup_coords(t, &self.to_coords(x))?))
    }

    /// Generator on `M_D ⊗ M_m` with jumps `v_j ⊗ 1`.
    pub fn tensor_identity(&self, m: usize) -> Result<Self> {
        let alg = self.algebra.tensor(&TracialAlgebra::full(m))?;
        let id = CMat::identity(m, m);
        let jumps = self
            .jumps
            .iter()
            .map(|j| Jump::new(j.weight, kron(&j.v, &id)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alg, jumps)
    }

    /// `ℒ₁ ⊗ I + I ⊗ ℒ₂` with jumps `v ⊗ 1` followed by `1 ⊗ w`.
    pub fn tensor_sum(&self, other: &Self) -> Result<Self> {
        let alg = self.algebra.tensor(&other.algebra)?;
        let id1 = CMat::identity(self.ambient_dim(), self.ambient_dim());
        let id2 = CMat::identity(other.ambient_dim(), other.ambient_dim());
        let mut jumps = Vec::new();
        for j in &self.jumps {
            jumps.push(Jump::new(j.weight, kron(&j.v, &id2))?);
        }
        for j in &other.jumps {
            jumps.push(Jump::new(j.weight, kron(&id1, &j.v))?);
        }
        Self::new(alg, jumps)
    }

    pub fn to_json(&self) -> GeneratorJson {
        GeneratorJson {
            algebra: self.algebra.descriptor(),
            jumps: self
                .jumps
                .iter()
                .map(|j| JumpJson { weight: j.weight, v: MatrixJson::from_matrix(&j.v) })
                .collect(),
        }
    }

    pub fn from_json(json: &GeneratorJson) -> Result<Self> {
        let alg = TracialAlgebra::from_descriptor(&json.algebra)?;
        let jumps = json
            .jumps
            .iter()
            .map(|j| Jump::new(j.weight, j.v.to_matrix()?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alg, jumps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpJson {
    pub weight: f64,
    pub v: MatrixJson,
}

/// `{algebra, jumps: [{weight, v}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub algebra: AlgebraDescriptor,
    pub jumps: Vec<JumpJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpSample {
    pub t: f64,
    /// Smallest Choi eigenvalue divided by the Choi trace.
    pub min_eig: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QmsReport {
    pub unitality_residual: f64,
    pub symmetry_residual: f64,
    pub min_generator_eigenvalue: f64,
    pub cp: Vec<CpSample>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Checks `ℒ1 = 0`, GNS self-adjointness, nonnegativity of the spectrum and
/// complete positivity of `P_t` at the sampled times.
pub fn verify_qms(gen: &LindbladGenerator, t_samples: &[f64]) -> Result<QmsReport> {
    let mut failures = Vec::new();
    let unit = gen.algebra().unit();
    let unitality_residual = frobenius(&gen.apply(&unit)?);
    if unitality_residual > SUPEROP_TOL {
        failures.push(format!("unitality: ‖ℒ1‖ = {unitality_residual:.3e}"));
    }
    let r = gen.restricted();
    let symmetry_residual = frobenius(&(r - r.adjoint())) / (1.0 + frobenius(r));
    if symmetry_residual > SUPEROP_TOL {
        failures.push(format!("symmetry: relative asymmetry {symmetry_residual:.3e}"));
    }
    let min_generator_eigenvalue = gen.spectrum()?.min_eigenvalue();
    if min_generator_eigenvalue < -KERNEL_TOL {
        failures.push(format!("spectrum: eigenvalue {min_generator_eigenvalue:.3e} < 0"));
    }
    let d = gen.ambient_dim();
    let mut cp = Vec::new();
    if d <= CHOI_CAP {
        for &t in t_samples {
            let choi = choi_matrix(&gen.semigroup_ambient(t)?, d);
            let tr = choi.trace().re;
            let min = linalg::eig_hermitian(&choi)?.min_eigenvalue() / tr;
            if min < -CHOI_TOL {
                failures.push(format!("complete positivity at t = {t}: Choi eigenvalue {min:.3e}"));
            }
            cp.push(CpSample { t, min_eig: min });
        }
    }
    let pass = failures.is_empty();
    Ok(QmsReport { unitality_residual, symmetry_residual, min_generator_eigenvalue, cp, failures, pass })
}

#[derive(Clone, Debug)]
pub struct FixedPoints {
    pub subalgebra: Subalgebra,
    /// Smallest nonzero eigenvalue of ℒ, if any.
    pub spectral_gap: Option<f64>,
}

/// `ker ℒ` as a subalgebra together with the spectral gap.
pub fn fixed_point_algebra(gen: &LindbladGenerator) -> Result<FixedPoints> {
    let sd = gen.spectrum()?;
    let mut kernel = Vec::new();
    let mut gap = None;
    for (k, &l) in sd.eigenvalues.iter().enumerate() {
        if l.abs() < KERNEL_TOL {
            kernel.push(gen.from_coords(&sd.eigenvectors.column(k).into_owned()));
        } else if l > 0.0 && gap.is_none() {
            gap = Some(l);
        }
    }
    let subalgebra = Subalgebra::from_spanning(gen.ambient_dim(), &kernel)?;
    Ok(FixedPoints { subalgebra, spectral_gap: gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Block;
    use crate::linalg::{random_complex, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(vals: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&v| c(v))))
    }

    fn projection_m2() -> LindbladGenerator {
        LindbladGenerator::new(TracialAlgebra::full(2), vec![Jump::new(1.0, diag(&[1.0, 0.0])).unwrap()]).unwrap()
    }

    fn depolarizing(d: usize) -> LindbladGenerator {
        let e = Subalgebra::scalars(d).conditional_expectation();
        LindbladGenerator::from_expectation(TracialAlgebra::full(d), &e).unwrap()
    }

    fn e12() -> CMat {
        linalg::matrix_unit(2, 0, 1)
    }

    #[test]
    fn projection_examples() {
        let g = projection_m2();
        assert!(frobenius(&(g.apply(&e12()).unwrap() - e12())) < 1e-15);
        assert!(frobenius(&g.apply(&CMat::identity(2, 2)).unwrap()) < 1e-15);
        let p1 = g.semigroup_apply(1.0, &e12()).unwrap();
        assert!(frobenius(&(p1 - e12() * c((-1.0f64).exp()))) < 1e-12);
    }

    #[test]
    fn double_commutator_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let v1 = random_hermitian(&mut rng, 3);
        let v2 = random_hermitian(&mut rng, 3);
        let g = LindbladGenerator::new(
            TracialAlgebra::full(3),
            vec![Jump::new(0.7, v1.clone()).unwrap(), Jump::new(1.3, v2.clone()).unwrap()],
        )
        .unwrap();
        for _ in 0..50 {
            let x = random_complex(&mut rng, 3, 3);
            let dc = |v: &CMat| linalg::commutator(v, &linalg::commutator(v, &x));
            let expected = dc(&v1) * c(0.7) + dc(&v2) * c(1.3);
            let got = g.apply(&x).unwrap();
            assert!(frobenius(&(&got - expected)) < 1e-12);
            let via_superop = unvec(&(g.superop() * vec(&x)), 3);
            assert!(frobenius(&(got - via_superop)) < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_jump_rejected() {
        assert!(matches!(Jump::new(1.0, e12()), Err(Error::NotHermitian { .. })));
        assert!(Jump::new(0.0, diag(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn negative_time_rejected() {
        assert!(matches!(projection_m2().semigroup_apply(-1.0, &e12()), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn semigroup_basics() {
        let g = depolarizing(3);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let x = random_complex(&mut rng, 3, 3);
        assert!(frobenius(&(g.semigroup_apply(0.0, &x).unwrap() - &x)) < 1e-12);
        let ps = g.semigroup_matrix(0.3).unwrap();
        let pt = g.semigroup_matrix(0.5).unwrap();
        let pst = g.semigroup_matrix(0.8).unwrap();
        assert!(frobenius(&(ps * pt - pst)) < 1e-9);
        let one = g.semigroup_apply(2.0, &CMat::identity(3, 3)).unwrap();
        assert!(frobenius(&(one - CMat::identity(3, 3))) < 1e-12);
        let y = g.semigroup_apply(1.1, &x).unwrap();
        assert!((y.trace() - x.trace()).norm() < 1e-12);
    }

    #[test]
    fn expectation_generator_semigroup_formula() {
        let e_n = Subalgebra::diagonal(2);
        let e = e_n.conditional_expectation();
        let g = LindbladGenerator::from_expectation(TracialAlgebra::full(2), &e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for &t in &[0.1, 0.7, 2.5] {
            let x = random_complex(&mut rng, 2, 2);
            let a = (-t as f64).exp();
            let expected = &x * c(a) + e_n.apply(&x) * c(1.0 - a);
            assert!(frobenius(&(g.semigroup_apply(t, &x).unwrap() - expected)) < 1e-12);
        }
    }

    #[test]
    fn depolarizing_m2_jumps_are_scaled_paulis() {
        let g = depolarizing(2);
        assert_eq!(g.jumps().len(), 3);
        for j in g.jumps() {
            assert!((j.weight - 0.125).abs() < 1e-12);
            let sq = &j.v * &j.v;
            assert!(frobenius(&(sq - CMat::identity(2, 2))) < 1e-12);
            assert!(j.v.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_fixed_points_and_gap() {
        for d in [2, 3] {
            let fp = fixed_point_algebra(&depolarizing(d)).unwrap();
            assert_eq!(fp.subalgebra.dim(), 1);
            assert!((fp.spectral_gap.unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_fixed_points() {
        let fp = fixed_point_algebra(&projection_m2()).unwrap();
        assert_eq!(fp.subalgebra.dim(), 2);
        assert!(fp.subalgebra.contains(&diag(&[1.0, 0.0])));
        assert!(fp.subalgebra.contains(&diag(&[0.0, 1.0])));
        assert!((fp.spectral_gap.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_generator() {
        let g = LindbladGenerator::zero(TracialAlgebra::full(2));
        let rep = verify_qms(&g, &[0.5, 1.0]).unwrap();
        assert!(rep.pass);
        assert!(frobenius(&(g.semigroup_matrix(3.0).unwrap() - CMat::identity(4, 4))) < 1e-15);
        let fp = fixed_point_algebra(&g).unwrap();
        assert_eq!(fp.subalgebra.dim(), 4);
        assert!(fp.spectral_gap.is_none());
    }

    #[test]
    fn commuting_projections_m4_verify() {
        let g = LindbladGenerator::new(
            TracialAlgebra::full(4),
            vec![
                Jump::new(1.0, diag(&[0.0, 1.0, 0.0, 1.0])).unwrap(),
                Jump::new(1.0, diag(&[0.0, 0.0, 1.0, 1.0])).unwrap(),
            ],
        )
        .unwrap();
        let rep = verify_qms(&g, &[0.1, 1.0, 5.0]).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
    }

    #[test]
    fn non_cp_semigroup_detected() {
        // x ↦ x - transpose-like: a Hermitian, unital, but not a Lindbladian of our form.
        let mut g = projection_m2();
        let swap = linalg::superop_matrix(2, |x| x.transpose()).unwrap();
        g.restricted = CMat::identity(4, 4) - swap;
        g.spectrum = OnceLock::new();
        let rep = verify_qms(&g, &[0.5]).unwrap();
        assert!(!rep.pass);
        assert!(rep.failures.iter().any(|f| f.contains("complete positivity")));
    }

    #[test]
    fn block_algebra_invariance() {
        let alg = TracialAlgebra::from_blocks(vec![
            Block { dim: 1, multiplicity: 1 },
            Block { dim: 1, multiplicity: 3 },
        ])
        .unwrap();
        let e = Subalgebra::scalars(4).conditional_expectation();
        let g = LindbladGenerator::from_expectation(alg.clone(), &e).unwrap();
        assert_eq!(g.restricted().nrows(), 2);
        let rep = verify_qms(&g, &[0.3]).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
        let x = diag(&[2.0, 1.0, 1.0, 1.0]);
        let y = g.semigroup_apply(1.0, &x).unwrap();
        assert!(alg.contains(&y));
        assert!((alg.trace(&y).unwrap() - alg.trace(&x).unwrap()).norm() < 1e-12);
        // a jump mixing the blocks without respecting the multiplicity is rejected
        let bad = CMat::from_fn(4, 4, |i, j| if (i, j) == (0, 1) || (i, j) == (1, 0) { c(1.0) } else { c(0.0) });
        assert!(LindbladGenerator::new(alg, vec![Jump::new(1.0, bad).unwrap()]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = depolarizing(2);
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let back = LindbladGenerator::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert!(frobenius(&(back.superop() - g.superop())) < 1e-15);
    }

    #[test]
    fn tensor_sum_adds_generators() {
        let a = projection_m2();
        let b = depolarizing(2);
        let ab = a.tensor_sum(&b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let x = random_complex(&mut rng, 2, 2);
        let y = random_complex(&mut rng, 2, 2);
        let lhs = ab.apply(&kron(&x, &y)).unwrap();
        let rhs = kron(&a.apply(&x).unwrap(), &y) + kron(&x, &b.apply(&y).unwrap());
        assert!(frobenius(&(lhs - rhs)) < 1e-12);
    }
}
