//! First-order calculus of a Lindblad generator: derivations
//! `∂_j x = √c_j [v_j, x]` into the direct sum `H = ⊕_j L²(M_D)`, the left and
//! right actions, the involution `J` and the carré du champ.
//!
//! In finite dimension every mean is regular and every derivation is
//! Γ-regular, so none of this is checked at runtime.

use crate::error::{Error, Result};
use crate::linalg::{c, kron, C64, CMat};
use crate::qms::LindbladGenerator;

/// Element of `H`, one ambient matrix per jump.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub components: Vec<CMat>,
}

impl TangentVector {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self { components: vec![CMat::zeros(d, d); n] }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// `⟨ξ, η⟩_H = Σ_j τ(ξ_j† η_j)` with the normalized ambient trace.
    pub fn inner(&self, other: &Self) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        let mut d = 1;
        for (a, b) in self.components.iter().zip(&other.components) {
            d = a.nrows();
            s += a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<C64>();
        }
        s / d as f64
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).re
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { components: self.components.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { components: self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { components: self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect() }
    }
}

#[derive(Clone, Debug)]
pub struct TangentModule {
    dim: usize,
    /// `(√c_j, v_j)`
    parts: Vec<(f64, CMat)>,
}

impl TangentModule {
    pub fn new(gen: &LindbladGenerator) -> Self {
        let parts = gen.jumps().iter().map(|j| (j.weight.sqrt(), j.v.clone())).collect();
        Self { dim: gen.ambient_dim(), parts }
    }

    pub fn components(&self) -> usize {
        self.parts.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn check(&self, x: &CMat) -> Result<()> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.nrows() });
        }
        Ok(())
    }

    pub fn partial_apply(&self, j: usize, x: &CMat) -> Result<CMat> {
        self.check(x)?;
        let (s, v) = self.parts.get(j).ok_or(Error::IndexOutOfRange { index: j, len: self.parts.len() })?;
        Ok((v * x - x * v) * c(*s))
    }

    pub fn derivative(&self, x: &CMat) -> Result<TangentVector> {
        self.check(x)?;
        let components = self.parts.iter().map(|(s, v)| (v * x - x * v) * c(*s)).collect();
        Ok(TangentVector { components })
    }

    /// `∂†ξ = Σ_j √c_j [v_j, ξ_j]`; the commutator with a self-adjoint
    /// element is self-adjoint in the GNS inner product.
    pub fn adjoint_apply(&self, xi: &TangentVector) -> Result<CMat> {
        if xi.len() != self.parts.len() {
            return Err(Error::DimensionMismatch { expected: self.parts.len(), got: xi.len() });
        }
        let mut out = CMat::zeros(self.dim, self.dim);
        for ((s, v), x) in self.parts.iter().zip(&xi.components) {
            self.check(x)?;
            out += (v * x - x * v) * c(*s);
        }
        Ok(out)
    }

    /// Superoperator of `∂_j` on the ambient matrices.
    pub fn derivation_superop(&self, j: usize) -> Result<CMat> {
        let (s, v) = self.parts.get(j).ok_or(Error::IndexOutOfRange { index: j, len: self.parts.len() })?;
        let id = CMat::identity(self.dim, self.dim);
        Ok((kron(&id, v) - kron(&v.transpose(), &id)) * c(*s))
    }

    /// The stacked map `D: L²(M_D) → H` as an `n D² × D²` matrix.
    pub fn stacked(&self) -> CMat {
        let d2 = self.dim * self.dim;
        let mut out = CMat::zeros(self.parts.len() * d2, d2);
        for j in 0..self.parts.len() {
            out.view_mut((j * d2, 0), (d2, d2)).copy_from(&self.derivation_superop(j).unwrap());
        }
        out
    }

    /// `Γ(x, y) = Σ_j (∂_j x)† ∂_j y`.
    pub fn gamma(&self, x: &CMat, y: &CMat) -> Result<CMat> {
        let dx = self.derivative(x)?;
        let dy = self.derivative(y)?;
        Ok(self.gamma_pair(&dx, &dy))
    }

    fn gamma_pair(&self, xi: &TangentVector, eta: &TangentVector) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (a, b) in xi.components.iter().zip(&eta.components) {
            out += a.adjoint() * b;
        }
        out
    }

    /// `Γ(ξ) = Σ_j ξ_j† ξ_j`.
    pub fn gamma_vec(&self, xi: &TangentVector) -> CMat {
        self.gamma_pair(xi, xi)
    }

    pub fn left_apply(&self, a: &CMat, xi: &TangentVector) -> TangentVector {
        TangentVector { components: xi.components.iter().map(|x| a * x).collect() }
    }

    pub fn right_apply(&self, a: &CMat, xi: &TangentVector) -> TangentVector {
        TangentVector { components: xi.components.iter().map(|x| x * a).collect() }
    }

    /// Block-diagonal superoperator of `L(a)` on `H`.
    pub fn left_superop(&self, a: &CMat) -> CMat {
        self.block_diagonal(&kron(&CMat::identity(self.dim, self.dim), a))
    }

    /// Block-diagonal superoperator of `R(a)` on `H`.
    pub fn right_superop(&self, a: &CMat) -> CMat {
        self.block_diagonal(&kron(&a.transpose(), &CMat::identity(self.dim, self.dim)))
    }

    /// `I_n ⊗ block`.
    pub fn block_diagonal(&self, block: &CMat) -> CMat {
        let b = block.nrows();
        let n = self.parts.len();
        let mut out = CMat::zeros(n * b, n * b);
        for j in 0..n {
            out.view_mut((j * b, j * b), (b, b)).copy_from(block);
        }
        out
    }

    /// `J ξ = (ξ_j†)_j`.
    pub fn involution(&self, xi: &TangentVector) -> TangentVector {
        TangentVector { components: xi.components.iter().map(|x| x.adjoint()).collect() }
    }

    /// Splits a stacked vector of length `n D²` into a tangent vector.
    pub fn unstack(&self, v: &crate::linalg::CVec) -> TangentVector {
        let d2 = self.dim * self.dim;
        let components = (0..self.parts.len())
            .map(|j| crate::linalg::unvec(&v.rows(j * d2, d2).into_owned(), self.dim))
            .collect();
        TangentVector { components }
    }

    pub fn stack(&self, xi: &TangentVector) -> crate::linalg::CVec {
        let d2 = self.dim * self.dim;
        let mut v = crate::linalg::CVec::zeros(self.parts.len() * d2);
        for (j, x) in xi.components.iter().enumerate() {
            v.rows_mut(j * d2, d2).copy_from(&crate::linalg::vec(x));
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Subalgebra, TracialAlgebra};
    use crate::linalg::{frobenius, psd_check, random_complex, random_hermitian, vec, CVec};
    use crate::qms::Jump;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_generator(seed: u64, d: usize, n: usize) -> LindbladGenerator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jumps = (0..n)
            .map(|k| Jump::new(0.5 + k as f64, random_hermitian(&mut rng, d)).unwrap())
            .collect();
        LindbladGenerator::new(TracialAlgebra::full(d), jumps).unwrap()
    }

    fn gns(x: &CMat, y: &CMat) -> C64 {
        x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() / x.nrows() as f64
    }

    #[test]
    fn commuting_input_has_zero_derivative() {
        let g = random_generator(31, 3, 2);
        let m = TangentModule::new(&g);
        let d = m.derivative(&CMat::identity(3, 3)).unwrap();
        assert!(d.norm_sq() < 1e-28);
    }

    #[test]
    fn projection_commutator() {
        let p = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0)]));
        let g = LindbladGenerator::new(TracialAlgebra::full(2), vec![Jump::new(1.0, p).unwrap()]).unwrap();
        let m = TangentModule::new(&g);
        let e12 = crate::linalg::matrix_unit(2, 0, 1);
        assert_eq!(m.partial_apply(0, &e12).unwrap(), e12);
        assert!(matches!(m.partial_apply(1, &e12), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn dirichlet_form_and_gamma_trace() {
        let g = random_generator(32, 3, 3);
        let m = TangentModule::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..50 {
            let x = random_complex(&mut rng, 3, 3);
            let dx = m.derivative(&x).unwrap();
            let form = gns(&x, &g.apply(&x).unwrap());
            assert!((c(dx.norm_sq()) - form).norm() < 1e-11);
            let gam = m.gamma(&x, &x).unwrap();
            assert!((gam.trace() / 3.0 - form).norm() < 1e-11);
            assert_eq!(m.gamma_vec(&dx), gam);
            assert!(psd_check(&gam, 1e-10).unwrap().0);
            let z = random_complex(&mut rng, 3, 3);
            let lhs = (&z * &gam).trace() / 3.0;
            let rhs = dx.inner(&m.right_apply(&z, &dx));
            assert!((lhs - rhs).norm() < 1e-11);
        }
    }

    #[test]
    fn stacked_derivation_reproduces_generator() {
        let g = random_generator(34, 3, 2);
        let m = TangentModule::new(&g);
        let d = m.stacked();
        assert!(frobenius(&(d.adjoint() * &d - g.superop())) < 1e-10);
        let e = Subalgebra::scalars(2).conditional_expectation();
        let dep = LindbladGenerator::from_expectation(TracialAlgebra::full(2), &e).unwrap();
        let dm = TangentModule::new(&dep).stacked();
        assert!(frobenius(&(dm.adjoint() * &dm - dep.superop())) < 1e-10);
    }

    #[test]
    fn adjoint_matches_superop() {
        let g = random_generator(35, 2, 2);
        let m = TangentModule::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let xi = TangentVector { components: vec![random_complex(&mut rng, 2, 2), random_complex(&mut rng, 2, 2)] };
        let direct = vec(&m.adjoint_apply(&xi).unwrap());
        let via = m.stacked().adjoint() * m.stack(&xi);
        assert!((direct - via).norm() < 1e-12);
        assert_eq!(m.unstack(&m.stack(&xi)), xi);
    }

    #[test]
    fn actions_and_involution() {
        let g = random_generator(37, 2, 2);
        let m = TangentModule::new(&g);
        let id = CMat::identity(2, 2);
        assert_eq!(m.left_superop(&id), CMat::identity(8, 8));
        assert_eq!(m.right_superop(&id), CMat::identity(8, 8));
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let a = random_complex(&mut rng, 2, 2);
        let b = random_complex(&mut rng, 2, 2);
        let la = m.left_superop(&a);
        let rb = m.right_superop(&b);
        assert!(frobenius(&(&la * &rb - &rb * &la)) < 1e-12);
        let xi = TangentVector { components: vec![random_complex(&mut rng, 2, 2), random_complex(&mut rng, 2, 2)] };
        assert_eq!(m.involution(&m.involution(&xi)), xi);
        // J L(a) J = R(a†)
        let lhs = m.involution(&m.left_apply(&a, &m.involution(&xi)));
        let rhs = m.right_apply(&a.adjoint(), &xi);
        assert!(lhs.sub(&rhs).norm_sq() < 1e-24);
        // commutator derivations are anti-Hermitian: J ∂x = −∂(x†)
        let x = random_complex(&mut rng, 2, 2);
        let jdx = m.involution(&m.derivative(&x).unwrap());
        assert!(jdx.add(&m.derivative(&x.adjoint()).unwrap()).norm_sq() < 1e-24);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn leibniz_rule(seed in any::<u64>()) {
            let g = random_generator(39, 3, 2);
            let m = TangentModule::new(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_complex(&mut rng, 3, 3);
            let y = random_complex(&mut rng, 3, 3);
            let lhs = m.derivative(&(&x * &y)).unwrap();
            let rhs = m.left_apply(&x, &m.derivative(&y).unwrap())
                .add(&m.right_apply(&y, &m.derivative(&x).unwrap()));
            let scale = 1.0 + frobenius(&x) * frobenius(&y);
            prop_assert!(lhs.sub(&rhs).norm_sq().sqrt() <= 1e-10 * scale);
        }
    }
}
