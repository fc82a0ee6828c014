//! Dense complex linear algebra: Hermitian eigendecompositions, matrix
//! functions, positivity tests and superoperator matrices.
//!
//! Superoperators act on column-stacked vectorizations: for a `d×d` matrix
//! `x`, `vec(x)[i + j d] = x[(i, j)]`. This matches the column-major storage
//! of [`CMat`], so `vec` is a copy of the underlying slice. With this order,
//! `vec(a x b) = (bᵀ ⊗ a) vec(x)`.

mod jacobi;
pub mod json;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub use jacobi::{jacobi_eigh, SpectralDecomposition, MAX_SWEEPS, OFF_DIAGONAL_THRESHOLD};
pub use nalgebra::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const EQ_TOL: f64 = 1e-10;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A square matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Validates Hermiticity within `1e-12 · (1 + max|entry|)`.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidAlgebra("empty matrix".into()));
        }
        let asym = hermitian_defect(&m);
        let max_entry = m.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if asym > HERMITIAN_TOL * (1.0 + max_entry) {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(Self(hermitian_part(&m)))
    }

    /// `(m + m†) / 2`, no validation.
    pub fn symmetrized(m: &CMat) -> Self {
        Self(hermitian_part(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        jacobi_eigh(&self.0)
    }
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

/// Largest entry of `|m - m†|`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut d = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative Frobenius distance `‖a - b‖ / (1 + ‖b‖)`.
pub fn rel_dist(a: &CMat, b: &CMat) -> f64 {
    frobenius(&(a - b)) / (1.0 + frobenius(b))
}

/// Eigen-decomposition of the Hermitian part of `a`.
pub fn eig_hermitian(a: &CMat) -> Result<SpectralDecomposition> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    jacobi_eigh(&hermitian_part(a))
}

/// `U diag(f(λ)) U†`; `f` returns `None` where it is undefined.
pub fn matrix_function(a: &CMat, f: impl Fn(f64) -> Option<f64>) -> Result<CMat> {
    let sd = eig_hermitian(a)?;
    let mut values = Vec::with_capacity(sd.dim());
    for &l in &sd.eigenvalues {
        values.push(f(l).ok_or(Error::Domain { eigenvalue: l })?);
    }
    Ok(sd.with_values(&values))
}

/// Positivity test: true iff `λ_min ≥ -tol · (1 + ‖A‖)`. Always returns `λ_min`.
pub fn psd_check(a: &CMat, tol: f64) -> Result<(bool, f64)> {
    let sd = eig_hermitian(a)?;
    let min = sd.min_eigenvalue();
    Ok((min >= -tol * (1.0 + sd.spectral_norm()), min))
}

pub fn vec(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVec, dim: usize) -> CMat {
    assert_eq!(v.len(), dim * dim, "vector length is not a square");
    CMat::from_column_slice(dim, dim, v.as_slice())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Superoperator of `x ↦ a x`.
pub fn left_mult(a: &CMat) -> CMat {
    kron(&CMat::identity(a.nrows(), a.nrows()), a)
}

/// Superoperator of `x ↦ x b`.
pub fn right_mult(b: &CMat) -> CMat {
    kron(&b.transpose(), &CMat::identity(b.nrows(), b.nrows()))
}

/// Superoperator of `x ↦ a x b`.
pub fn sandwich(a: &CMat, b: &CMat) -> CMat {
    kron(&b.transpose(), a)
}

/// Matrix unit `e_{ij}` of size `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = c(1.0);
    m
}

/// Standard complex Gaussian matrix (real and imaginary parts `N(0, 1/2)`).
pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(s * re, s * im)
    })
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> CMat {
    hermitian_part(&random_complex(rng, d, d))
}

/// Matrix of a linear map on `dim×dim` matrices: column `k` is the
/// vectorized image of the `k`-th matrix unit. Linearity is spot-checked on
/// random inputs.
pub fn superop_matrix(dim: usize, mut action: impl FnMut(&CMat) -> CMat) -> Result<CMat> {
    let n = dim * dim;
    let mut s = CMat::zeros(n, n);
    for k in 0..n {
        let image = action(&matrix_unit(dim, k % dim, k / dim));
        if image.nrows() != dim || image.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: image.nrows() });
        }
        s.set_column(k, &vec(&image));
    }
    // Fixed-seed linearity probe.
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..2 {
        let x = random_complex(&mut rng, dim, dim);
        let direct = vec(&action(&x));
        let via_matrix = &s * vec(&x);
        let dev = (&direct - &via_matrix).norm() / (1.0 + direct.norm());
        if dev > EQ_TOL {
            return Err(Error::NotLinear { deviation: dev });
        }
    }
    Ok(s)
}

/// Identity superoperator on `dim×dim` matrices.
pub fn superop_identity(dim: usize) -> CMat {
    CMat::identity(dim * dim, dim * dim)
}

/// Trace of a square matrix.
pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Choi matrix `Σ_{kl} e_{kl} ⊗ Φ(e_{kl})` of a superoperator on `dim×dim` matrices.
pub fn choi_matrix(superop: &CMat, dim: usize) -> CMat {
    let n = dim * dim;
    let mut choi = CMat::zeros(n, n);
    for k in 0..dim {
        for l in 0..dim {
            let col = superop.column(k + l * dim);
            // block (k, l) of size dim×dim holds Φ(e_kl)
            for j in 0..dim {
                for i in 0..dim {
                    choi[(k * dim + i, l * dim + j)] = col[i + j * dim];
                }
            }
        }
    }
    choi
}

/// Kraus operators of a completely positive map from its Choi matrix.
/// Eigenvalues below `tol · λ_max` are dropped.
pub fn kraus_operators(superop: &CMat, dim: usize, tol: f64) -> Result<Vec<CMat>> {
    let choi = choi_matrix(superop, dim);
    let sd = eig_hermitian(&choi)?;
    let top = sd.max_eigenvalue().max(0.0);
    if sd.min_eigenvalue() < -1e-9 * (1.0 + top) {
        return Err(Error::NotPositive { eigenvalue: sd.min_eigenvalue() });
    }
    let mut out = Vec::new();
    for (r, &mu) in sd.eigenvalues.iter().enumerate() {
        if mu <= tol * top {
            continue;
        }
        let w = sd.eigenvectors.column(r);
        // Choi block structure: entry (k*dim + i) of w is K[(i, k)].
        let k = CMat::from_fn(dim, dim, |i, kk| w[kk * dim + i] * mu.sqrt());
        out.push(k);
    }
    Ok(out)
}
