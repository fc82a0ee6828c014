//! Seeded density samplers and the Cholesky parametrization used by the
//! local searches.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{DensityOperator, TracialAlgebra};
use crate::error::Result;
use crate::linalg::{c, kron, random_complex, C64, CMat};

/// Smoothing applied to rank-deficient samples.
pub const LOW_RANK_SMOOTHING: f64 = 1e-6;

/// Independent RNG stream for sample `index` under `seed`, so parallel sweeps
/// do not depend on scheduling.
pub fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Trace,
    Wishart,
    LowRank,
    Product,
    Entangled,
}

/// `G G† / τ(G G†)` with Gaussian `G` in every block.
pub fn wishart(alg: &TracialAlgebra, rng: &mut impl Rng) -> Result<DensityOperator> {
    let parts: Vec<CMat> = alg
        .blocks()
        .iter()
        .map(|b| {
            let g = random_complex(rng, b.dim, b.dim);
            &g * g.adjoint()
        })
        .collect();
    DensityOperator::normalized(alg, alg.embed_blocks(&parts)?)
}

/// Rank-deficient sample (random rank per block, at least one nonzero block)
/// mixed with `smoothing` times the trace state.
pub fn low_rank(alg: &TracialAlgebra, rng: &mut impl Rng, smoothing: f64) -> Result<DensityOperator> {
    let blocks = alg.blocks();
    let total: usize = blocks.iter().map(|b| b.dim).sum();
    let mut ranks: Vec<usize> = blocks.iter().map(|b| rng.random_range(0..=b.dim)).collect();
    if ranks.iter().sum::<usize>() == total && total > 1 {
        let i = rng.random_range(0..ranks.len());
        ranks[i] -= 1;
    }
    if ranks.iter().all(|&r| r == 0) {
        let i = rng.random_range(0..ranks.len());
        ranks[i] = 1;
    }
    let parts: Vec<CMat> = blocks
        .iter()
        .zip(&ranks)
        .map(|(b, &r)| {
            if r == 0 {
                CMat::zeros(b.dim, b.dim)
            } else {
                let g = random_complex(rng, b.dim, r);
                &g * g.adjoint()
            }
        })
        .collect();
    let rho = DensityOperator::normalized(alg, alg.embed_blocks(&parts)?)?;
    smooth(alg, &rho, smoothing)
}

/// `(1 − ε)ρ + ε·1`.
pub fn smooth(alg: &TracialAlgebra, rho: &DensityOperator, eps: f64) -> Result<DensityOperator> {
    DensityOperator::normalized(alg, rho.matrix() * c(1.0 - eps) + alg.unit() * c(eps))
}

/// `ρ₁ ⊗ ρ₂` of two Wishart samples on `M_{d1} ⊗ M_{d2}`.
pub fn product_state(d1: usize, d2: usize, rng: &mut impl Rng) -> Result<DensityOperator> {
    let a = wishart(&TracialAlgebra::full(d1), rng)?;
    let b = wishart(&TracialAlgebra::full(d2), rng)?;
    DensityOperator::normalized(&TracialAlgebra::full(d1 * d2), kron(a.matrix(), b.matrix()))
}

/// A maximally entangled vector state, rotated by a random local unitary on
/// the first factor and smoothed.
pub fn entangled_state(d1: usize, d2: usize, rng: &mut impl Rng, smoothing: f64) -> Result<DensityOperator> {
    let k = d1.min(d2);
    let mut omega = CMat::zeros(d1 * d2, 1);
    for i in 0..k {
        omega[(i * d2 + i, 0)] = c(1.0);
    }
    let h = crate::linalg::random_hermitian(rng, d1);
    let u = crate::linalg::eig_hermitian(&h)?.eigenvectors;
    let local = kron(&u, &CMat::identity(d2, d2));
    let psi = local * omega;
    let alg = TracialAlgebra::full(d1 * d2);
    let rho = DensityOperator::normalized(&alg, &psi * psi.adjoint())?;
    smooth(&alg, &rho, smoothing)
}

/// Draws sample `index` of a sweep: index 0 is the trace state; afterwards 70%
/// Wishart, 20% smoothed low rank, and 10% product or entangled states when a
/// tensor split `(d1, d2)` is supplied (otherwise Wishart).
pub fn mixed_sample(
    alg: &TracialAlgebra,
    seed: u64,
    index: u64,
    tensor_split: Option<(usize, usize)>,
) -> Result<(SampleKind, DensityOperator)> {
    if index == 0 {
        return Ok((SampleKind::Trace, DensityOperator::identity(alg)));
    }
    let mut rng = point_rng(seed, index);
    let u: f64 = rng.random();
    if u < 0.7 {
        Ok((SampleKind::Wishart, wishart(alg, &mut rng)?))
    } else if u < 0.9 {
        Ok((SampleKind::LowRank, low_rank(alg, &mut rng, LOW_RANK_SMOOTHING)?))
    } else if let Some((d1, d2)) = tensor_split {
        if rng.random::<bool>() {
            Ok((SampleKind::Product, product_state(d1, d2, &mut rng)?))
        } else {
            Ok((SampleKind::Entangled, entangled_state(d1, d2, &mut rng, LOW_RANK_SMOOTHING)?))
        }
    } else {
        Ok((SampleKind::Wishart, wishart(alg, &mut rng)?))
    }
}

/// Number of real parameters of [`from_cholesky`].
pub fn cholesky_param_count(alg: &TracialAlgebra) -> usize {
    alg.gns_dim()
}

/// Density `L L† / τ(L L†)` with block lower-triangular `L`: per block, `n`
/// real diagonal entries then the real and imaginary parts of the strictly
/// lower entries, column by column.
pub fn from_cholesky(alg: &TracialAlgebra, params: &[f64]) -> Result<DensityOperator> {
    assert_eq!(params.len(), cholesky_param_count(alg));
    let mut it = params.iter().copied();
    let parts: Vec<CMat> = alg
        .blocks()
        .iter()
        .map(|b| {
            let n = b.dim;
            let mut l = CMat::zeros(n, n);
            for i in 0..n {
                l[(i, i)] = c(it.next().unwrap());
            }
            for j in 0..n {
                for i in (j + 1)..n {
                    let re = it.next().unwrap();
                    let im = it.next().unwrap();
                    l[(i, j)] = C64::new(re, im);
                }
            }
            &l * l.adjoint()
        })
        .collect();
    DensityOperator::normalized(alg, alg.embed_blocks(&parts)?)
}

/// Cholesky parameters of a positive definite density (inverse of [`from_cholesky`]
/// up to normalization).
pub fn to_cholesky(alg: &TracialAlgebra, rho: &DensityOperator) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(alg.gns_dim());
    for part in alg.block_parts(rho.matrix()) {
        let n = part.nrows();
        let chol = nalgebra::Cholesky::new(part)?;
        let l = chol.l();
        for i in 0..n {
            out.push(l[(i, i)].re);
        }
        for j in 0..n {
            for i in (j + 1)..n {
                out.push(l[(i, j)].re);
                out.push(l[(i, j)].im);
            }
        }
    }
    Some(out)
}
