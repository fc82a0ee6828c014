//! For the right mean, `‖∂a‖²_ρ = τ(ρ Γ(a))`, so GE at every density is the
//! matrix inequality `Γ(P_t a) ≤ e^{−2Kt} P_t Γ(a)`. Both are evaluated on
//! the same samples and their verdicts compared.

use serde::{Deserialize, Serialize};

use super::{ge_form_value, GeContext};
use crate::algebra::DensityOperator;
use crate::calculus::TangentModule;
use crate::error::{Error, Result};
use crate::linalg::{self, c};
use crate::means::OperatorMean;
use crate::qms::LindbladGenerator;
use crate::sampling;

/// Weight of the trace state mixed into the witness density.
const WITNESS_SMOOTHING: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BakryEmeryReport {
    #[serde(rename = "K")]
    pub k: f64,
    pub be_min_margin: f64,
    pub ge_min_margin: f64,
    pub be_pass: bool,
    pub ge_pass: bool,
    /// Every sample gave the same verdict in both formulations.
    pub agree: bool,
    pub samples: usize,
}

/// Compares both formulations on `samples` random `a` and every `t`. The GE
/// side is evaluated in direction `a` at a density concentrated on the
/// eigenvector attaining the Bakry–Émery margin.
pub fn bakry_emery_cross_check(
    gen: &LindbladGenerator,
    k: f64,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<BakryEmeryReport> {
    if !gen.algebra().is_full() {
        return Err(Error::Unsupported("Bakry–Émery cross-check needs a full matrix algebra".into()));
    }
    let d = gen.ambient_dim();
    let module = TangentModule::new(gen);
    let ctx = GeContext::new(gen, OperatorMean::Right);
    let alg = gen.algebra();
    let mut be_min = f64::INFINITY;
    let mut ge_min = f64::INFINITY;
    let mut agree = true;
    for s in 0..samples {
        let mut rng = sampling::point_rng(seed, s as u64);
        let a = linalg::random_complex(&mut rng, d, d);
        let gamma_a = module.gamma(&a, &a)?;
        for &t in t_grid {
            let pa = gen.semigroup_apply(t, &a)?;
            let lhs = module.gamma(&pa, &pa)?;
            let rhs = gen.semigroup_apply(t, &linalg::hermitian_part(&gamma_a))? * c((-2.0 * k * t).exp());
            let sd = linalg::eig_hermitian(&linalg::hermitian_part(&(rhs - lhs)))?;
            let be = sd.min_eigenvalue();
            let v = sd.eigenvectors.column(0).into_owned();
            let witness = DensityOperator::normalized(alg, &v * v.adjoint())?;
            let rho = sampling::smooth(alg, &witness, WITNESS_SMOOTHING)?;
            let ge = ge_form_value(&ctx, t, rho.matrix(), k, &a)?;
            if (be >= -tol) != (ge >= -tol) {
                agree = false;
            }
            be_min = be_min.min(be);
            ge_min = ge_min.min(ge);
        }
    }
    Ok(BakryEmeryReport {
        k,
        be_min_margin: be_min,
        ge_min_margin: ge_min,
        be_pass: be_min >= -tol,
        ge_pass: ge_min >= -tol,
        agree,
        samples: samples * t_grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Subalgebra, TracialAlgebra};
    use crate::gradest::log_grid;
    use crate::linalg::{CMat, CVec};
    use crate::means::metric_norm_sq;
    use crate::qms::Jump;

    /// `τ(ρ Γ(a))`, the right-mean metric written through the carré du champ.
    fn right_metric_via_gamma(module: &TangentModule, alg_rho: &CMat, a: &CMat) -> Result<f64> {
        let g = module.gamma(a, a)?;
        Ok(linalg::trace(&(alg_rho * g)).re / alg_rho.nrows() as f64)
    }

    fn depolarizing(d: usize) -> LindbladGenerator {
        let e = Subalgebra::scalars(d).conditional_expectation();
        LindbladGenerator::from_expectation(TracialAlgebra::full(d), &e).unwrap()
    }

    #[test]
    fn right_mean_is_the_carre_du_champ() {
        let gen = depolarizing(3);
        let module = TangentModule::new(&gen);
        let mut rng = sampling::point_rng(1, 2);
        let rho = sampling::wishart(gen.algebra(), &mut rng).unwrap().into_inner();
        let a = linalg::random_complex(&mut rng, 3, 3);
        let xi = module.derivative(&a).unwrap();
        let lhs = metric_norm_sq(OperatorMean::Right, &rho, &xi).unwrap();
        let rhs = right_metric_via_gamma(&module, &rho, &a).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn verdicts_agree_on_both_sides_of_the_constant() {
        let p = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0)]));
        let gen = LindbladGenerator::new(TracialAlgebra::full(2), vec![Jump::new(1.0, p).unwrap()]).unwrap();
        let grid = log_grid(1e-2, 2.0, 6);
        let ok = bakry_emery_cross_check(&gen, 0.0, &grid, 6, 4, 1e-10).unwrap();
        assert!(ok.agree && ok.be_pass && ok.ge_pass, "{ok:?}");
        let bad = bakry_emery_cross_check(&gen, 3.0, &grid, 6, 4, 1e-10).unwrap();
        assert!(bad.agree && !bad.be_pass && !bad.ge_pass, "{bad:?}");
    }

    #[test]
    fn rejects_block_algebras() {
        let alg = TracialAlgebra::from_descriptor(&crate::algebra::AlgebraDescriptor {
            blocks: vec![1, 1],
            weights: vec![0.5, 0.5],
        })
        .unwrap();
        let gen = LindbladGenerator::zero(alg);
        assert!(matches!(bakry_emery_cross_check(&gen, 0.0, &[0.1], 1, 0, 1e-9), Err(Error::Unsupported(_))));
    }
}
