//! Derivative-free coordinate descent with step halving, used for the
//! density searches.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_evals: usize,
}

#[derive(Clone, Debug)]
pub struct Descent<T> {
    pub x: Vec<f64>,
    pub value: f64,
    pub extra: T,
    pub evaluations: usize,
}

/// Minimizes `f`, which returns `None` at rejected points. Each coordinate is
/// moved by `±step`; the first improvement is kept, and a sweep without one
/// halves the step.
pub fn coordinate_descent<T>(
    x0: Vec<f64>,
    opts: DescentOptions,
    mut f: impl FnMut(&[f64]) -> Result<Option<(f64, T)>>,
) -> Result<Descent<T>> {
    let (value, extra) = f(&x0)?.ok_or_else(|| Error::NoValidSample("starting point rejected".into()))?;
    let mut best = Descent { x: x0, value, extra, evaluations: 1 };
    let mut step = opts.initial_step;
    while step > opts.min_step && best.evaluations < opts.max_evals {
        let mut improved = false;
        'sweep: for i in 0..best.x.len() {
            for dir in [1.0, -1.0] {
                let mut y = best.x.clone();
                y[i] += dir * step;
                best.evaluations += 1;
                if let Some((v, e)) = f(&y)? {
                    if v < best.value {
                        best.x = y;
                        best.value = v;
                        best.extra = e;
                        improved = true;
                        continue 'sweep;
                    }
                }
                if best.evaluations >= opts.max_evals {
                    break 'sweep;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}
