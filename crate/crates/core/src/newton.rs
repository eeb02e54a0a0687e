//! Damped Newton iteration for small dense systems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Iterates leaving `[-bound, bound]` in any coordinate are abandoned.
    pub bound: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, max_halvings: 40, bound: 700.0 }
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Solves `g(x) = 0` where `system(x)` returns `(g(x), row-major Jacobian)`.
/// Returns the root and its max-norm residual, or `None` when the start
/// does not converge.
pub(crate) fn solve<S>(mut x: Vec<f64>, system: S, opts: NewtonOptions) -> Option<(Vec<f64>, f64)>
where
    S: Fn(&[f64]) -> (Vec<f64>, Vec<f64>),
{
    let n = x.len();
    let (mut g, mut jac) = system(&x);
    let mut res = max_norm(&g);
    for _ in 0..opts.max_iter {
        if !res.is_finite() {
            return None;
        }
        // Converged starts take a few extra steps so that distinct starts
        // landing on the same root agree far below the dedup tolerance.
        if res <= opts.tol * 1e-4 {
            return Some((x, res));
        }
        let step = DMatrix::from_row_slice(n, n, &jac).lu().solve(&DVector::from_column_slice(&g))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi - lambda * si).collect();
            if trial.iter().all(|t| t.is_finite() && t.abs() <= opts.bound) {
                let (tg, tj) = system(&trial);
                let tres = max_norm(&tg);
                if tres < res {
                    x = trial;
                    g = tg;
                    jac = tj;
                    res = tres;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return (res <= opts.tol).then_some((x, res));
        }
    }
    (res <= opts.tol).then_some((x, res))
}
