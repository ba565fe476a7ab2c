//! Damped Newton iteration with a forward-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Convergence threshold on the residual max-norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest line-search step before the iteration gives up.
    pub min_step: f64,
    /// Relative finite-difference step, `h_j = rel_step · max(1, |x_j|)`.
    pub rel_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
            min_step: 2f64.powi(-20),
            rel_step: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Residual max-norm before each iteration and at the end.
    pub history: Vec<f64>,
}

pub fn max_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Forward-difference Jacobian of `f` at `x`, given `fx = f(x)`.
pub fn fd_jacobian<F>(f: &F, x: &DVector<f64>, fx: &DVector<f64>, rel_step: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut jac = DMatrix::zeros(fx.len(), x.len());
    let mut probe = x.clone();
    for j in 0..x.len() {
        let h = rel_step * x[j].abs().max(1.0);
        probe[j] = x[j] + h;
        // use the representable step
        let h = probe[j] - x[j];
        let col = (f(&probe) - fx) / h;
        jac.set_column(j, &col);
        probe[j] = x[j];
    }
    jac
}

/// Solves `f(x) = 0` from `x0`.
///
/// Each step solves `J dx = -f` by LU and backtracks by halving until the
/// Euclidean residual norm decreases (Armijo factor 1e-4).
pub fn solve<F>(f: F, x0: DVector<f64>, options: &NewtonOptions) -> Result<NewtonReport>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut x = x0;
    let mut fx = f(&x);
    let mut norm = max_norm(&fx);
    let mut history = vec![norm];
    let mut best = (norm, x.clone());

    for iteration in 0..options.max_iterations {
        if norm <= options.tolerance {
            return Ok(NewtonReport {
                x,
                residual_norm: norm,
                iterations: iteration,
                history,
            });
        }
        if !norm.is_finite() {
            break;
        }
        let jac = fd_jacobian(&f, &x, &fx, options.rel_step);
        let dx = jac
            .lu()
            .solve(&(-&fx))
            .filter(|d| d.iter().all(|v| v.is_finite()))
            .ok_or(Error::SingularJacobian { iteration })?;

        let merit = fx.norm();
        let mut lambda = 1.0;
        loop {
            let trial = &x + &dx * lambda;
            let ft = f(&trial);
            if ft.norm() <= (1.0 - 1e-4 * lambda) * merit {
                x = trial;
                fx = ft;
                break;
            }
            lambda *= 0.5;
            if lambda < options.min_step {
                history.push(norm);
                return Err(non_convergence(iteration + 1, best, history));
            }
        }
        norm = max_norm(&fx);
        history.push(norm);
        if norm < best.0 {
            best = (norm, x.clone());
        }
    }
    if norm <= options.tolerance {
        return Ok(NewtonReport {
            x,
            residual_norm: norm,
            iterations: options.max_iterations,
            history,
        });
    }
    Err(non_convergence(options.max_iterations, best, history))
}

fn non_convergence(iterations: usize, best: (f64, DVector<f64>), history: Vec<f64>) -> Error {
    Error::NonConvergence {
        iterations,
        best_residual: best.0,
        best_iterate: best.1.iter().copied().collect(),
        residual_history: history,
    }
}
