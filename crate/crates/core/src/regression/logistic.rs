//! Binary logistic regression by iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{design_with_intercept, inf_norm, sigmoid, softplus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    pub ridge: f64,
    /// Ridge strength engaged when the unpenalized fit diverges.
    pub separation_ridge: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Coefficient norm treated as divergence.
    pub divergence_norm: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            ridge: 0.0,
            separation_ridge: 1e-4,
            max_iterations: 100,
            tolerance: 1e-8,
            divergence_norm: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    /// Intercept first, then one weight per feature.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// The data (quasi-)separate the classes; `ridge` was raised to keep
    /// the estimate finite.
    pub separation: bool,
    pub ridge: f64,
}

fn penalty_mask(p: usize) -> DVector<f64> {
    DVector::from_fn(p, |j, _| if j == 0 { 0.0 } else { 1.0 })
}

/// Penalized log-likelihood `sum y*eta - ln(1 + e^eta) - ridge/2 * |beta|^2`.
pub fn objective(beta: &[f64], rows: &[Vec<f64>], y: &[f64], ridge: f64) -> f64 {
    let x = design_with_intercept(rows);
    let beta = DVector::from_column_slice(beta);
    objective_m(&beta, &x, y, ridge)
}

/// Gradient of [`objective`].
pub fn gradient(beta: &[f64], rows: &[Vec<f64>], y: &[f64], ridge: f64) -> Vec<f64> {
    let x = design_with_intercept(rows);
    let beta = DVector::from_column_slice(beta);
    gradient_m(&beta, &x, y, ridge).as_slice().to_vec()
}

fn objective_m(beta: &DVector<f64>, x: &DMatrix<f64>, y: &[f64], ridge: f64) -> f64 {
    let eta = x * beta;
    let ll: f64 = eta
        .iter()
        .zip(y)
        .map(|(&e, &yi)| yi * e - softplus(e))
        .sum();
    let pen: f64 = beta.iter().skip(1).map(|b| b * b).sum();
    ll - 0.5 * ridge * pen
}

fn gradient_m(beta: &DVector<f64>, x: &DMatrix<f64>, y: &[f64], ridge: f64) -> DVector<f64> {
    let eta = x * beta;
    let resid = DVector::from_iterator(y.len(), eta.iter().zip(y).map(|(&e, &yi)| yi - sigmoid(e)));
    let mask = penalty_mask(beta.len());
    x.transpose() * resid - beta.component_mul(&mask) * ridge
}

fn hessian(beta: &DVector<f64>, x: &DMatrix<f64>, ridge: f64) -> DMatrix<f64> {
    let eta = x * beta;
    let mut xw = x.clone();
    for (i, &e) in eta.iter().enumerate() {
        let mu = sigmoid(e);
        let w = (mu * (1.0 - mu)).max(1e-300);
        xw.row_mut(i).scale_mut(w);
    }
    let mut h = x.transpose() * xw;
    for j in 1..h.nrows() {
        h[(j, j)] += ridge;
    }
    h
}

fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(g));
    }
    h.clone().lu().solve(g)
}

struct Run {
    beta: DVector<f64>,
    iterations: usize,
    gradient_norm: f64,
    converged: bool,
    diverged: bool,
}

fn newton(x: &DMatrix<f64>, y: &[f64], ridge: f64, opts: &LogisticOptions) -> Run {
    let p = x.ncols();
    let mut beta = DVector::zeros(p);
    let mut iterations = 0;
    let mut grad = gradient_m(&beta, x, y, ridge);
    let mut converged = inf_norm(&grad) < opts.tolerance;
    let mut diverged = false;
    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let h = hessian(&beta, x, ridge);
        let Some(step) = solve_spd(&h, &grad) else {
            diverged = true;
            break;
        };
        // Step halving keeps the objective non-decreasing.
        let current = objective_m(&beta, x, y, ridge);
        let mut t = 1.0;
        let mut next = &beta + &step * t;
        while objective_m(&next, x, y, ridge) < current - 1e-12 * current.abs() && t > 1e-10 {
            t *= 0.5;
            next = &beta + &step * t;
        }
        beta = next;
        if beta.norm() > opts.divergence_norm || !beta.iter().all(|b| b.is_finite()) {
            diverged = true;
            break;
        }
        grad = gradient_m(&beta, x, y, ridge);
        converged = inf_norm(&grad) < opts.tolerance;
    }
    Run {
        gradient_norm: inf_norm(&grad),
        beta,
        iterations,
        converged,
        diverged,
    }
}

fn completely_separated(beta: &DVector<f64>, x: &DMatrix<f64>, y: &[f64]) -> bool {
    let eta = x * beta;
    eta.iter()
        .zip(y)
        .all(|(&e, &yi)| if yi > 0.5 { e > 0.0 } else { e < 0.0 })
}

/// Fits `P(y = 1) = sigmoid(c + x . beta)`.
///
/// When the unpenalized fit diverges, fails to converge, or separates the
/// classes perfectly, it is refit with `separation_ridge` and flagged.
pub fn fit_logistic(rows: &[Vec<f64>], y: &[f64], opts: &LogisticOptions) -> LogisticFit {
    let x = design_with_intercept(rows);
    let mut ridge = opts.ridge;
    let mut run = newton(&x, y, ridge, opts);
    let mut separation = false;
    if ridge < opts.separation_ridge
        && (run.diverged || !run.converged || completely_separated(&run.beta, &x, y))
    {
        separation = true;
        ridge = opts.separation_ridge;
        run = newton(&x, y, ridge, opts);
    }
    let h = hessian(&run.beta, &x, ridge);
    let std_errors = h
        .try_inverse()
        .map(|inv| (0..inv.nrows()).map(|j| inv[(j, j)].max(0.0).sqrt()).collect())
        .unwrap_or_else(|| vec![f64::NAN; x.ncols()]);
    LogisticFit {
        coefficients: run.beta.as_slice().to_vec(),
        std_errors,
        iterations: run.iterations,
        gradient_norm: run.gradient_norm,
        converged: run.converged,
        separation,
        ridge,
    }
}
