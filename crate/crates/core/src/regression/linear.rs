//! Ordinary (optionally ridge-penalized) least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::design_with_intercept;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    /// Intercept first.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residual_std: f64,
}

/// Least squares through an SVD of the design, which keeps residuals
/// orthogonal to the columns to working precision.
pub fn fit_linear(rows: &[Vec<f64>], y: &[f64], ridge: f64) -> LinearFit {
    let x = design_with_intercept(rows);
    let (n, p) = x.shape();
    let target = DVector::from_column_slice(y);
    let (xa, ya) = if ridge > 0.0 {
        // Augmented rows sqrt(ridge) * I on the slopes.
        let mut xa = DMatrix::zeros(n + p - 1, p);
        xa.rows_mut(0, n).copy_from(&x);
        for j in 1..p {
            xa[(n + j - 1, j)] = ridge.sqrt();
        }
        let mut ya = DVector::zeros(n + p - 1);
        ya.rows_mut(0, n).copy_from(&target);
        (xa, ya)
    } else {
        (x.clone(), target.clone())
    };
    let svd = xa.clone().svd(true, true);
    let beta = svd
        .solve(&ya, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(p));
    let resid = &target - &x * &beta;
    let dof = n.saturating_sub(p).max(1) as f64;
    let sigma2 = resid.norm_squared() / dof;
    let std_errors = (xa.transpose() * &xa)
        .try_inverse()
        .map(|inv| (0..p).map(|j| (sigma2 * inv[(j, j)]).max(0.0).sqrt()).collect())
        .unwrap_or_else(|| vec![f64::NAN; p]);
    LinearFit {
        coefficients: beta.as_slice().to_vec(),
        std_errors,
        residual_std: sigma2.sqrt(),
    }
}
