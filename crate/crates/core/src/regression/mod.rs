//! Small dense regression solvers.
//!
//! Feature rows are passed without an intercept column; every solver adds
//! its own intercept (or, for the ordinal model, cutpoints). Ridge
//! penalties never touch the intercept or cutpoints.

pub mod linear;
pub mod logistic;
pub mod ordinal;

use nalgebra::{DMatrix, DVector};

pub use linear::{fit_linear, LinearFit};
pub use logistic::{fit_logistic, LogisticFit, LogisticOptions};
pub use ordinal::{fit_ordinal, OrdinalFit, OrdinalOptions};

/// Row-major features with a leading column of ones.
pub(crate) fn design_with_intercept(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let p = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), p + 1, |i, j| if j == 0 { 1.0 } else { rows[i][j - 1] })
}

pub(crate) fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
