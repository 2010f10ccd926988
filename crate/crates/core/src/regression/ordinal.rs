//! Cumulative-logit (proportional odds) model for ordered categories.
//!
//! `P(y <= k | x) = sigmoid(theta_k - x . beta)` for `k = 1..K-1`.
//! Cutpoints are parametrized as `theta_1 = u_1`,
//! `theta_k = theta_{k-1} + exp(u_k)`, so every iterate keeps them strictly
//! increasing.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{inf_norm, sigmoid, softplus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrdinalOptions {
    pub ridge: f64,
    pub max_iterations: usize,
    /// Bound on the largest gradient component, per observation.
    pub tolerance: f64,
}

impl Default for OrdinalOptions {
    fn default() -> Self {
        Self {
            ridge: 0.0,
            max_iterations: 2000,
            tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalFit {
    pub slopes: Vec<f64>,
    pub cutpoints: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Smallest gap between consecutive cutpoints over all iterates.
    pub min_cutpoint_gap: f64,
}

impl OrdinalFit {
    /// Median category (1-based) for a linear predictor value.
    pub fn class_for(&self, eta: f64) -> u32 {
        1 + self.cutpoints.iter().filter(|&&t| t < eta).count() as u32
    }
}

/// Cutpoints from the unconstrained parameters.
pub fn cutpoints(u: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len());
    let mut acc = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        acc = if k == 0 { uk } else { acc + uk.exp() };
        out.push(acc);
    }
    out
}

fn ln_prob_and_grads(theta: &[f64], eta: f64, y: u32) -> (f64, f64, f64, usize) {
    // Returns ln P, d lnP / d theta_{y-1}, d lnP / d theta_y, and y.
    let k = theta.len() as u32 + 1;
    let f = |z: f64| {
        let s = sigmoid(z);
        s * (1.0 - s)
    };
    if y == 1 {
        let z = theta[0] - eta;
        let p = sigmoid(z);
        (-softplus(-z), 0.0, f(z) / p.max(1e-300), 1)
    } else if y == k {
        let z = theta[(k - 2) as usize] - eta;
        let p = sigmoid(-z);
        (-softplus(z), -f(z) / p.max(1e-300), 0.0, y as usize)
    } else {
        let zl = theta[(y - 2) as usize] - eta;
        let zh = theta[(y - 1) as usize] - eta;
        let p = (sigmoid(zh) - sigmoid(zl)).max(1e-300);
        (p.ln(), -f(zl) / p, f(zh) / p, y as usize)
    }
}

/// Negative penalized log-likelihood over `params = [beta..., u...]`.
pub fn objective(params: &[f64], rows: &[Vec<f64>], y: &[u32], levels: u32, ridge: f64) -> f64 {
    let p = params.len() - (levels as usize - 1);
    let (beta, u) = params.split_at(p);
    let theta = cutpoints(u);
    let mut nll = 0.0;
    for (row, &yi) in rows.iter().zip(y) {
        let eta: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
        nll -= ln_prob_and_grads(&theta, eta, yi).0;
    }
    nll + 0.5 * ridge * beta.iter().map(|b| b * b).sum::<f64>()
}

/// Gradient of [`objective`].
pub fn gradient(params: &[f64], rows: &[Vec<f64>], y: &[u32], levels: u32, ridge: f64) -> Vec<f64> {
    let nk = levels as usize - 1;
    let p = params.len() - nk;
    let (beta, u) = params.split_at(p);
    let theta = cutpoints(u);
    let mut g_beta = vec![0.0; p];
    let mut g_theta = vec![0.0; nk];
    for (row, &yi) in rows.iter().zip(y) {
        let eta: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
        let (_, d_lo, d_hi, yk) = ln_prob_and_grads(&theta, eta, yi);
        // d eta contributes -(d_lo + d_hi) since theta - eta appears in both.
        let d_eta = -(d_lo + d_hi);
        for (g, x) in g_beta.iter_mut().zip(row) {
            *g -= d_eta * x;
        }
        if yk >= 2 {
            g_theta[yk - 2] -= d_lo;
        }
        if yk <= nk {
            g_theta[yk - 1] -= d_hi;
        }
    }
    for (g, b) in g_beta.iter_mut().zip(beta) {
        *g += ridge * b;
    }
    let mut g_u = vec![0.0; nk];
    let mut suffix = 0.0;
    for j in (0..nk).rev() {
        suffix += g_theta[j];
        g_u[j] = if j == 0 { suffix } else { u[j].exp() * suffix };
    }
    g_beta.extend(g_u);
    g_beta
}

/// Maximum likelihood by BFGS with backtracking line search.
pub fn fit_ordinal(rows: &[Vec<f64>], y: &[u32], levels: u32, opts: &OrdinalOptions) -> OrdinalFit {
    let p = rows.first().map_or(0, Vec::len);
    let nk = levels as usize - 1;
    let n = y.len() as f64;

    // Start from the marginal cumulative proportions.
    let mut u = Vec::with_capacity(nk);
    let mut cum = 0.0;
    let mut prev = 0.0;
    for k in 1..levels {
        cum += y.iter().filter(|&&v| v == k).count() as f64;
        let q = (cum + 0.5) / (n + 1.0);
        let theta = (q / (1.0 - q)).ln();
        if k == 1 {
            u.push(theta);
        } else {
            u.push((theta - prev).max(1e-3).ln());
        }
        prev = if k == 1 { theta } else { prev + u[k as usize - 1].exp() };
    }
    let mut x = DVector::from_iterator(p + nk, std::iter::repeat_n(0.0, p).chain(u));

    let f = |v: &DVector<f64>| objective(v.as_slice(), rows, y, levels, opts.ridge);
    let grad = |v: &DVector<f64>| DVector::from_vec(gradient(v.as_slice(), rows, y, levels, opts.ridge));

    let dim = p + nk;
    let mut h_inv = DMatrix::<f64>::identity(dim, dim);
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut iterations = 0;
    let mut min_gap = gap(&x.as_slice()[p..]);
    let mut resets = 0;
    let tol = opts.tolerance * n.max(1.0);
    while inf_norm(&g) >= tol && iterations < opts.max_iterations {
        iterations += 1;
        let mut dir = -(&h_inv * &g);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            h_inv = DMatrix::identity(dim, dim);
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-16 {
            let cand = &x + &dir * t;
            let fc = f(&cand);
            if fc.is_finite() && fc <= fx + 1e-4 * t * slope {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            if resets > 2 {
                break;
            }
            resets += 1;
            h_inv = DMatrix::identity(dim, dim);
            continue;
        };
        let gnext = grad(&next);
        let s = &next - &x;
        let yv = &gnext - &g;
        let sy = s.dot(&yv);
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(dim, dim);
            let a = &eye - &s * yv.transpose() * rho;
            let b = &eye - &yv * s.transpose() * rho;
            h_inv = &a * &h_inv * &b + &s * s.transpose() * rho;
        }
        x = next;
        fx = fnext;
        g = gnext;
        min_gap = min_gap.min(gap(&x.as_slice()[p..]));
    }
    let theta = cutpoints(&x.as_slice()[p..]);
    OrdinalFit {
        slopes: x.as_slice()[..p].to_vec(),
        cutpoints: theta,
        iterations,
        gradient_norm: inf_norm(&g),
        converged: inf_norm(&g) < tol,
        min_cutpoint_gap: min_gap,
    }
}

fn gap(u: &[f64]) -> f64 {
    cutpoints(u)
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}
