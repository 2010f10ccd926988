//! Exact upper tail of the binomial distribution.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::hypergeom::LogAccumulator;

/// Largest `n` for which coefficients are built exactly in `u128`.
const EXACT_LIMIT: u64 = 120;
const TAIL_EPS: f64 = 1e-17;

fn choose_exact(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// `P(Y >= l)` for `Y ~ Binomial(n, p)`.
///
/// Small `n` sums exact coefficients times powers. Larger `n` walks the
/// shorter tail in log space from its inner end.
pub fn binomial_upper_tail(n: u64, l: u64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("success probability {p} outside [0, 1]")));
    }
    if l > n {
        return Err(Error::InvalidConfig(format!("l = {l} exceeds n = {n}")));
    }
    if l == 0 || p == 1.0 {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let q = 1.0 - p;
    let upper_is_short = l as f64 >= n as f64 * p;
    if n <= EXACT_LIMIT {
        let term = |k: u64| choose_exact(n, k) as f64 * p.powi(k as i32) * q.powi((n - k) as i32);
        return Ok(if upper_is_short {
            (l..=n).rev().map(term).sum::<f64>().min(1.0)
        } else {
            (1.0 - (0..l).map(term).sum::<f64>()).clamp(0.0, 1.0)
        });
    }

    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let ln_pmf = |k: u64| ln_binomial(n, k) + k as f64 * ln_p + (n - k) as f64 * ln_q;
    // Ratio of consecutive terms, t(k+1)/t(k).
    let ln_up = |k: u64| ((n - k) as f64 / (k + 1) as f64).ln() + ln_p - ln_q;
    let mut acc = LogAccumulator::default();
    if upper_is_short {
        let mut k = l;
        let mut ln_t = ln_pmf(k);
        loop {
            acc.add(ln_t);
            if k == n {
                break;
            }
            let r = ln_up(k);
            ln_t += r;
            k += 1;
            if r < 0.0 && (ln_t - acc.ln()).exp() / -r.exp_m1() < TAIL_EPS {
                break;
            }
        }
        Ok(acc.ln().exp().min(1.0))
    } else {
        let mut k = l - 1;
        let mut ln_t = ln_pmf(k);
        loop {
            acc.add(ln_t);
            if k == 0 {
                break;
            }
            // t(k-1)/t(k) is the reciprocal of the upward ratio at k-1.
            let r = -ln_up(k - 1);
            ln_t += r;
            k -= 1;
            if r < 0.0 && (ln_t - acc.ln()).exp() / -r.exp_m1() < TAIL_EPS {
                break;
            }
        }
        Ok((1.0 - acc.ln().exp()).clamp(0.0, 1.0))
    }
}
