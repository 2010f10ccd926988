//! Hypergeometric tail probabilities for urns far beyond the range of
//! direct binomial evaluation.
//!
//! All three quantities `P(X < k)`, `P(X = k)` and `P(X > k)` are computed
//! relative to the point mass at `k`. Terms are generated by walking outward
//! from `k` with the ratio `P(a + 1) / P(a)`, accumulated in log space, and
//! truncated with a geometric bound once they decay. The normalizing
//! constant `C(N, n)` never appears, so the result keeps full relative
//! precision even when each tail is astronomically small.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative size below which the rest of a decaying tail is dropped.
const TAIL_EPS: f64 = 1e-17;

/// Once one side outweighs the point mass by `e^CUTOFF`, everything else
/// underflows to zero in `f64` and further terms cannot change the result.
const LN_CUTOFF: f64 = 800.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypergeometricError {
    #[error("successes {successes} exceed population {population}")]
    SuccessesExceedPopulation { population: u128, successes: u128 },
    #[error("draws {draws} exceed population {population}")]
    DrawsExceedPopulation { population: u128, draws: u128 },
    #[error("observed {observed} outside support [{lo}, {hi}]")]
    OutsideSupport { observed: u128, lo: u128, hi: u128 },
}

/// `(P(X < k), P(X = k), P(X > k))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tails {
    pub under: f64,
    pub equal: f64,
    pub over: f64,
}

impl Tails {
    /// The distribution of a constant: all mass on the observed value.
    pub const DEGENERATE: Tails = Tails {
        under: 0.0,
        equal: 1.0,
        over: 0.0,
    };
}

/// Number of successes in `draws` draws without replacement from an urn of
/// `population` balls, `successes` of which are marked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hypergeometric {
    population: u128,
    successes: u128,
    draws: u128,
}

impl Hypergeometric {
    pub fn new(population: u128, successes: u128, draws: u128) -> Result<Self, HypergeometricError> {
        if successes > population {
            return Err(HypergeometricError::SuccessesExceedPopulation {
                population,
                successes,
            });
        }
        if draws > population {
            return Err(HypergeometricError::DrawsExceedPopulation { population, draws });
        }
        Ok(Self {
            population,
            successes,
            draws,
        })
    }

    /// Inclusive support `[max(0, n + K - N), min(K, n)]`.
    pub fn support(&self) -> (u128, u128) {
        let lo = (self.draws + self.successes).saturating_sub(self.population);
        let hi = self.successes.min(self.draws);
        (lo, hi)
    }

    pub fn mean(&self) -> f64 {
        if self.population == 0 {
            return 0.0;
        }
        self.draws as f64 * (self.successes as f64 / self.population as f64)
    }

    /// `ln(P(a + 1) / P(a))` for `lo <= a < hi`.
    fn ln_ratio_up(&self, a: u128) -> f64 {
        let num = (self.successes - a) as f64 * (self.draws - a) as f64;
        // N - K - n + a + 1 >= 1 on the support; ordered to stay unsigned.
        let rest = (self.population + a + 1 - self.successes - self.draws) as f64;
        let den = (a + 1) as f64 * rest;
        (num / den).ln()
    }

    /// Tail masses around `observed`.
    pub fn tails(&self, observed: u128) -> Result<Tails, HypergeometricError> {
        let (lo, hi) = self.support();
        if observed < lo || observed > hi {
            return Err(HypergeometricError::OutsideSupport { observed, lo, hi });
        }
        if lo == hi {
            return Ok(Tails::DEGENERATE);
        }
        let below = if observed > lo {
            self.ln_side(observed, lo, Side::Below)
        } else {
            f64::NEG_INFINITY
        };
        let above = if observed < hi {
            self.ln_side(observed, hi, Side::Above)
        } else {
            f64::NEG_INFINITY
        };
        let ln_total = ln_sum_exp(&[0.0, below, above]);
        Ok(Tails {
            under: (below - ln_total).exp(),
            equal: (-ln_total).exp(),
            over: (above - ln_total).exp(),
        })
    }

    pub fn pmf(&self, k: u128) -> f64 {
        self.tails(k).map(|t| t.equal).unwrap_or(0.0)
    }

    /// `ln(sum of P(a) / P(k))` over the side of `k` ending at `bound`.
    fn ln_side(&self, k: u128, bound: u128, side: Side) -> f64 {
        let step = |a: u128| match side {
            Side::Above => self.ln_ratio_up(a),
            Side::Below => -self.ln_ratio_up(a - 1),
        };
        let next = |a: u128| match side {
            Side::Above => a + 1,
            Side::Below => a - 1,
        };

        let mut acc = LogAccumulator::default();
        let mut a = k;
        let mut ln_term = 0.0;
        let mut ln_step = step(a);
        loop {
            ln_term += ln_step;
            a = next(a);
            acc.add(ln_term);
            if a == bound || acc.ln() > LN_CUTOFF {
                break;
            }
            ln_step = step(a);
            if ln_step < 0.0 {
                // Log-concavity: ratios only shrink from here, so the rest of
                // the tail is bounded by a geometric series.
                let q = ln_step.exp();
                let rel = (ln_term - acc.ln()).exp();
                if rel * q / -ln_step.exp_m1() < TAIL_EPS {
                    break;
                }
            }
        }
        acc.ln()
    }
}

#[derive(Clone, Copy)]
enum Side {
    Below,
    Above,
}

/// Running `ln(sum exp(x_i))` without overflow.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogAccumulator {
    max: f64,
    scaled: f64,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogAccumulator {
    pub(crate) fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    pub(crate) fn ln(&self) -> f64 {
        self.max + self.scaled.ln()
    }
}

pub(crate) fn ln_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogAccumulator::default();
    xs.iter().for_each(|&x| acc.add(x));
    acc.ln()
}
