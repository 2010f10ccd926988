//! Hypergeometric ensemble null model.
//!
//! The urn holds `Xi[v][w] = k_out(v) * k_in(w)` balls for each ordered dyad.
//! Drawing `m` balls without replacement reproduces the observed activity
//! of every node in expectation. Each dyad's count is then a hypergeometric
//! variable with population `M`, `Xi[v][w]` successes and `m` draws.
//!
//! By default the diagonal is excluded, since nobody interacts with
//! themselves: `Xi[v][v] = 0` and `M = m^2 - sum_v k_out(v) * k_in(v)`. With
//! `include_diagonal` the urn keeps all `m^2` balls, although self-dyads
//! are never reported.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergeom::{Hypergeometric, HypergeometricError, Tails};
use crate::interaction::InteractionGraph;

/// Per-dyad urn capacities, stored as the degree sequences they factor into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilityMatrix {
    k_out: Vec<u64>,
    k_in: Vec<u64>,
    total: u128,
    draws: u64,
    include_diagonal: bool,
}

impl PossibilityMatrix {
    pub fn new(g: &InteractionGraph, include_diagonal: bool) -> Result<Self> {
        let degrees = g.degrees();
        let m = g.edge_count();
        let full = u128::from(m) * u128::from(m);
        let total = if include_diagonal {
            full
        } else {
            let diag = degrees
                .out
                .iter()
                .zip(&degrees.inc)
                .try_fold(0u128, |acc, (&o, &i)| {
                    acc.checked_add(u128::from(o) * u128::from(i))
                })
                .ok_or_else(|| Error::Overflow("diagonal urn mass".into()))?;
            full.checked_sub(diag)
                .ok_or_else(|| Error::Overflow("diagonal mass exceeds m^2".into()))?
        };
        Ok(Self {
            k_out: degrees.out,
            k_in: degrees.inc,
            total,
            draws: m,
            include_diagonal,
        })
    }

    pub fn node_count(&self) -> usize {
        self.k_out.len()
    }

    /// `Xi[v][w]`.
    pub fn xi(&self, v: usize, w: usize) -> u128 {
        if v == w && !self.include_diagonal {
            return 0;
        }
        u128::from(self.k_out[v]) * u128::from(self.k_in[w])
    }

    /// Balls in the urn, `M`.
    pub fn total(&self) -> u128 {
        self.total
    }

    /// Sample size `m`.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn includes_diagonal(&self) -> bool {
        self.include_diagonal
    }

    pub fn k_out(&self) -> &[u64] {
        &self.k_out
    }

    pub fn k_in(&self) -> &[u64] {
        &self.k_in
    }
}

/// `P(X < A)`, `P(X = A)`, `P(X > A)` for one ordered dyad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadMarginal {
    pub source: usize,
    pub target: usize,
    pub observed: u64,
    pub xi: u128,
    pub p_under: f64,
    pub p_eq: f64,
    pub p_over: f64,
}

impl DyadMarginal {
    pub fn tails(&self) -> Tails {
        Tails {
            under: self.p_under,
            equal: self.p_eq,
            over: self.p_over,
        }
    }
}

/// Marginals for one dyad `v -> w`.
pub fn dyad_marginals(
    xi: &PossibilityMatrix,
    g: &InteractionGraph,
    v: usize,
    w: usize,
) -> Result<DyadMarginal> {
    if xi.node_count() != g.node_count() || xi.draws() != g.edge_count() {
        return Err(Error::InvalidConfig(
            "possibility matrix was built from a different graph".into(),
        ));
    }
    let observed = g.count(v, w);
    let capacity = xi.xi(v, w);
    let inconsistent = || Error::ModelInconsistency {
        source_id: g.node_id(v).to_owned(),
        target_id: g.node_id(w).to_owned(),
        observed,
        capacity,
    };
    if u128::from(observed) > capacity {
        return Err(inconsistent());
    }
    let tails = if capacity == 0 {
        Tails::DEGENERATE
    } else {
        Hypergeometric::new(xi.total(), capacity, u128::from(xi.draws()))
            .and_then(|h| h.tails(u128::from(observed)))
            .map_err(|e| match e {
                HypergeometricError::OutsideSupport { .. } => inconsistent(),
                other => Error::InvalidConfig(other.to_string()),
            })?
    };
    Ok(DyadMarginal {
        source: v,
        target: w,
        observed,
        xi: capacity,
        p_under: tails.under,
        p_eq: tails.equal,
        p_over: tails.over,
    })
}

/// Marginals for every ordered dyad `v != w`, in `(v, w)` index order.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadMarginals {
    n: usize,
    entries: Vec<DyadMarginal>,
}

impl DyadMarginals {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DyadMarginal> {
        self.entries.iter()
    }

    pub fn get(&self, v: usize, w: usize) -> Option<&DyadMarginal> {
        if v == w || v >= self.n || w >= self.n {
            return None;
        }
        let col = if w > v { w - 1 } else { w };
        self.entries.get(v * (self.n - 1) + col)
    }
}

impl<'a> IntoIterator for &'a DyadMarginals {
    type Item = &'a DyadMarginal;
    type IntoIter = std::slice::Iter<'a, DyadMarginal>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Batch version of [`dyad_marginals`]. Rows are computed in parallel and
/// collected in a fixed order, so the output does not depend on scheduling.
pub fn all_marginals(xi: &PossibilityMatrix, g: &InteractionGraph) -> Result<DyadMarginals> {
    let n = g.node_count();
    let rows: Vec<Vec<DyadMarginal>> = (0..n)
        .into_par_iter()
        .map(|v| {
            (0..n)
                .filter(|&w| w != v)
                .map(|w| dyad_marginals(xi, g, v, w))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(DyadMarginals {
        n,
        entries: rows.into_iter().flatten().collect(),
    })
}

/// Shortest decimal form is not enough for diffing runs across platforms;
/// 17 significant digits always round-trip an `f64`.
pub fn fmt_prob(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `source,target,A,Xi,p_under,p_eq,p_over`.
pub fn write_marginals<W: Write>(
    g: &InteractionGraph,
    marginals: &DyadMarginals,
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::parse(0, e.to_string());
    wtr.write_record(["source", "target", "A", "Xi", "p_under", "p_eq", "p_over"])
        .map_err(map)?;
    for d in marginals {
        wtr.write_record([
            g.node_id(d.source),
            g.node_id(d.target),
            &d.observed.to_string(),
            &d.xi.to_string(),
            &fmt_prob(d.p_under),
            &fmt_prob(d.p_eq),
            &fmt_prob(d.p_over),
        ])
        .map_err(map)?;
    }
    wtr.flush().map_err(|e| Error::io("<marginals>", e))?;
    Ok(())
}
