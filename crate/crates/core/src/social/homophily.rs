//! Do positively related nodes share an attribute more often than chance?

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::NodeAttributes;
use crate::phi::SignedNetwork;

use super::binomial::binomial_upper_tail;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomophilyReport {
    pub attribute: String,
    /// Percentage of positive dyads whose endpoints share the attribute.
    pub p_positive: f64,
    /// Percentage of all attributed dyads sharing the attribute.
    pub p_random: f64,
    /// Positive dyads.
    pub n: u64,
    /// Positive dyads sharing the attribute.
    pub l: u64,
    /// `P(Y >= l)` with `Y ~ Binomial(n, m_same / (m_same + m_diff))`.
    pub p_value: f64,
    pub m_same: u64,
    pub m_diff: u64,
    /// Nodes of the universe without a value for the attribute.
    pub excluded_nodes: usize,
}

impl fmt::Display for HomophilyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "attribute         {}", self.attribute)?;
        writeln!(f, "positive pairs    {:>6.1}%  ({} of {})", self.p_positive, self.l, self.n)?;
        writeln!(f, "random pairs      {:>6.1}%", self.p_random)?;
        write!(f, "p-value           {:.3e}", self.p_value)
    }
}

/// Binomial homophily test on the nodes of `universe` (all nodes of the
/// network when `None`).
///
/// A dyad is positive when `phi > 0`; for directed networks the two
/// directions are summed first. Dyads missing from the network count as
/// non-positive.
pub fn homophily(
    net: &SignedNetwork,
    attrs: &NodeAttributes,
    attribute: &str,
    universe: Option<&[String]>,
) -> Result<HomophilyReport> {
    if attrs.categories(attribute).is_none() {
        return Err(Error::InvalidConfig(format!("unknown attribute '{attribute}'")));
    }
    let universe: Vec<&str> = match universe {
        Some(u) => u.iter().map(String::as_str).collect(),
        None => net.nodes().iter().map(String::as_str).collect(),
    };
    let mut kept: Vec<(&str, &str)> = Vec::new();
    let mut excluded = 0;
    for &node in &universe {
        match attrs.get(node, attribute) {
            Some(value) => kept.push((node, value)),
            None => excluded += 1,
        }
    }
    if excluded > 0 {
        log::info!("{excluded} node(s) without '{attribute}' excluded from the homophily test");
    }

    let phi = |v: &str, w: &str| -> f64 {
        if net.is_directed() {
            net.weight(v, w).unwrap_or(0.0) + net.weight(w, v).unwrap_or(0.0)
        } else {
            net.weight(v, w).unwrap_or(0.0)
        }
    };
    let (mut m_same, mut m_diff, mut n, mut l) = (0u64, 0u64, 0u64, 0u64);
    for (i, &(v, av)) in kept.iter().enumerate() {
        for &(w, aw) in &kept[i + 1..] {
            let same = av == aw;
            if same {
                m_same += 1;
            } else {
                m_diff += 1;
            }
            if phi(v, w) > 0.0 {
                n += 1;
                l += u64::from(same);
            }
        }
    }
    if n == 0 {
        return Err(Error::NoPositiveRelations);
    }
    let p = m_same as f64 / (m_same + m_diff) as f64;
    Ok(HomophilyReport {
        attribute: attribute.to_owned(),
        p_positive: 100.0 * l as f64 / n as f64,
        p_random: 100.0 * p,
        n,
        l,
        p_value: binomial_upper_tail(n, l, p)?,
        m_same,
        m_diff,
        excluded_nodes: excluded,
    })
}
