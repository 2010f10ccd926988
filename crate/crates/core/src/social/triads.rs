//! Importance of balanced and unbalanced triads within a group.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::InteractionGraph;
use crate::phi::{Sign, SignedNetwork};

/// Number of negative dyads in a triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TriadType {
    #[serde(rename = "+++")]
    AllPositive,
    #[serde(rename = "++-")]
    OneNegative,
    #[serde(rename = "+--")]
    TwoNegative,
    #[serde(rename = "---")]
    AllNegative,
}

impl TriadType {
    pub const ALL: [TriadType; 4] = [
        TriadType::AllPositive,
        TriadType::OneNegative,
        TriadType::TwoNegative,
        TriadType::AllNegative,
    ];

    pub fn from_negatives(k: usize) -> Self {
        Self::ALL[k]
    }

    pub fn symbol(&self) -> &'static str {
        ["+++", "++-", "+--", "---"][*self as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "filter", content = "node", rename_all = "snake_case")]
pub enum TriadFilter {
    All,
    Involving(String),
    Excluding(String),
}

#[derive(Debug, Clone, Default)]
pub struct TriadOptions<'a> {
    /// Only count triples whose three dyads all interacted in this graph.
    pub interacting: Option<&'a InteractionGraph>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriadReport {
    pub group: String,
    pub filter: TriadFilter,
    /// Raw importance per type, indexed like [`TriadType::ALL`].
    pub importance: [f64; 4],
    /// Share of the total importance; all zero when the total is zero.
    pub relative: [f64; 4],
    pub total: f64,
    pub counted: [u64; 4],
    /// Triples with a zero-sign dyad.
    pub voided: u64,
    /// Triples with a dyad missing from the network or, when restricted,
    /// without interactions.
    pub skipped: u64,
}

impl TriadReport {
    pub fn relative_of(&self, t: TriadType) -> f64 {
        self.relative[t as usize]
    }

    pub fn importance_of(&self, t: TriadType) -> f64 {
        self.importance[t as usize]
    }
}

#[derive(Default, Clone, Copy)]
struct Partial {
    importance: [f64; 4],
    counted: [u64; 4],
    voided: u64,
    skipped: u64,
}

impl Partial {
    fn merge(mut self, o: &Partial) -> Self {
        for t in 0..4 {
            self.importance[t] += o.importance[t];
            self.counted[t] += o.counted[t];
        }
        self.voided += o.voided;
        self.skipped += o.skipped;
        self
    }
}

/// Sums `|phi_vw| * |phi_wz| * |phi_zv|` over the unordered triples of
/// `group`, split by the number of negative dyads.
///
/// Directed networks use the mean of the two directions per dyad.
pub fn triad_importance(
    net: &SignedNetwork,
    group_name: &str,
    group: &[String],
    filter: &TriadFilter,
    options: &TriadOptions<'_>,
) -> Result<TriadReport> {
    let mut members: BTreeSet<usize> = BTreeSet::new();
    for id in group {
        match net.index_of(id) {
            Some(i) => {
                members.insert(i);
            }
            None => log::warn!("group member '{id}' is not in the signed network"),
        }
    }
    let pinned = match filter {
        TriadFilter::All => None,
        TriadFilter::Excluding(x) => {
            if let Some(i) = net.index_of(x) {
                members.remove(&i);
            }
            None
        }
        TriadFilter::Involving(x) => {
            let i = net
                .index_of(x)
                .filter(|i| members.contains(i))
                .ok_or_else(|| Error::InvalidConfig(format!("node '{x}' is not in group '{group_name}'")))?;
            Some(i)
        }
    };
    if members.len() < 3 {
        return Err(Error::GroupTooSmall(members.len()));
    }
    let members: Vec<usize> = members.into_iter().collect();

    let phi = |v: usize, w: usize| -> Option<f64> {
        if let Some(g) = options.interacting {
            let (gv, gw) = (g.index_of(&net.nodes()[v])?, g.index_of(&net.nodes()[w])?);
            if g.count(gv, gw) + g.count(gw, gv) == 0 {
                return None;
            }
        }
        if net.is_directed() {
            Some((net.weight_at(v, w)? + net.weight_at(w, v)?) / 2.0)
        } else {
            net.weight_at(v, w)
        }
    };
    let visit = |acc: &mut Partial, a: usize, b: usize, c: usize| {
        let (Some(x), Some(y), Some(z)) = (phi(a, b), phi(b, c), phi(c, a)) else {
            acc.skipped += 1;
            return;
        };
        let signs = [Sign::of(x), Sign::of(y), Sign::of(z)];
        if signs.contains(&Sign::Zero) {
            acc.voided += 1;
            return;
        }
        let t = signs.iter().filter(|&&s| s == Sign::Negative).count();
        acc.importance[t] += x.abs() * y.abs() * z.abs();
        acc.counted[t] += 1;
    };

    let n = members.len();
    let partials: Vec<Partial> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = Partial::default();
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (members[i], members[j], members[k]);
                    if pinned.is_some_and(|x| x != a && x != b && x != c) {
                        continue;
                    }
                    visit(&mut acc, a, b, c);
                }
            }
            acc
        })
        .collect();
    let total_partial = partials.iter().fold(Partial::default(), |a, p| a.merge(p));

    let total: f64 = total_partial.importance.iter().sum();
    let relative = if total > 0.0 {
        total_partial.importance.map(|x| x / total)
    } else {
        [0.0; 4]
    };
    Ok(TriadReport {
        group: group_name.to_owned(),
        filter: filter.clone(),
        importance: total_partial.importance,
        relative,
        total,
        counted: total_partial.counted,
        voided: total_partial.voided,
        skipped: total_partial.skipped,
    })
}
