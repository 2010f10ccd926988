//! Synthetic communities with planted signed relations.
//!
//! Nodes are split into contiguous groups. Each within-group pair is a
//! friendship with probability `p_within_positive`; each cross-group pair is
//! an enmity with probability `p_cross_negative`; every other pair is
//! neutral. Interactions are then drawn as a multinomial over unordered
//! pairs with weights `act(v) * act(w) * beta(relation)`, where activities
//! are log-normal.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::{InteractionGraph, RelationKind, RelationLabels};
use crate::phi::Sign;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub nodes: usize,
    pub groups: usize,
    pub p_within_positive: f64,
    pub p_cross_negative: f64,
    /// Parameters of the log-normal node activity.
    pub activity_mu: f64,
    pub activity_sigma: f64,
    /// Number of undirected interaction events.
    pub interactions: u64,
    pub beta_positive: f64,
    pub beta_negative: f64,
    /// Share of nodes whose relations are reported.
    pub surveyed_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            nodes: 60,
            groups: 2,
            p_within_positive: 0.5,
            p_cross_negative: 0.5,
            activity_mu: 0.0,
            activity_sigma: 0.5,
            interactions: 5000,
            beta_positive: 3.0,
            beta_negative: 0.3,
            surveyed_fraction: 1.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Relations do not change interaction rates.
    pub fn null(&self) -> Self {
        Self {
            beta_positive: 1.0,
            beta_negative: 1.0,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.nodes < 2 {
            return bad(format!("need at least 2 nodes, got {}", self.nodes));
        }
        if self.groups == 0 || self.groups > self.nodes {
            return bad(format!("groups must be in 1..={}, got {}", self.nodes, self.groups));
        }
        for (name, p) in [
            ("p_within_positive", self.p_within_positive),
            ("p_cross_negative", self.p_cross_negative),
            ("surveyed_fraction", self.surveyed_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if !(self.activity_sigma >= 0.0) || !self.activity_mu.is_finite() || !self.activity_sigma.is_finite() {
            return bad("activity parameters must be finite with sigma >= 0".into());
        }
        // Equality is allowed so the null case can be expressed.
        if !(self.beta_positive >= 1.0 && self.beta_negative <= 1.0 && self.beta_negative > 0.0)
            || !self.beta_positive.is_finite()
        {
            return bad(format!(
                "need beta_positive >= 1 >= beta_negative > 0, got {} and {}",
                self.beta_positive, self.beta_negative
            ));
        }
        Ok(())
    }

    fn group_of(&self, i: usize) -> usize {
        i * self.groups / self.nodes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedDyad {
    pub source: String,
    pub target: String,
    pub sign: Sign,
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub graph: InteractionGraph,
    /// Binary friendship labels for every pair of surveyed nodes.
    pub labels: RelationLabels,
    /// Non-neutral planted relations over unordered pairs.
    pub planted: Vec<PlantedDyad>,
    pub groups: Vec<usize>,
    pub activities: Vec<f64>,
}

impl SynthData {
    pub fn node_ids(&self) -> &[String] {
        self.graph.nodes()
    }
}

fn node_id(i: usize, n: usize) -> String {
    let width = (n.max(2) - 1).to_string().len();
    format!("v{i:0width$}")
}

pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let n = config.nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ids: Vec<String> = (0..n).map(|i| node_id(i, n)).collect();
    let groups: Vec<usize> = (0..n).map(|i| config.group_of(i)).collect();

    let activity = LogNormal::new(config.activity_mu, config.activity_sigma)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let activities: Vec<f64> = (0..n).map(|_| activity.sample(&mut rng)).collect();

    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for v in 0..n {
        for w in v + 1..n {
            let sign = if groups[v] == groups[w] {
                if rng.random_bool(config.p_within_positive) {
                    Sign::Positive
                } else {
                    Sign::Zero
                }
            } else if rng.random_bool(config.p_cross_negative) {
                Sign::Negative
            } else {
                Sign::Zero
            };
            pairs.push((v, w, sign));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let surveyed_count = (config.surveyed_fraction * n as f64).round() as usize;
    let mut surveyed = vec![false; n];
    for &i in &order[..surveyed_count] {
        surveyed[i] = true;
    }

    let weights: Vec<f64> = pairs
        .iter()
        .map(|&(v, w, s)| {
            let beta = match s {
                Sign::Positive => config.beta_positive,
                Sign::Negative => config.beta_negative,
                Sign::Zero => 1.0,
            };
            activities[v] * activities[w] * beta
        })
        .collect();

    // Multinomial by sequential conditional binomials.
    let mut remaining = config.interactions;
    let mut mass: f64 = weights.iter().sum();
    let mut builder = InteractionGraph::builder(false);
    for id in &ids {
        builder.add_node(id);
    }
    for (i, &(v, w, _)) in pairs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let count = if i + 1 == pairs.len() || mass <= weights[i] {
            remaining
        } else {
            let p = (weights[i] / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, p)
                .map_err(|e| Error::NonFinite(e.to_string()))?
                .sample(&mut rng)
        };
        mass -= weights[i];
        remaining -= count;
        if count > 0 {
            builder.add_interactions(&ids[v], &ids[w], count);
        }
    }
    let graph = builder.finish();

    let mut labels = RelationLabels::new(RelationKind::Binary);
    let mut planted = Vec::new();
    for &(v, w, sign) in &pairs {
        if surveyed[v] && surveyed[w] {
            labels.insert(&ids[v], &ids[w], if sign == Sign::Positive { 1.0 } else { 0.0 })?;
        }
        if sign != Sign::Zero {
            planted.push(PlantedDyad {
                source: ids[v].clone(),
                target: ids[w].clone(),
                sign,
            });
        }
    }
    for (i, id) in ids.iter().enumerate() {
        if surveyed[i] {
            labels.add_surveyed(id);
        }
    }
    Ok(SynthData {
        graph,
        labels,
        planted,
        groups,
        activities,
    })
}

/// `node,group` rows, usable as an attribute file.
pub fn write_groups<W: Write>(data: &SynthData, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::parse(0, e.to_string());
    wtr.write_record(["node", "group"]).map_err(map)?;
    for (id, g) in data.node_ids().iter().zip(&data.groups) {
        wtr.write_record([id.as_str(), &format!("g{g}")]).map_err(map)?;
    }
    wtr.flush().map_err(|e| Error::io("<groups>", e))?;
    Ok(())
}

/// `source,target,sign` rows of the planted relations.
pub fn write_planted<W: Write>(data: &SynthData, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::parse(0, e.to_string());
    wtr.write_record(["source", "target", "sign"]).map_err(map)?;
    for d in &data.planted {
        wtr.write_record([d.source.as_str(), d.target.as_str(), d.sign.symbol()]).map_err(map)?;
    }
    wtr.flush().map_err(|e| Error::io("<planted>", e))?;
    Ok(())
}
