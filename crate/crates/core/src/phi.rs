//! Weighted signs from dyad marginals.
//!
//! `phi[v][w] = a * P(X < A) + b * P(X > A)`. Over-represented dyads
//! (large `P(X < A)`) lean positive and under-represented ones lean
//! negative once `a > 0 > b`. Without calibration data the symmetric
//! choice `a = 1, b = -1` is used.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::ensemble::{dyad_marginals, fmt_prob, PossibilityMatrix};
use crate::error::{Error, Result};
use crate::hypergeom::Tails;
use crate::interaction::InteractionGraph;

/// Weights below this magnitude carry no sign.
pub const SIGN_ZERO_BAND: f64 = 1e-12;

/// Maximum tolerated `|phi[v][w] - phi[w][v]|` on symmetric input.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiCoefficients {
    /// Weight on `P(X < A)`.
    pub a: f64,
    /// Weight on `P(X > A)`.
    pub b: f64,
    /// Regression intercept. Kept for reference, never used for weights.
    pub c: f64,
}

impl Default for PhiCoefficients {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: -1.0,
            c: 0.0,
        }
    }
}

impl PhiCoefficients {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let coeffs = Self { a, b, c };
        coeffs.validate()?;
        Ok(coeffs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("coefficient {name} = {v}")));
            }
        }
        Ok(())
    }
}

pub fn phi_score(tails: &Tails, coeff: &PhiCoefficients) -> Result<f64> {
    coeff.validate()?;
    Ok(coeff.a * tails.under + coeff.b * tails.over)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(phi: f64) -> Sign {
        if phi.abs() < SIGN_ZERO_BAND {
            Sign::Zero
        } else if phi > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Positive => "+",
        }
    }

    fn parse(s: &str) -> Option<Sign> {
        match s {
            "-" => Some(Sign::Negative),
            "0" => Some(Sign::Zero),
            "+" => Some(Sign::Positive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedEdge {
    pub source: usize,
    pub target: usize,
    pub phi: f64,
}

/// Provenance written next to a signed network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedNetworkMeta {
    pub coefficients: PhiCoefficients,
    pub graph_digest: String,
    pub directed: bool,
    pub nodes: usize,
    pub dyads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

/// One weight per dyad: unordered when undirected, ordered otherwise.
#[derive(Debug, Clone)]
pub struct SignedNetwork {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    directed: bool,
    edges: Vec<SignedEdge>,
    lookup: HashMap<(usize, usize), usize>,
    coefficients: PhiCoefficients,
    graph_digest: String,
}

impl SignedNetwork {
    fn new(
        nodes: Vec<String>,
        directed: bool,
        edges: Vec<SignedEdge>,
        coefficients: PhiCoefficients,
        graph_digest: String,
    ) -> Self {
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let lookup = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (key(directed, e.source, e.target), i))
            .collect();
        Self {
            nodes,
            index,
            directed,
            edges,
            lookup,
            coefficients,
            graph_digest,
        }
    }

    /// Builds a network from explicit weights, e.g. for analyses on
    /// externally produced signs. Unordered pairs when `directed` is false.
    pub fn from_weights<S: AsRef<str>>(
        directed: bool,
        weights: impl IntoIterator<Item = (S, S, f64)>,
    ) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |id: &str| -> usize {
            if let Some(&i) = index.get(id) {
                return i;
            }
            nodes.push(id.to_owned());
            index.insert(id.to_owned(), nodes.len() - 1);
            nodes.len() - 1
        };
        let mut edges = Vec::new();
        let mut seen = HashMap::new();
        for (s, t, phi) in weights {
            if !phi.is_finite() {
                return Err(Error::NonFinite(format!("phi on ({}, {})", s.as_ref(), t.as_ref())));
            }
            let (v, w) = (intern(s.as_ref()), intern(t.as_ref()));
            if v == w {
                return Err(Error::InvalidConfig(format!("self-dyad on {}", s.as_ref())));
            }
            if seen.insert(key(directed, v, w), edges.len()).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate dyad ({}, {})",
                    s.as_ref(),
                    t.as_ref()
                )));
            }
            edges.push(SignedEdge {
                source: v,
                target: w,
                phi,
            });
        }
        Ok(Self::new(
            nodes,
            directed,
            edges,
            PhiCoefficients::default(),
            String::new(),
        ))
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn coefficients(&self) -> PhiCoefficients {
        self.coefficients
    }

    pub fn graph_digest(&self) -> &str {
        &self.graph_digest
    }

    /// `phi[v][w]` by index; order is ignored for undirected networks.
    pub fn weight_at(&self, v: usize, w: usize) -> Option<f64> {
        self.lookup
            .get(&key(self.directed, v, w))
            .map(|&i| self.edges[i].phi)
    }

    pub fn weight(&self, v: &str, w: &str) -> Option<f64> {
        self.weight_at(self.index_of(v)?, self.index_of(w)?)
    }

    pub fn sign(&self, v: &str, w: &str) -> Option<Sign> {
        self.weight(v, w).map(Sign::of)
    }

    pub fn meta(&self) -> SignedNetworkMeta {
        SignedNetworkMeta {
            coefficients: self.coefficients,
            graph_digest: self.graph_digest.clone(),
            directed: self.directed,
            nodes: self.nodes.len(),
            dyads: self.edges.len(),
            manifest: None,
        }
    }

    /// Every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> SignedNetwork {
        let mut out = self.clone();
        out.edges.iter_mut().for_each(|e| e.phi *= factor);
        out.coefficients.a *= factor;
        out.coefficients.b *= factor;
        out
    }
}

fn key(directed: bool, v: usize, w: usize) -> (usize, usize) {
    if directed || v < w {
        (v, w)
    } else {
        (w, v)
    }
}

/// Applies the coefficients to every active dyad of `g`.
///
/// Undirected graphs yield one weight per unordered pair and are checked
/// for symmetry. Pairs whose endpoints both have zero degree are omitted.
pub fn build_signed_network(
    g: &InteractionGraph,
    xi: &PossibilityMatrix,
    coeff: PhiCoefficients,
) -> Result<SignedNetwork> {
    coeff.validate()?;
    let n = g.node_count();
    let active: Vec<bool> = xi
        .k_out()
        .iter()
        .zip(xi.k_in())
        .map(|(&o, &i)| o + i > 0)
        .collect();
    let directed = g.is_directed();
    let mut edges = Vec::new();
    for v in 0..n {
        let targets = if directed { 0 } else { v + 1 };
        for w in targets..n {
            if w == v || !(active[v] || active[w]) {
                continue;
            }
            let phi = phi_score(&dyad_marginals(xi, g, v, w)?.tails(), &coeff)?;
            if !directed {
                let back = phi_score(&dyad_marginals(xi, g, w, v)?.tails(), &coeff)?;
                if (phi - back).abs() > SYMMETRY_TOL {
                    return Err(Error::Asymmetric(
                        g.node_id(v).to_owned(),
                        g.node_id(w).to_owned(),
                        phi,
                        back,
                    ));
                }
            }
            edges.push(SignedEdge {
                source: v,
                target: w,
                phi,
            });
        }
    }
    Ok(SignedNetwork::new(
        g.nodes().to_vec(),
        directed,
        edges,
        coeff,
        g.digest(),
    ))
}

/// Switches that decide which graph and urn the weights are computed on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferOptions {
    pub include_diagonal: bool,
    /// Keep directed input directed instead of symmetrizing it.
    pub directed_phi: bool,
}

/// The graph the null model is fit on: `A + A^T` for directed input unless
/// `directed_phi` is set.
pub fn analysis_graph(g: &InteractionGraph, options: &InferOptions) -> InteractionGraph {
    if g.is_directed() && !options.directed_phi {
        g.symmetrized()
    } else {
        g.clone()
    }
}

/// Marginals then weights in one call.
pub fn infer(
    g: &InteractionGraph,
    coeff: PhiCoefficients,
    options: &InferOptions,
) -> Result<SignedNetwork> {
    let g = analysis_graph(g, options);
    let xi = PossibilityMatrix::new(&g, options.include_diagonal)?;
    build_signed_network(&g, &xi, coeff)
}

/// Writes `source,target,phi,sign`.
pub fn write_signed_csv<W: Write>(net: &SignedNetwork, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::parse(0, e.to_string());
    wtr.write_record(["source", "target", "phi", "sign"])
        .map_err(map)?;
    for e in &net.edges {
        wtr.write_record([
            net.nodes[e.source].as_str(),
            net.nodes[e.target].as_str(),
            &fmt_prob(e.phi),
            Sign::of(e.phi).symbol(),
        ])
        .map_err(map)?;
    }
    wtr.flush().map_err(|e| Error::io("<signed network>", e))?;
    Ok(())
}

/// Reads a signed network back from CSV. `meta` restores provenance and
/// directedness; without it the network is treated as undirected.
pub fn read_signed_csv<R: Read>(reader: R, meta: Option<&SignedNetworkMeta>) -> Result<SignedNetwork> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let (src, dst, phi_col) = (col("source")?, col("target")?, col("phi")?);
    let sign_col = headers.iter().position(|h| h == "sign");
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            Error::parse(e.position().map(|p| p.line()).unwrap_or(0), e.to_string())
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let raw = row.get(phi_col).unwrap_or("");
        let phi: f64 = raw
            .parse()
            .map_err(|_| Error::parse(line, format!("phi `{raw}` is not a number")))?;
        if let Some(c) = sign_col {
            let s = row.get(c).unwrap_or("");
            if Sign::parse(s) != Some(Sign::of(phi)) {
                return Err(Error::parse(line, format!("sign `{s}` disagrees with phi {raw}")));
            }
        }
        rows.push((
            row.get(src).unwrap_or("").to_owned(),
            row.get(dst).unwrap_or("").to_owned(),
            phi,
        ));
    }
    let directed = meta.map(|m| m.directed).unwrap_or(false);
    let mut net = SignedNetwork::from_weights(directed, rows)?;
    if let Some(m) = meta {
        net.coefficients = m.coefficients;
        net.graph_digest = m.graph_digest.clone();
    }
    Ok(net)
}
