//! Interaction events and the directed multigraph of their counts.
//!
//! Node ids are opaque strings. Dense indices are assigned by first
//! appearance, and every output refers back to the original ids.

mod attributes;
mod io;
mod relations;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::digest::RowDigest;
use crate::error::{Error, Result};

pub use attributes::{load_attributes, read_attributes, NodeAttributes};
pub use io::{read_edge_list, read_interactions, write_edge_list};
pub use relations::{load_relations, read_relations, write_relations, RelationKind, RelationLabels};

/// Output of a loader: the parsed value plus non-fatal warnings
/// (for example rows that mention nodes missing from the graph).
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

/// One observed interaction. A weight of `k` stands for `k` parallel events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionRecord {
    pub source: String,
    pub target: String,
    pub timestamp: Option<i64>,
    pub weight: Option<u64>,
    /// Line in the source file, for error messages.
    pub line: Option<u64>,
}

impl InteractionRecord {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            timestamp: None,
            weight: None,
            line: None,
        }
    }

    pub fn at(mut self, timestamp: i64) -> Self {
        self.timestamp = Some(timestamp);
        self
    }

    pub fn weighted(mut self, weight: u64) -> Self {
        self.weight = Some(weight);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> Result<Self> {
        if end <= start {
            return Err(Error::InvalidWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// When false every event is expanded into one edge in each direction.
    pub directed: bool,
    pub window: Option<TimeWindow>,
}

impl IngestOptions {
    pub fn directed() -> Self {
        Self {
            directed: true,
            window: None,
        }
    }

    pub fn undirected() -> Self {
        Self {
            directed: false,
            window: None,
        }
    }

    pub fn with_window(mut self, window: TimeWindow) -> Self {
        self.window = Some(window);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Records read, before any filtering.
    pub records: u64,
    /// Events kept (weights expanded, before symmetric expansion).
    pub events: u64,
    pub self_loops_dropped: u64,
    pub outside_window: u64,
    /// Records without a timestamp dropped because a window was requested.
    pub untimed_dropped: u64,
}

/// Directed multigraph of interaction counts.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone)]
pub struct InteractionGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    counts: BTreeMap<(usize, usize), u64>,
    m: u64,
    directed: bool,
    report: IngestReport,
}

impl InteractionGraph {
    pub fn builder(directed: bool) -> GraphBuilder {
        GraphBuilder {
            graph: InteractionGraph {
                nodes: Vec::new(),
                index: HashMap::new(),
                counts: BTreeMap::new(),
                m: 0,
                directed,
                report: IngestReport::default(),
            },
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_id(&self, index: usize) -> &str {
        &self.nodes[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Total number of directed edges, `m = sum A[v][w]`.
    pub fn edge_count(&self) -> u64 {
        self.m
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    /// `A[v][w]` by dense index.
    pub fn count(&self, v: usize, w: usize) -> u64 {
        self.counts.get(&(v, w)).copied().unwrap_or(0)
    }

    pub fn count_by_id(&self, v: &str, w: &str) -> Option<u64> {
        Some(self.count(self.index_of(v)?, self.index_of(w)?))
    }

    /// Non-zero counts in `(source, target)` index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts.iter().map(|(&(v, w), &c)| (v, w, c))
    }

    /// Out- and in-degrees, each summing to `m`.
    pub fn degrees(&self) -> Degrees {
        let n = self.nodes.len();
        let mut out = vec![0u64; n];
        let mut inc = vec![0u64; n];
        for (v, w, c) in self.edges() {
            out[v] += c;
            inc[w] += c;
        }
        Degrees { out, inc }
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(v, w, c)| self.count(w, v) == c)
    }

    /// `A + A^T`, flagged as undirected. Symmetric graphs are returned as is.
    pub fn symmetrized(&self) -> InteractionGraph {
        if !self.directed && self.is_symmetric() {
            return self.clone();
        }
        let mut g = self.clone();
        g.directed = false;
        g.counts.clear();
        for (v, w, c) in self.edges() {
            *g.counts.entry((v, w)).or_insert(0) += c;
            *g.counts.entry((w, v)).or_insert(0) += c;
        }
        g.m = 2 * self.m;
        g
    }

    /// Order-independent fingerprint of node ids and counts.
    pub fn digest(&self) -> String {
        let mut rows: Vec<(&str, &str, u64)> = self
            .edges()
            .map(|(v, w, c)| (self.nodes[v].as_str(), self.nodes[w].as_str(), c))
            .collect();
        rows.sort_unstable();
        let mut ids: Vec<&str> = self.nodes.iter().map(String::as_str).collect();
        ids.sort_unstable();
        let mut d = RowDigest::new();
        d.push_u64(u64::from(self.directed));
        d.push_u64(ids.len() as u64);
        for id in ids {
            d.push_str(id);
        }
        for (v, w, c) in rows {
            d.push_str(v);
            d.push_str(w);
            d.push_u64(c);
        }
        d.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degrees {
    pub out: Vec<u64>,
    pub inc: Vec<u64>,
}

/// `(k_out, k_in)` of a graph.
pub fn degrees(g: &InteractionGraph) -> (Vec<u64>, Vec<u64>) {
    let Degrees { out, inc } = g.degrees();
    (out, inc)
}

/// Single-writer construction of an [`InteractionGraph`].
pub struct GraphBuilder {
    graph: InteractionGraph,
}

impl GraphBuilder {
    pub fn add_node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.graph.index.get(id) {
            return i;
        }
        let i = self.graph.nodes.len();
        self.graph.nodes.push(id.to_owned());
        self.graph.index.insert(id.to_owned(), i);
        i
    }

    /// Adds `count` edges `v -> w`, plus the mirror edges when undirected.
    /// Self-loops are ignored and reported.
    pub fn add_interactions(&mut self, source: &str, target: &str, count: u64) {
        if count == 0 {
            return;
        }
        if source == target {
            self.graph.report.self_loops_dropped += 1;
            return;
        }
        let v = self.add_node(source);
        let w = self.add_node(target);
        self.graph.report.events += count;
        *self.graph.counts.entry((v, w)).or_insert(0) += count;
        self.graph.m += count;
        if !self.graph.directed {
            *self.graph.counts.entry((w, v)).or_insert(0) += count;
            self.graph.m += count;
        }
    }

    pub fn finish(self) -> InteractionGraph {
        self.graph
    }
}

/// Builds the interaction graph from raw records.
pub fn ingest_interactions<I>(records: I, options: &IngestOptions) -> Result<InteractionGraph>
where
    I: IntoIterator<Item = InteractionRecord>,
{
    if let Some(w) = options.window {
        TimeWindow::new(w.start, w.end)?;
    }
    let mut builder = InteractionGraph::builder(options.directed);
    for (pos, rec) in records.into_iter().enumerate() {
        let line = rec.line.unwrap_or(pos as u64 + 1);
        builder.graph.report.records += 1;
        if rec.source.is_empty() || rec.target.is_empty() {
            return Err(Error::parse(line, "empty node id"));
        }
        let weight = match rec.weight {
            Some(0) => return Err(Error::parse(line, "weight must be a positive integer")),
            Some(w) => w,
            None => 1,
        };
        if let Some(window) = options.window {
            match rec.timestamp {
                None => {
                    builder.graph.report.untimed_dropped += 1;
                    continue;
                }
                Some(t) if !window.contains(t) => {
                    builder.graph.report.outside_window += 1;
                    continue;
                }
                Some(_) => {}
            }
        }
        builder.add_interactions(&rec.source, &rec.target, weight);
    }
    Ok(builder.finish())
}
