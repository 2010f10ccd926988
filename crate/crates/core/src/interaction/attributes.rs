use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use super::io::{csv_reader, line_of};
use super::{InteractionGraph, Loaded};
use crate::error::{Error, Result};

/// Categorical attributes per node.
///
/// Continuous quantities such as income must be bucketed before loading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeAttributes {
    names: Vec<String>,
    categories: BTreeMap<String, BTreeSet<String>>,
    values: BTreeMap<String, BTreeMap<String, String>>,
}

impl NodeAttributes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: &str, attribute: &str, value: &str) {
        if !self.categories.contains_key(attribute) {
            self.names.push(attribute.to_owned());
        }
        self.categories
            .entry(attribute.to_owned())
            .or_default()
            .insert(value.to_owned());
        self.values
            .entry(node.to_owned())
            .or_default()
            .insert(attribute.to_owned(), value.to_owned());
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.names
    }

    pub fn categories(&self, attribute: &str) -> Option<&BTreeSet<String>> {
        self.categories.get(attribute)
    }

    pub fn get(&self, node: &str, attribute: &str) -> Option<&str> {
        self.values.get(node)?.get(attribute).map(String::as_str)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nodes carrying `value` for `attribute`, sorted by id.
    pub fn nodes_with(&self, attribute: &str, value: &str) -> Vec<String> {
        self.values
            .iter()
            .filter(|(_, attrs)| attrs.get(attribute).map(String::as_str) == Some(value))
            .map(|(n, _)| n.clone())
            .collect()
    }
}

/// Parses `node,attr1,attr2,...`. Empty cells mean the attribute is unknown
/// for that node.
///
/// `declared` restricts the allowed values per attribute; undeclared
/// attributes accept any value. Rows for nodes absent from `graph` are
/// dropped with a warning.
pub fn read_attributes<R: Read>(
    reader: R,
    declared: &BTreeMap<String, BTreeSet<String>>,
    graph: Option<&InteractionGraph>,
) -> Result<Loaded<NodeAttributes>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    if headers.get(0).map(|h| h.eq_ignore_ascii_case("node")) != Some(true) {
        return Err(Error::MissingColumn("node".into()));
    }
    for name in declared.keys() {
        if !headers.iter().skip(1).any(|h| h == name) {
            return Err(Error::MissingColumn(name.clone()));
        }
    }

    let mut attrs = NodeAttributes::new();
    for h in headers.iter().skip(1) {
        attrs.names.push(h.to_owned());
        attrs.categories.insert(h.to_owned(), BTreeSet::new());
    }
    let mut warnings = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            Error::parse(e.position().map(|p| p.line()).unwrap_or(0), e.to_string())
        })?;
        let line = line_of(&row);
        let node = row.get(0).unwrap_or("");
        if node.is_empty() {
            return Err(Error::parse(line, "empty node id"));
        }
        if let Some(g) = graph {
            if g.index_of(node).is_none() {
                warnings.push(format!("line {line}: node `{node}` is not in the graph"));
                continue;
            }
        }
        for (name, value) in headers.iter().zip(row.iter()).skip(1) {
            if value.is_empty() {
                continue;
            }
            if let Some(allowed) = declared.get(name) {
                if !allowed.contains(value) {
                    return Err(Error::OutOfRange {
                        line,
                        field: name.to_owned(),
                        value: value.to_owned(),
                        allowed: allowed.iter().cloned().collect::<Vec<_>>().join("|"),
                    });
                }
            }
            attrs.insert(node, name, value);
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Loaded {
        value: attrs,
        warnings,
    })
}

pub fn load_attributes(
    path: &Path,
    declared: &BTreeMap<String, BTreeSet<String>>,
    graph: Option<&InteractionGraph>,
) -> Result<Loaded<NodeAttributes>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_attributes(std::io::BufReader::new(file), declared, graph)
}
