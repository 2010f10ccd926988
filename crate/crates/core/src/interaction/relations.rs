use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::io::{csv_reader, line_of, required_column};
use super::{InteractionGraph, Loaded};
use crate::error::{Error, Result};

/// How surveyed relations are coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelationKind {
    /// `0` or `1`.
    Binary,
    /// Integer levels `1..=levels`.
    Ordered { levels: u32 },
    /// Strictly inside `(0, 1)`.
    Continuous,
}

impl RelationKind {
    fn check(&self, value: f64) -> Result<(), String> {
        match *self {
            RelationKind::Binary if value == 0.0 || value == 1.0 => Ok(()),
            RelationKind::Binary => Err("0|1".into()),
            RelationKind::Ordered { levels }
                if value.fract() == 0.0 && value >= 1.0 && value <= f64::from(levels) =>
            {
                Ok(())
            }
            RelationKind::Ordered { levels } => Err(format!("1..={levels}")),
            RelationKind::Continuous if value > 0.0 && value < 1.0 => Ok(()),
            RelationKind::Continuous => Err("(0, 1)".into()),
        }
    }
}

/// Surveyed relations `r[v][w]` for a subset of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationLabels {
    kind: RelationKind,
    entries: BTreeMap<(String, String), f64>,
    surveyed: BTreeSet<String>,
}

impl RelationLabels {
    pub fn new(kind: RelationKind) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
            surveyed: BTreeSet::new(),
        }
    }

    /// Adds one labeled dyad; both endpoints join the surveyed set.
    pub fn insert(&mut self, source: &str, target: &str, value: f64) -> Result<()> {
        self.kind.check(value).map_err(|allowed| Error::OutOfRange {
            line: 0,
            field: "relation".into(),
            value: value.to_string(),
            allowed,
        })?;
        self.surveyed.insert(source.to_owned());
        self.surveyed.insert(target.to_owned());
        self.entries
            .insert((source.to_owned(), target.to_owned()), value);
        Ok(())
    }

    /// Marks a node as surveyed even if it reported no relation.
    pub fn add_surveyed(&mut self, node: &str) {
        self.surveyed.insert(node.to_owned());
    }

    pub fn kind(&self) -> RelationKind {
        self.kind
    }

    pub fn get(&self, source: &str, target: &str) -> Option<f64> {
        self.entries
            .get(&(source.to_owned(), target.to_owned()))
            .copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries
            .iter()
            .map(|((s, t), &r)| (s.as_str(), t.as_str(), r))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn surveyed(&self) -> &BTreeSet<String> {
        &self.surveyed
    }
}

/// Parses `source,target,relation` rows.
///
/// Rows mentioning nodes absent from `graph` are dropped with a warning.
/// Repeated dyads must agree.
pub fn read_relations<R: Read>(
    reader: R,
    kind: RelationKind,
    graph: Option<&InteractionGraph>,
) -> Result<Loaded<RelationLabels>> {
    if let RelationKind::Ordered { levels } = kind {
        if levels < 3 {
            return Err(Error::InvalidConfig(format!(
                "ordered relations need at least 3 levels, got {levels}"
            )));
        }
    }
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    let src = required_column(&headers, "source")?;
    let dst = required_column(&headers, "target")?;
    let rel = required_column(&headers, "relation")?;

    let mut labels = RelationLabels::new(kind);
    let mut warnings = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            Error::parse(e.position().map(|p| p.line()).unwrap_or(0), e.to_string())
        })?;
        let line = line_of(&row);
        let source = row.get(src).unwrap_or("");
        let target = row.get(dst).unwrap_or("");
        let raw = row.get(rel).unwrap_or("");
        if source.is_empty() || target.is_empty() {
            return Err(Error::parse(line, "empty node id"));
        }
        let value: f64 = raw
            .parse()
            .map_err(|_| Error::parse(line, format!("relation `{raw}` is not a number")))?;
        kind.check(value).map_err(|allowed| Error::OutOfRange {
            line,
            field: "relation".into(),
            value: raw.to_owned(),
            allowed,
        })?;
        if source == target {
            warnings.push(format!("line {line}: self-relation on `{source}` ignored"));
            continue;
        }
        if let Some(g) = graph {
            if let Some(missing) = [source, target]
                .into_iter()
                .find(|id| g.index_of(id).is_none())
            {
                warnings.push(format!("line {line}: node `{missing}` is not in the graph"));
                continue;
            }
        }
        if let Some(prev) = labels.get(source, target) {
            if prev != value {
                return Err(Error::parse(
                    line,
                    format!("conflicting relation for ({source}, {target}): {prev} vs {value}"),
                ));
            }
        }
        labels.insert(source, target, value)?;
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Loaded {
        value: labels,
        warnings,
    })
}

pub fn load_relations(
    path: &Path,
    kind: RelationKind,
    graph: Option<&InteractionGraph>,
) -> Result<Loaded<RelationLabels>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_relations(std::io::BufReader::new(file), kind, graph)
}

/// Writes `source,target,relation` in key order.
pub fn write_relations<W: std::io::Write>(labels: &RelationLabels, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::parse(0, e.to_string());
    wtr.write_record(["source", "target", "relation"]).map_err(map)?;
    for (s, t, r) in labels.iter() {
        wtr.write_record([s, t, &r.to_string()]).map_err(map)?;
    }
    wtr.flush().map_err(|e| Error::io("<relations>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only() {
        let l = read_relations(
            "source,target,relation\n".as_bytes(),
            RelationKind::Binary,
            None,
        )
        .unwrap();
        assert!(l.value.is_empty());
        assert!(l.value.surveyed().is_empty());
    }

    #[test]
    fn continuous_out_of_range() {
        let err = read_relations(
            "source,target,relation\na,b,0.4\na,c,1.2\n".as_bytes(),
            RelationKind::Continuous,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutOfRange { line: 3, .. }));
    }

    #[test]
    fn ordered_levels_checked() {
        let kind = RelationKind::Ordered { levels: 4 };
        assert!(read_relations("source,target,relation\na,b,4\n".as_bytes(), kind, None).is_ok());
        assert!(read_relations("source,target,relation\na,b,5\n".as_bytes(), kind, None).is_err());
        assert!(
            read_relations("source,target,relation\na,b,2.5\n".as_bytes(), kind, None).is_err()
        );
    }

    #[test]
    fn surveyed_set_covers_endpoints() {
        let l = read_relations(
            "source,target,relation\na,b,1\nc,b,1\n".as_bytes(),
            RelationKind::Binary,
            None,
        )
        .unwrap()
        .value;
        assert_eq!(l.len(), 2);
        for (s, t, _) in l.iter() {
            assert!(l.surveyed().contains(s) && l.surveyed().contains(t));
        }
        assert_eq!(l.surveyed().len(), 3);
    }

    #[test]
    fn missing_relation_column() {
        let err =
            read_relations("source,target\na,b\n".as_bytes(), RelationKind::Binary, None)
                .unwrap_err();
        assert!(matches!(err, Error::MissingColumn(_)));
    }

    #[test]
    fn write_then_read() {
        let mut l = RelationLabels::new(RelationKind::Binary);
        l.insert("a", "b", 1.0).unwrap();
        l.insert("b", "c", 0.0).unwrap();
        let mut buf = Vec::new();
        write_relations(&l, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "source,target,relation\na,b,1\nb,c,0\n");
        let back = read_relations(buf.as_slice(), RelationKind::Binary, None).unwrap();
        assert_eq!(back.value, l);
    }
}
