use std::io::{Read, Write};
use std::path::Path;

use super::{InteractionGraph, InteractionRecord};
use crate::error::{Error, Result};

pub(crate) fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

pub(crate) fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.eq_ignore_ascii_case(name))
}

pub(crate) fn required_column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    column(headers, name).ok_or_else(|| Error::MissingColumn(name.to_owned()))
}

pub(crate) fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn csv_err(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    Error::parse(line, err.to_string())
}

/// Parses `source,target[,timestamp][,weight]` rows. The header is required;
/// the optional columns are located by name.
pub fn read_interactions<R: Read>(reader: R) -> Result<Vec<InteractionRecord>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let src = required_column(&headers, "source")?;
    let dst = required_column(&headers, "target")?;
    let ts = column(&headers, "timestamp");
    let wt = column(&headers, "weight");

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = line_of(&row);
        let field = |i: usize| row.get(i).unwrap_or("");
        let source = field(src);
        let target = field(dst);
        if source.is_empty() || target.is_empty() {
            return Err(Error::parse(line, "empty node id"));
        }
        let timestamp = match ts.map(field) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<i64>()
                    .map_err(|_| Error::parse(line, format!("bad timestamp `{s}`")))?,
            ),
        };
        let weight = match wt.map(field) {
            None | Some("") => None,
            Some(s) => match s.parse::<u64>() {
                Ok(w) if w > 0 => Some(w),
                _ => {
                    return Err(Error::parse(
                        line,
                        format!("weight `{s}` is not a positive integer"),
                    ))
                }
            },
        };
        out.push(InteractionRecord {
            source: source.to_owned(),
            target: target.to_owned(),
            timestamp,
            weight,
            line: Some(line),
        });
    }
    Ok(out)
}

pub fn read_edge_list(path: &Path) -> Result<Vec<InteractionRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_interactions(std::io::BufReader::new(file))
}

/// Writes `source,target,weight`. Undirected graphs are written once per
/// unordered dyad so that re-ingesting with the same directedness
/// reproduces the counts exactly.
pub fn write_edge_list<W: Write>(g: &InteractionGraph, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::parse(0, e.to_string());
    wtr.write_record(["source", "target", "weight"]).map_err(map)?;
    for (v, w, c) in g.edges() {
        if !g.is_directed() && v > w {
            continue;
        }
        wtr.write_record([g.node_id(v), g.node_id(w), &c.to_string()])
            .map_err(map)?;
    }
    wtr.flush().map_err(|e| Error::io("<edge list>", e))?;
    Ok(())
}
