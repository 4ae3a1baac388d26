//! Plain-text edge lists (`u v w` per line) and per-vertex value files
//! (`v value` per line). `#` starts a comment; blank lines are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{GraphBuilder, WeightedGraph};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Where vertex measures come from when loading an edge list.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSource<T> {
    Constant(T),
    /// `v sigma` lines; vertices not listed get `default`.
    File {
        path: PathBuf,
        default: T,
    },
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn parse_number<T: Scalar>(tok: &str, line: usize) -> Result<T> {
    tok.parse::<T>().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{tok}` as a number"),
    })
}

/// Parses edge-list text into labelled records `(u, v, w, line)`.
pub fn parse_edge_list<T: Scalar>(text: &str) -> Result<Vec<(String, String, T, usize)>> {
    content_lines(text)
        .map(|(line, toks)| {
            if toks.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `u v w`, found {} fields", toks.len()),
                });
            }
            let w: T = parse_number(toks[2], line)?;
            if !w.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: "weight must be finite".into(),
                });
            }
            Ok((toks[0].to_string(), toks[1].to_string(), w, line))
        })
        .collect()
}

/// Parses `v value` lines into `(label, value, line)`.
pub fn parse_vertex_values<T: Scalar>(text: &str) -> Result<Vec<(String, T, usize)>> {
    content_lines(text)
        .map(|(line, toks)| {
            if toks.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `v value`, found {} fields", toks.len()),
                });
            }
            Ok((toks[0].to_string(), parse_number(toks[1], line)?, line))
        })
        .collect()
}

/// Dense index order for labels: numeric ascending when every label is a
/// non-negative integer, first appearance otherwise.
fn order_labels(seen: Vec<String>) -> Vec<String> {
    let numeric: Option<Vec<u64>> = seen.iter().map(|l| l.parse::<u64>().ok()).collect();
    match numeric {
        Some(nums) => {
            let mut pairs: Vec<(u64, String)> = nums.into_iter().zip(seen).collect();
            pairs.sort_by_key(|(k, _)| *k);
            pairs.dedup_by_key(|(k, _)| *k);
            pairs.into_iter().map(|(_, l)| l).collect()
        }
        None => seen,
    }
}

/// Builds a graph from edge-list text and an optional measure text.
pub fn graph_from_text<T: Scalar>(
    edges: &str,
    measure_text: Option<&str>,
    default_measure: T,
) -> Result<WeightedGraph<T>> {
    let records = parse_edge_list::<T>(edges)?;
    let mut seen = Vec::new();
    let mut first: HashMap<&str, ()> = HashMap::new();
    for (u, v, _, _) in &records {
        for l in [u, v] {
            if first.insert(l.as_str(), ()).is_none() {
                seen.push(l.clone());
            }
        }
    }
    if seen.is_empty() {
        return Err(Error::InvalidGraph("edge list contains no edges".into()));
    }
    let labels = order_labels(seen);
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut builder = GraphBuilder::with_labels(labels.clone());
    for (u, v, w, line) in &records {
        builder
            .add_edge(index[u.as_str()], index[v.as_str()], *w)
            .map_err(|e| Error::Parse {
                line: *line,
                message: e.to_string(),
            })?;
    }
    let mut measure = vec![default_measure; labels.len()];
    if let Some(text) = measure_text {
        for (label, s, line) in parse_vertex_values::<T>(text)? {
            let &x = index.get(label.as_str()).ok_or_else(|| Error::Parse {
                line,
                message: format!("measure given for unknown vertex `{label}`"),
            })?;
            measure[x] = s;
        }
    }
    builder.build(measure)
}

/// Loads a validated graph from an edge-list file.
pub fn load_edge_list<T: Scalar>(
    path: impl AsRef<Path>,
    measure: &MeasureSource<T>,
) -> Result<WeightedGraph<T>> {
    let edges = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    match measure {
        MeasureSource::Constant(c) => graph_from_text(&edges, None, *c),
        MeasureSource::File { path, default } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            graph_from_text(&edges, Some(&text), *default)
        }
    }
}

/// Serializes each undirected edge once as `label label weight`.
pub fn export_edge_list<T: Scalar>(g: &WeightedGraph<T>) -> String {
    let mut out = String::new();
    for (x, y, w) in g.edges() {
        let _ = writeln!(out, "{} {} {}", g.label(x), g.label(y), w);
    }
    out
}
