//! Edge-list and feature-file ingestion.
//!
//! Edge lists are UTF-8 text with one `u v [w]` row per line, separated by
//! any whitespace. Lines starting with `#` are comments; a `# nodes: N`
//! comment fixes the node count so trailing isolated nodes survive a
//! round trip. Feature files are headerless CSV unless told otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{EdgeStats, Graph};

/// Original labels of the nodes, indexed by dense id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMap {
    pub labels: Vec<String>,
    pub remapped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestReport {
    pub stats: EdgeStats,
    pub node_map: NodeMap,
}

struct RawRow<'a> {
    u: &'a str,
    v: &'a str,
    w: f64,
}

fn parse_rows(text: &str) -> Result<(Vec<RawRow<'_>>, Option<usize>)> {
    let mut rows = Vec::new();
    let mut declared = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("nodes:") {
                let n = n.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad node count {:?}", n.trim()),
                })?;
                declared = Some(n);
            }
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let w = match tokens.len() {
            2 => 1.0,
            3 => tokens[2].parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad weight {:?}", tokens[2]),
            })?,
            k => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected `u v [w]`, found {k} fields"),
                })
            }
        };
        if w < 0.0 {
            return Err(Error::Domain(format!(
                "negative edge weight {w} at line {lineno}"
            )));
        }
        rows.push(RawRow {
            u: tokens[0],
            v: tokens[1],
            w,
        });
    }
    Ok((rows, declared))
}

/// Parses an edge list. `n_nodes`, when known (feature row count or an
/// explicit flag), forces dense ids in `0..n_nodes`; otherwise ids that
/// already cover `0..=max` are kept and anything else is remapped in
/// sorted order.
pub fn parse_edge_list(text: &str, n_nodes: Option<usize>) -> Result<(Graph, IngestReport)> {
    let (rows, declared) = parse_rows(text)?;
    let n_hint = match (n_nodes, declared) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Shape(format!(
                "edge list declares {b} nodes but {a} were expected"
            )))
        }
        (a, b) => a.or(b),
    };

    let (n, ids, node_map) = match n_hint {
        Some(n) => {
            let mut ids = Vec::with_capacity(rows.len());
            for r in &rows {
                let u = dense_id(r.u, n)?;
                let v = dense_id(r.v, n)?;
                ids.push((u, v, r.w));
            }
            (n, ids, identity_map(n))
        }
        None => remap(&rows),
    };

    let (graph, stats) = Graph::from_edges_with_stats(n, ids)?;
    Ok((graph, IngestReport { stats, node_map }))
}

fn dense_id(token: &str, n: usize) -> Result<usize> {
    let id = token
        .parse::<usize>()
        .map_err(|_| Error::Domain(format!("node id {token:?} is not a dense integer id")))?;
    if id >= n {
        return Err(Error::Shape(format!(
            "node id {id} out of range for {n} nodes (feature rows or declared count)"
        )));
    }
    Ok(id)
}

fn identity_map(n: usize) -> NodeMap {
    NodeMap {
        labels: (0..n).map(|i| i.to_string()).collect(),
        remapped: false,
    }
}

fn remap(rows: &[RawRow<'_>]) -> (usize, Vec<(usize, usize, f64)>, NodeMap) {
    let tokens = || rows.iter().flat_map(|r| [r.u, r.v]);
    let numeric: Option<BTreeSet<usize>> = tokens().map(|t| t.parse::<usize>().ok()).collect();

    match numeric {
        Some(set) => {
            let dense = set.iter().enumerate().all(|(i, &id)| i == id);
            let index: BTreeMap<usize, usize> =
                set.iter().enumerate().map(|(i, &id)| (id, i)).collect();
            let lookup = |t: &str| index[&t.parse::<usize>().unwrap()];
            let ids = rows.iter().map(|r| (lookup(r.u), lookup(r.v), r.w)).collect();
            let node_map = NodeMap {
                labels: set.iter().map(|id| id.to_string()).collect(),
                remapped: !dense,
            };
            (set.len(), ids, node_map)
        }
        None => {
            let set: BTreeSet<&str> = tokens().collect();
            let index: BTreeMap<&str, usize> = set.iter().enumerate().map(|(i, &t)| (t, i)).collect();
            let ids = rows.iter().map(|r| (index[r.u], index[r.v], r.w)).collect();
            let node_map = NodeMap {
                labels: set.into_iter().map(str::to_owned).collect(),
                remapped: true,
            };
            (index.len(), ids, node_map)
        }
    }
}

/// Parses a numeric CSV feature matrix, one row per node.
pub fn parse_features(text: &str, has_header: bool) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Shape(format!(
                    "feature row at line {line} has {} columns, expected {w}",
                    record.len()
                )))
            }
            _ => {}
        }
        for field in record.iter() {
            let x = field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("bad feature value {field:?}"),
            })?;
            values.push(x);
        }
        rows += 1;
    }
    let cols = width.unwrap_or(0);
    Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Shape(e.to_string()))
}

/// Parses an edge list and an optional feature CSV into one graph. The
/// feature row count, when present, fixes N.
pub fn ingest_graph(
    edge_text: &str,
    features: Option<(&str, bool)>,
) -> Result<(Graph, IngestReport)> {
    match features {
        None => parse_edge_list(edge_text, None),
        Some((text, header)) => {
            let x = parse_features(text, header)?;
            let (g, report) = parse_edge_list(edge_text, Some(x.nrows()))?;
            Ok((g.with_features(x)?, report))
        }
    }
}

pub fn read_graph(
    edge_path: &Path,
    feature_path: Option<&Path>,
    header: bool,
) -> Result<(Graph, IngestReport)> {
    let edges = fs::read_to_string(edge_path)?;
    match feature_path {
        None => ingest_graph(&edges, None),
        Some(p) => {
            let feats = fs::read_to_string(p)?;
            ingest_graph(&edges, Some((&feats, header)))
        }
    }
}
