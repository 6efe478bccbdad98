use std::collections::BTreeMap;
use std::io::BufRead;

use super::{Graph, NodeId};
use crate::{Error, Result};

/// One line of an edge list: `u v [w]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecord {
    pub u: u64,
    pub v: u64,
    pub weight: Option<f64>,
}

impl EdgeRecord {
    pub fn new(u: u64, v: u64) -> Self {
        EdgeRecord { u, v, weight: None }
    }

    pub fn weighted(u: u64, v: u64, weight: f64) -> Self {
        EdgeRecord {
            u,
            v,
            weight: Some(weight),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub records: usize,
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

/// Builds a graph whose node ids are the record ids themselves, so the node
/// count is one more than the largest id seen (isolated ids included).
///
/// Duplicate pairs are merged by summing weights, self-loops are dropped and
/// counted, and a missing weight counts as 1.
pub fn build_graph(records: &[EdgeRecord]) -> Result<(Graph, BuildStats)> {
    let mut stats = BuildStats {
        records: records.len(),
        ..Default::default()
    };
    let mut max_id: Option<u64> = None;
    let mut merged: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();

    for (i, r) in records.iter().enumerate() {
        let hi = r.u.max(r.v);
        if hi >= NodeId::MAX as u64 {
            return Err(Error::arg(format!(
                "record {i}: node id {hi} exceeds the supported range"
            )));
        }
        max_id = Some(max_id.map_or(hi, |m| m.max(hi)));
        let w = r.weight.unwrap_or(1.0);
        if !w.is_finite() || w < 0.0 {
            return Err(Error::arg(format!("record {i}: invalid weight {w}")));
        }
        if r.u == r.v {
            stats.self_loops_dropped += 1;
            continue;
        }
        let key = (r.u.min(r.v) as NodeId, r.u.max(r.v) as NodeId);
        match merged.get_mut(&key) {
            Some(acc) => {
                *acc += w;
                stats.duplicates_merged += 1;
            }
            None => {
                merged.insert(key, w);
            }
        }
    }

    let node_count = max_id.map_or(0, |m| m as usize + 1);
    let (endpoints, weights): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
    let labels = (0..node_count as u64).collect();
    Ok((
        Graph::from_canonical(node_count, endpoints, weights, labels),
        stats,
    ))
}

/// Parses `u v [w]` lines. Blank lines and everything after `#` are ignored.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Vec<EdgeRecord>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `u v [w]`, found {} fields", fields.len()),
            });
        }
        let id = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid node id `{s}`"),
            })
        };
        let u = id(fields[0])?;
        let v = id(fields[1])?;
        let weight = match fields.get(2) {
            Some(s) => {
                let w: f64 = s.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid weight `{s}`"),
                })?;
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("weight must be finite and non-negative, got {w}"),
                    });
                }
                Some(w)
            }
            None => None,
        };
        out.push(EdgeRecord { u, v, weight });
    }
    Ok(out)
}
