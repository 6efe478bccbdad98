use std::collections::BTreeMap;
use std::io::BufRead;

use super::{Graph, NodeId};
use crate::{Error, Result};

/// A single timestamped interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventRecord {
    pub time: u64,
    pub src: u64,
    pub dst: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventStream {
    pub directed: bool,
    pub events: Vec<EventRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AggregateStats {
    pub events: usize,
    pub self_events_dropped: usize,
    pub pairs: usize,
    pub one_way_pairs_dropped: usize,
}

/// Collapses an event stream into a static graph whose edge weights are the
/// total number of events between each pair, in either direction.
///
/// With `require_mutual` a pair is linked only if it has at least one event
/// in each direction; this needs a directed stream. Nodes are every id seen
/// in the stream, renumbered densely in ascending raw-id order, with the raw
/// ids kept as labels.
pub fn aggregate_events(
    stream: &EventStream,
    require_mutual: bool,
) -> Result<(Graph, AggregateStats)> {
    if require_mutual && !stream.directed {
        return Err(Error::Config(
            "the mutual-link filter needs a directed event stream".into(),
        ));
    }
    let mut stats = AggregateStats {
        events: stream.events.len(),
        ..Default::default()
    };

    let mut ids: Vec<u64> = stream.events.iter().flat_map(|e| [e.src, e.dst]).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() >= NodeId::MAX as usize {
        return Err(Error::arg("too many distinct node ids"));
    }
    let dense = |raw: u64| ids.binary_search(&raw).unwrap() as NodeId;

    // (low, high) -> (events low->high, events high->low)
    let mut pairs: BTreeMap<(NodeId, NodeId), (u64, u64)> = BTreeMap::new();
    for e in &stream.events {
        if e.src == e.dst {
            stats.self_events_dropped += 1;
            continue;
        }
        let (s, d) = (dense(e.src), dense(e.dst));
        let entry = pairs.entry((s.min(d), s.max(d))).or_default();
        if s < d {
            entry.0 += 1;
        } else {
            entry.1 += 1;
        }
    }
    stats.pairs = pairs.len();

    let mut endpoints = Vec::with_capacity(pairs.len());
    let mut weights = Vec::with_capacity(pairs.len());
    for (key, (fwd, bwd)) in pairs {
        if require_mutual && (fwd == 0 || bwd == 0) {
            stats.one_way_pairs_dropped += 1;
            continue;
        }
        endpoints.push(key);
        weights.push((fwd + bwd) as f64);
    }
    Ok((
        Graph::from_canonical(ids.len(), endpoints, weights, ids),
        stats,
    ))
}

/// Parses an event list. The first content line must be the header
/// `directed=true` or `directed=false`; every following line is `t src dst`.
/// `#` starts a comment.
pub fn parse_event_list<R: BufRead>(reader: R) -> Result<EventStream> {
    let mut directed: Option<bool> = None;
    let mut events = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if directed.is_none() {
            let flag = content
                .strip_prefix("directed=")
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: "expected header `directed=true|false`".into(),
                })?;
            directed = Some(match flag.trim() {
                "true" => true,
                "false" => false,
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("invalid directed flag `{other}`"),
                    })
                }
            });
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `t src dst`, found {} fields", fields.len()),
            });
        }
        let num = |s: &str, what: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid {what} `{s}`"),
            })
        };
        events.push(EventRecord {
            time: num(fields[0], "timestamp")?,
            src: num(fields[1], "source id")?,
            dst: num(fields[2], "destination id")?,
        });
    }
    let directed = directed.ok_or(Error::Parse {
        line: 1,
        msg: "missing header `directed=true|false`".into(),
    })?;
    Ok(EventStream { directed, events })
}
