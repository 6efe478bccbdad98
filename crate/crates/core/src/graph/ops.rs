use std::collections::VecDeque;

use super::{Graph, NodeId};
use crate::{Error, Result};

/// Distance reported for nodes that cannot be reached.
pub const UNREACHABLE: u32 = u32::MAX;

/// Hop distances from `source`; unreachable nodes get [`UNREACHABLE`].
pub fn bfs_distances(g: &Graph, source: NodeId) -> Result<Vec<u32>> {
    if source as usize >= g.node_count() {
        return Err(Error::arg(format!(
            "source {source} out of range for {} nodes",
            g.node_count()
        )));
    }
    let mut dist = vec![UNREACHABLE; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u as usize] + 1;
        for &v in g.neighbors(u) {
            if dist[v as usize] == UNREACHABLE {
                dist[v as usize] = next;
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Connected-component index per node. Components are numbered in order of
/// their smallest node id.
pub fn components(g: &Graph) -> (usize, Vec<u32>) {
    let n = g.node_count();
    let mut comp = vec![u32::MAX; n];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        comp[start] = count;
        stack.push(start as NodeId);
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if comp[v as usize] == u32::MAX {
                    comp[v as usize] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (count as usize, comp)
}

/// Maximal subgraph in which every node has degree at least `k`, computed by
/// queue-driven peeling. Survivors are renumbered densely; their raw ids stay
/// available through [`Graph::labels`].
pub fn k_core(g: &Graph, k: usize) -> Result<Graph> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    let n = g.node_count();
    let mut degree: Vec<usize> = (0..n as NodeId).map(|u| g.degree(u)).collect();
    let mut alive = vec![true; n];
    let mut queue: Vec<NodeId> = (0..n as NodeId)
        .filter(|&u| degree[u as usize] < k)
        .collect();
    for &u in &queue {
        alive[u as usize] = false;
    }
    while let Some(u) = queue.pop() {
        for &v in g.neighbors(u) {
            let v = v as usize;
            if alive[v] {
                degree[v] -= 1;
                if degree[v] < k {
                    alive[v] = false;
                    queue.push(v as NodeId);
                }
            }
        }
    }
    Ok(g.induced_subgraph(&alive))
}

/// The component with the most nodes; ties go to the component holding the
/// smallest node id.
pub fn largest_connected_component(g: &Graph) -> Graph {
    if g.node_count() == 0 {
        return g.clone();
    }
    let (count, comp) = components(g);
    let mut sizes = vec![0usize; count];
    for &c in &comp {
        sizes[c as usize] += 1;
    }
    // Components are numbered by smallest member, so the first maximum wins.
    let best = sizes
        .iter()
        .enumerate()
        .fold(0, |best, (c, &s)| if s > sizes[best] { c } else { best }) as u32;
    let keep: Vec<bool> = comp.iter().map(|&c| c == best).collect();
    g.induced_subgraph(&keep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessOptions {
    pub k_core: Option<usize>,
    pub lcc: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            k_core: Some(2),
            lcc: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageCounts {
    pub stage: String,
    pub nodes: usize,
    pub edges: usize,
}

impl StageCounts {
    pub fn of(stage: impl Into<String>, g: &Graph) -> Self {
        StageCounts {
            stage: stage.into(),
            nodes: g.node_count(),
            edges: g.edge_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PreprocessSummary {
    pub stages: Vec<StageCounts>,
}

/// Applies k-core extraction and then LCC extraction, recording the node and
/// edge counts after each stage. The mutual-link filter, when wanted, happens
/// earlier during event aggregation.
pub fn preprocess(g: Graph, opts: &PreprocessOptions) -> Result<(Graph, PreprocessSummary)> {
    let mut summary = PreprocessSummary {
        stages: vec![StageCounts::of("input", &g)],
    };
    let mut g = g;
    if let Some(k) = opts.k_core {
        g = k_core(&g, k)?;
        summary
            .stages
            .push(StageCounts::of(format!("k_core_{k}"), &g));
    }
    if opts.lcc {
        g = largest_connected_component(&g);
        summary.stages.push(StageCounts::of("lcc", &g));
    }
    Ok((g, summary))
}
