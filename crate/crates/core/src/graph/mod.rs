//! Static undirected graphs in compressed adjacency form.
//!
//! A [`Graph`] is immutable once built. Every undirected edge has a dense id
//! in `0..edge_count()`, assigned in ascending `(min(u,v), max(u,v))` order so
//! the ids do not depend on the order edges were supplied in.

mod build;
mod events;
mod generate;
mod ops;

pub use build::{build_graph, parse_edge_list, BuildStats, EdgeRecord};
pub use events::{aggregate_events, parse_event_list, AggregateStats, EventRecord, EventStream};
pub use generate::{block_of, generate_er, generate_sbm, generate_sbm_events, SbmEventParams};
pub use ops::{
    bfs_distances, components, k_core, largest_connected_component, preprocess, PreprocessOptions,
    PreprocessSummary, StageCounts, UNREACHABLE,
};

pub type NodeId = u32;
pub type EdgeId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    incident: Vec<EdgeId>,
    endpoints: Vec<(NodeId, NodeId)>,
    weights: Vec<f64>,
    /// Raw identifier of each node, carried through subgraph extraction.
    labels: Vec<u64>,
}

impl Graph {
    /// Builds a graph from already-canonical edges: `u < v`, sorted, unique,
    /// weights non-negative. Callers outside this module go through
    /// [`build_graph`].
    pub(crate) fn from_canonical(
        node_count: usize,
        endpoints: Vec<(NodeId, NodeId)>,
        weights: Vec<f64>,
        labels: Vec<u64>,
    ) -> Self {
        debug_assert_eq!(endpoints.len(), weights.len());
        debug_assert_eq!(labels.len(), node_count);
        debug_assert!(endpoints.windows(2).all(|w| w[0] < w[1]));

        let mut degree = vec![0usize; node_count];
        for &(u, v) in &endpoints {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let total = *offsets.last().unwrap();
        let mut neighbors = vec![0; total];
        let mut incident = vec![0; total];
        let mut cursor: Vec<usize> = offsets[..node_count].to_vec();
        for (e, &(u, v)) in endpoints.iter().enumerate() {
            let slot = cursor[u as usize];
            neighbors[slot] = v;
            incident[slot] = e as EdgeId;
            cursor[u as usize] += 1;
        }
        for (e, &(u, v)) in endpoints.iter().enumerate() {
            let slot = cursor[v as usize];
            neighbors[slot] = u;
            incident[slot] = e as EdgeId;
            cursor[v as usize] += 1;
        }
        for n in 0..node_count {
            let (lo, hi) = (offsets[n], offsets[n + 1]);
            let mut pairs: Vec<(NodeId, EdgeId)> = neighbors[lo..hi]
                .iter()
                .copied()
                .zip(incident[lo..hi].iter().copied())
                .collect();
            pairs.sort_unstable();
            for (i, (nb, e)) in pairs.into_iter().enumerate() {
                neighbors[lo + i] = nb;
                incident[lo + i] = e;
            }
        }

        Graph {
            offsets,
            neighbors,
            incident,
            endpoints,
            weights,
            labels,
        }
    }

    pub fn empty(node_count: usize) -> Self {
        Graph::from_canonical(
            node_count,
            Vec::new(),
            Vec::new(),
            (0..node_count as u64).collect(),
        )
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    #[inline]
    pub fn degree(&self, node: NodeId) -> usize {
        let n = node as usize;
        self.offsets[n + 1] - self.offsets[n]
    }

    /// Neighbour ids of `node`, ascending.
    #[inline]
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        let n = node as usize;
        &self.neighbors[self.offsets[n]..self.offsets[n + 1]]
    }

    /// Edge ids aligned with [`Graph::neighbors`].
    #[inline]
    pub fn incident_edges(&self, node: NodeId) -> &[EdgeId] {
        let n = node as usize;
        &self.incident[self.offsets[n]..self.offsets[n + 1]]
    }

    /// `(neighbour, edge id)` pairs of `node`.
    pub fn adjacency(&self, node: NodeId) -> impl Iterator<Item = (NodeId, EdgeId)> + '_ {
        self.neighbors(node)
            .iter()
            .copied()
            .zip(self.incident_edges(node).iter().copied())
    }

    /// Endpoints of `edge` with the smaller id first.
    #[inline]
    pub fn endpoints(&self, edge: EdgeId) -> (NodeId, NodeId) {
        self.endpoints[edge as usize]
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.endpoints
    }

    #[inline]
    pub fn weight(&self, edge: EdgeId) -> f64 {
        self.weights[edge as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self, node: NodeId) -> u64 {
        self.labels[node as usize]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Replaces the raw node labels, e.g. after reloading a preprocessed
    /// graph together with its node map.
    pub fn with_labels(mut self, labels: Vec<u64>) -> crate::Result<Self> {
        if labels.len() != self.node_count() {
            return Err(crate::Error::arg(format!(
                "label count {} does not match node count {}",
                labels.len(),
                self.node_count()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Pads the graph with isolated nodes up to `node_count`; an edge list
    /// alone cannot record nodes without links.
    pub fn with_node_count(self, node_count: usize) -> crate::Result<Self> {
        let n = self.node_count();
        if node_count < n {
            return Err(crate::Error::arg(format!(
                "cannot shrink a graph of {n} nodes to {node_count}"
            )));
        }
        if node_count == n {
            return Ok(self);
        }
        let mut labels = self.labels;
        labels.extend(n as u64..node_count as u64);
        Ok(Graph::from_canonical(
            node_count,
            self.endpoints,
            self.weights,
            labels,
        ))
    }

    /// Edge id joining `u` and `v`, if any.
    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        if u as usize >= self.node_count() || v as usize >= self.node_count() {
            return None;
        }
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        let nbrs = self.neighbors(a);
        nbrs.binary_search(&b)
            .ok()
            .map(|i| self.incident_edges(a)[i])
    }

    /// True when every weight equals 1.
    pub fn is_unit_weighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Induced subgraph on the nodes where `keep` is true. Surviving nodes are
    /// renumbered densely in ascending old-id order; labels follow them.
    pub fn induced_subgraph(&self, keep: &[bool]) -> Graph {
        debug_assert_eq!(keep.len(), self.node_count());
        let mut new_id = vec![NodeId::MAX; self.node_count()];
        let mut labels = Vec::new();
        for (old, &k) in keep.iter().enumerate() {
            if k {
                new_id[old] = labels.len() as NodeId;
                labels.push(self.labels[old]);
            }
        }
        let mut endpoints = Vec::new();
        let mut weights = Vec::new();
        for (e, &(u, v)) in self.endpoints.iter().enumerate() {
            if keep[u as usize] && keep[v as usize] {
                // Renumbering is monotone, so canonical order is preserved.
                endpoints.push((new_id[u as usize], new_id[v as usize]));
                weights.push(self.weights[e]);
            }
        }
        Graph::from_canonical(labels.len(), endpoints, weights, labels)
    }
}
