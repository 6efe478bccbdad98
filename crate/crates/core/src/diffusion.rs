//! Susceptible-Infected spreading with branching-tree recording.
//!
//! The process runs in synchronous rounds. In every round each edge between
//! an infected and a susceptible node fires independently with probability
//! `beta`. A susceptible node hit by at least one firing edge becomes
//! infected, and its parent is drawn uniformly among the infectors whose
//! edges fired at it in that round. The run stops once no infected node has
//! a susceptible neighbour, so the tree always spans the seed's component.

use std::io::Write;

use rand::Rng;

use crate::graph::{EdgeId, Graph, NodeId, UNREACHABLE};
use crate::{Error, Result};

/// Infection tree of one SI realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingTree {
    root: NodeId,
    parent: Vec<Option<(NodeId, EdgeId)>>,
    round: Vec<u32>,
    /// Generation of each node: number of tree edges up to the root.
    depth: Vec<u32>,
    /// Reached nodes in order of infection; `order[0]` is the root and
    /// rounds are non-decreasing along it.
    order: Vec<NodeId>,
}

impl BranchingTree {
    /// Assembles a tree from parent pointers. Infection rounds are taken to
    /// equal depths, as in a `beta = 1` run. Fails if the pointers do not form a tree rooted at `root`.
    pub fn from_parents(root: NodeId, parent: Vec<Option<(NodeId, EdgeId)>>) -> Result<Self> {
        let n = parent.len();
        if root as usize >= n {
            return Err(Error::Structure(format!("root {root} out of range")));
        }
        if parent[root as usize].is_some() {
            return Err(Error::Structure("root has a parent".into()));
        }
        let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some((p, _)) = p {
                if *p as usize >= n {
                    return Err(Error::Structure(format!("parent {p} of {v} out of range")));
                }
                children[*p as usize].push(v as NodeId);
            }
        }
        let mut round = vec![UNREACHABLE; n];
        let mut order = vec![root];
        round[root as usize] = 0;
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &c in &children[u as usize] {
                round[c as usize] = round[u as usize] + 1;
                order.push(c);
            }
        }
        let with_parent = parent.iter().filter(|p| p.is_some()).count();
        if with_parent + 1 != order.len() {
            return Err(Error::Structure(
                "parent pointers contain a cycle or a node detached from the root".into(),
            ));
        }
        Ok(BranchingTree {
            root,
            parent,
            depth: round.clone(),
            round,
            order,
        })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    /// `(parent, edge id)` of `node`, or `None` for the root and unreached nodes.
    pub fn parent(&self, node: NodeId) -> Option<(NodeId, EdgeId)> {
        self.parent[node as usize]
    }

    /// Round at which `node` got infected; [`UNREACHABLE`] if never.
    pub fn infection_round(&self, node: NodeId) -> u32 {
        self.round[node as usize]
    }

    /// Number of tree edges between `node` and the root; [`UNREACHABLE`] if
    /// never reached. Equals the infection round when `beta = 1`.
    pub fn depth(&self, node: NodeId) -> u32 {
        self.depth[node as usize]
    }

    pub fn is_reached(&self, node: NodeId) -> bool {
        self.round[node as usize] != UNREACHABLE
    }

    /// Reached nodes, root first, in non-decreasing round order. Every node
    /// appears after its parent.
    pub fn reached(&self) -> &[NodeId] {
        &self.order
    }

    pub fn reached_count(&self) -> usize {
        self.order.len()
    }

    /// `(child, parent, edge)` triples of every tree edge.
    pub fn tree_edges(&self) -> impl Iterator<Item = (NodeId, NodeId, EdgeId)> + '_ {
        self.order[1..].iter().map(move |&c| {
            let (p, e) = self.parent[c as usize].expect("non-root reached node has a parent");
            (c, p, e)
        })
    }

    /// Checks that the tree lives on `g`: sizes agree and every parent edge
    /// is an edge of `g` joining the child to its parent.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.node_count() != g.node_count() {
            return Err(Error::Structure(format!(
                "tree covers {} nodes, graph has {}",
                self.node_count(),
                g.node_count()
            )));
        }
        for (c, p, e) in self.tree_edges() {
            if e as usize >= g.edge_count() {
                return Err(Error::Structure(format!("edge id {e} out of range")));
            }
            let (a, b) = g.endpoints(e);
            if !((a == c && b == p) || (a == p && b == c)) {
                return Err(Error::Structure(format!(
                    "edge {e} does not join child {c} and parent {p}"
                )));
            }
        }
        Ok(())
    }

    /// Writes `child parent round` lines for every reached non-root node.
    pub fn write_dump<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# root {}", self.root)?;
        for (c, p, _) in self.tree_edges() {
            writeln!(out, "{} {} {}", c, p, self.round[c as usize])?;
        }
        Ok(())
    }
}

/// Runs one SI realization from `seed` and returns its branching tree.
pub fn simulate_si<R: Rng + ?Sized>(
    g: &Graph,
    seed: NodeId,
    beta: f64,
    rng: &mut R,
) -> Result<BranchingTree> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::arg(format!("beta must lie in (0, 1], got {beta}")));
    }
    let n = g.node_count();
    if seed as usize >= n {
        return Err(Error::arg(format!(
            "seed {seed} out of range for {n} nodes"
        )));
    }

    let mut round = vec![UNREACHABLE; n];
    let mut parent: Vec<Option<(NodeId, EdgeId)>> = vec![None; n];
    // Number of edges that fired at a node during the current round.
    let mut hits = vec![0u32; n];
    let mut depth = vec![UNREACHABLE; n];
    let mut order = vec![seed];
    round[seed as usize] = 0;
    depth[seed as usize] = 0;

    let mut active = vec![seed];
    let mut next_active = Vec::new();
    let mut newly = Vec::new();
    let mut t = 0u32;
    while !active.is_empty() {
        t += 1;
        for &u in &active {
            let mut missed = false;
            for (v, e) in g.adjacency(u) {
                let vi = v as usize;
                // Susceptible at the start of this round: unreached, or hit
                // earlier in this same round.
                if round[vi] != UNREACHABLE && hits[vi] == 0 {
                    continue;
                }
                let fired = beta >= 1.0 || rng.random::<f64>() < beta;
                if !fired {
                    missed = true;
                    continue;
                }
                hits[vi] += 1;
                if hits[vi] == 1 {
                    round[vi] = t;
                    parent[vi] = Some((u, e));
                    newly.push(v);
                } else if rng.random_range(0..hits[vi]) == 0 {
                    // Reservoir step keeps the parent uniform over infectors.
                    parent[vi] = Some((u, e));
                }
            }
            if missed {
                next_active.push(u);
            }
        }
        for &v in &newly {
            hits[v as usize] = 0;
        }
        for &v in &newly {
            let (p, _) = parent[v as usize].unwrap();
            depth[v as usize] = depth[p as usize] + 1;
        }
        order.extend_from_slice(&newly);
        next_active.append(&mut newly);
        std::mem::swap(&mut active, &mut next_active);
        next_active.clear();
    }

    Ok(BranchingTree {
        root: seed,
        parent,
        round,
        depth,
        order,
    })
}
