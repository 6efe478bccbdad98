//! Per-realization transmission counts from a branching tree.
//!
//! The count of a tree edge is the number of nodes that received the
//! spreading through it: the size of the subtree hanging below the edge's
//! child. Edges outside the tree count zero.

use crate::diffusion::BranchingTree;
use crate::graph::Graph;
use crate::Result;

/// Leaf-peeling ("river basin") accumulation.
///
/// Leaves are removed one at a time. Removing leaf `v` with parent `p` adds
/// one to the count of `(v, p)` and then passes the whole count of `(v, p)`
/// on to `p`'s own parent edge. Once all of `p`'s children are gone, `p` is a
/// leaf itself.
pub fn river_basin_counts(g: &Graph, bt: &BranchingTree) -> Result<Vec<u32>> {
    bt.validate(g)?;
    let mut counts = vec![0u32; g.edge_count()];
    let mut remaining = vec![0u32; g.node_count()];
    for (_, p, _) in bt.tree_edges() {
        remaining[p as usize] += 1;
    }
    let root = bt.root();
    let mut leaves: Vec<_> = bt
        .reached()
        .iter()
        .copied()
        .filter(|&v| v != root && remaining[v as usize] == 0)
        .collect();
    while let Some(v) = leaves.pop() {
        let (p, e) = bt.parent(v).expect("non-root node has a parent");
        counts[e as usize] += 1;
        if let Some((_, up)) = bt.parent(p) {
            counts[up as usize] += counts[e as usize];
        }
        remaining[p as usize] -= 1;
        if remaining[p as usize] == 0 && p != root {
            leaves.push(p);
        }
    }
    Ok(counts)
}

/// Same counts from one reverse pass over the infection order, which lists
/// every node after its parent.
pub fn subtree_size_counts(g: &Graph, bt: &BranchingTree) -> Result<Vec<u32>> {
    bt.validate(g)?;
    let mut counts = vec![0u32; g.edge_count()];
    let mut size = vec![0u32; g.node_count()];
    for &v in bt.reached().iter().rev() {
        size[v as usize] += 1;
        if let Some((p, e)) = bt.parent(v) {
            counts[e as usize] = size[v as usize];
            size[p as usize] += size[v as usize];
        }
    }
    Ok(counts)
}
