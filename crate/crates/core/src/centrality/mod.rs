//! Link transmission centrality.
//!
//! One SI realization yields a branching tree; the transmission count of a
//! link in that realization is the number of nodes that were reached through
//! it. Averaging over realizations started from every node gives the exact
//! centrality, averaging over a sample of seeds gives the cheaper estimate.

mod estimate;
mod river_basin;
mod tail;

pub use estimate::{
    approx_ctr, exact_average_ctr, scan_unbias_distance, CtrEstimator, ScanRow, ScanTable,
};
pub use river_basin::{river_basin_counts, subtree_size_counts};
pub use tail::{ccdf, tail_exponent};

use crate::diffusion::BranchingTree;
use crate::graph::{EdgeId, Graph};
use crate::Result;

/// Averaged per-edge centrality, indexed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCentrality {
    pub values: Vec<f64>,
    /// Realizations that contributed to each edge's average.
    pub contributions: Vec<u64>,
    pub realizations: u64,
}

impl EdgeCentrality {
    /// Divides integer sums by per-edge contribution counts. Edges without
    /// contributions get 0.
    pub fn from_sums(sums: &[u64], contributions: Vec<u64>, realizations: u64) -> Self {
        let values = sums
            .iter()
            .zip(&contributions)
            .map(|(&s, &c)| if c == 0 { 0.0 } else { s as f64 / c as f64 })
            .collect();
        EdgeCentrality {
            values,
            contributions,
            realizations,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Edges that no realization contributed to.
    pub fn flagged(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.contributions
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(e, _)| e as EdgeId)
    }

    pub fn flagged_count(&self) -> usize {
        self.contributions.iter().filter(|&&c| c == 0).count()
    }
}

/// Transmission count of every edge in one realization.
pub fn per_realization_ctr(g: &Graph, bt: &BranchingTree) -> Result<Vec<u32>> {
    river_basin_counts(g, bt)
}
