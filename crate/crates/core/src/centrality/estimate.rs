//! Averaging per-realization counts into transmission centrality.
//!
//! Realization `i` always draws from substream `(master_seed, seed node)`, so
//! the same seed node yields the same branching tree no matter which
//! estimator requested it or which worker ran it. Counts are summed as
//! integers and divided once at the end.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::index;
use rayon::prelude::*;

use super::{river_basin_counts, EdgeCentrality};
use crate::diffusion::simulate_si;
use crate::graph::{bfs_distances, components, Graph, NodeId};
use crate::rng::{substream, Domain};
use crate::ties::pearson;
use crate::{Error, Result};

/// Shared settings of the centrality estimators.
#[derive(Debug, Clone, Copy)]
pub struct CtrEstimator<'g> {
    graph: &'g Graph,
    beta: f64,
    master_seed: u64,
    progress_every: Option<u64>,
}

/// Integer accumulators for one or more masking distances.
#[derive(Debug, Clone)]
struct Tally {
    sums: Vec<Vec<u64>>,
    contributions: Vec<Vec<u64>>,
}

impl Tally {
    fn new(layers: usize, edges: usize) -> Self {
        Tally {
            sums: vec![vec![0; edges]; layers],
            contributions: vec![vec![0; edges]; layers],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.contributions.iter_mut().zip(other.contributions) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self
    }
}

impl<'g> CtrEstimator<'g> {
    pub fn new(graph: &'g Graph, beta: f64, master_seed: u64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::arg(format!("beta must lie in (0, 1], got {beta}")));
        }
        Ok(CtrEstimator {
            graph,
            beta,
            master_seed,
            progress_every: None,
        })
    }

    /// Logs progress every `n` completed realizations.
    pub fn progress_every(mut self, n: u64) -> Self {
        self.progress_every = (n > 0).then_some(n);
        self
    }

    /// Average over SI realizations started once from every node.
    pub fn exact(&self) -> Result<EdgeCentrality> {
        let g = self.graph;
        if g.node_count() == 0 {
            return Err(Error::arg("graph has no nodes"));
        }
        let (count, _) = components(g);
        if count > 1 {
            return Err(Error::Disconnected { components: count });
        }
        let seeds: Vec<NodeId> = (0..g.node_count() as NodeId).collect();
        self.with_seeds(&seeds, 0)
    }

    /// Distinct seeds drawn uniformly without replacement.
    pub fn sample_seeds(&self, num_seeds: usize) -> Result<Vec<NodeId>> {
        let n = self.graph.node_count();
        if num_seeds == 0 || num_seeds > n {
            return Err(Error::arg(format!(
                "num_seeds must lie in 1..={n}, got {num_seeds}"
            )));
        }
        let mut rng = substream(self.master_seed, Domain::SeedSample, 0);
        let mut seeds: Vec<NodeId> = index::sample(&mut rng, n, num_seeds)
            .into_iter()
            .map(|i| i as NodeId)
            .collect();
        seeds.sort_unstable();
        Ok(seeds)
    }

    /// Sampled estimator with distance-based unbiasing.
    pub fn approx(&self, num_seeds: usize, unbias_distance: u32) -> Result<EdgeCentrality> {
        let seeds = self.sample_seeds(num_seeds)?;
        self.with_seeds(&seeds, unbias_distance)
    }

    /// Estimator over an explicit seed list. In each realization an edge is
    /// masked when either endpoint lies closer than `unbias_distance` hops to
    /// the seed; each edge is averaged over the realizations that left it
    /// unmasked.
    pub fn with_seeds(&self, seeds: &[NodeId], unbias_distance: u32) -> Result<EdgeCentrality> {
        let mut tallies = self.tally(seeds, &[unbias_distance])?;
        Ok(EdgeCentrality::from_sums(
            &tallies.sums.pop().unwrap(),
            tallies.contributions.pop().unwrap(),
            seeds.len() as u64,
        ))
    }

    /// Runs the sampled estimator for every distance in `d_range` on one
    /// shared set of realizations and correlates each with `baseline`.
    pub fn scan(
        &self,
        num_seeds: usize,
        d_range: &[u32],
        baseline: &EdgeCentrality,
    ) -> Result<ScanTable> {
        if d_range.is_empty() {
            return Err(Error::arg("d_range must not be empty"));
        }
        if baseline.len() != self.graph.edge_count() {
            return Err(Error::arg("baseline does not cover every edge"));
        }
        let seeds = self.sample_seeds(num_seeds)?;
        let tallies = self.tally(&seeds, d_range)?;
        let rows: Vec<ScanRow> = d_range
            .iter()
            .zip(tallies.sums.iter().zip(tallies.contributions))
            .map(|(&d, (sums, contributions))| {
                let est = EdgeCentrality::from_sums(sums, contributions, seeds.len() as u64);
                let r = if est.values == baseline.values {
                    Some(1.0)
                } else {
                    pearson(&est.values, &baseline.values).ok().map(|c| c.r)
                };
                ScanRow {
                    d,
                    r,
                    flagged: est.flagged_count(),
                }
            })
            .collect();
        let recommended = rows
            .iter()
            .filter_map(|row| row.r.map(|r| (row.d, r)))
            .fold(None::<(u32, f64)>, |best, (d, r)| match best {
                Some((bd, br)) if br > r || (br == r && bd <= d) => Some((bd, br)),
                _ => Some((d, r)),
            })
            .map(|(d, _)| d);
        Ok(ScanTable { rows, recommended })
    }

    fn tally(&self, seeds: &[NodeId], distances: &[u32]) -> Result<Tally> {
        let g = self.graph;
        let n = g.node_count();
        if let Some(&bad) = seeds.iter().find(|&&s| s as usize >= n) {
            return Err(Error::arg(format!("seed {bad} out of range for {n} nodes")));
        }
        let edges = g.edge_count();
        let need_distances = distances.iter().any(|&d| d > 0);
        let done = AtomicU64::new(0);
        let total = seeds.len() as u64;

        let tally = seeds
            .par_iter()
            .try_fold(
                || Tally::new(distances.len(), edges),
                |mut local, &seed| -> Result<Tally> {
                    let mut rng = substream(self.master_seed, Domain::SiRealization, seed as u64);
                    let bt = simulate_si(g, seed, self.beta, &mut rng)?;
                    let counts = river_basin_counts(g, &bt)?;

                    let dist = if !need_distances {
                        None
                    } else if self.beta >= 1.0 {
                        // With beta = 1 infection rounds are hop distances.
                        Some(
                            (0..n as NodeId)
                                .map(|v| bt.infection_round(v))
                                .collect::<Vec<_>>(),
                        )
                    } else {
                        Some(bfs_distances(g, seed)?)
                    };
                    for (layer, &d) in distances.iter().enumerate() {
                        let sums = &mut local.sums[layer];
                        let contrib = &mut local.contributions[layer];
                        match &dist {
                            Some(dist) if d > 0 => {
                                for (e, &(u, v)) in g.edges().iter().enumerate() {
                                    if dist[u as usize].min(dist[v as usize]) >= d {
                                        sums[e] += counts[e] as u64;
                                        contrib[e] += 1;
                                    }
                                }
                            }
                            _ => {
                                for e in 0..edges {
                                    sums[e] += counts[e] as u64;
                                    contrib[e] += 1;
                                }
                            }
                        }
                    }

                    let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
                    if let Some(every) = self.progress_every {
                        if finished.is_multiple_of(every) || finished == total {
                            log::info!("realizations: {finished}/{total}");
                        }
                    }
                    Ok(local)
                },
            )
            .try_reduce(|| Tally::new(distances.len(), edges), |a, b| Ok(a.merge(b)))?;
        Ok(tally)
    }
}

/// One line of a distance scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub d: u32,
    /// Pearson correlation with the baseline; `None` when undefined.
    pub r: Option<f64>,
    /// Edges left without any unmasked realization.
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Distance with the highest correlation, smallest on ties.
    pub recommended: Option<u32>,
}

/// Exact average transmission centrality: one SI realization per node.
pub fn exact_average_ctr(g: &Graph, beta: f64, master_seed: u64) -> Result<EdgeCentrality> {
    CtrEstimator::new(g, beta, master_seed)?.exact()
}

/// Sampled transmission centrality from `num_seeds` random seeds, masking
/// links within `unbias_distance` hops of each seed.
pub fn approx_ctr(
    g: &Graph,
    beta: f64,
    num_seeds: usize,
    unbias_distance: u32,
    master_seed: u64,
) -> Result<EdgeCentrality> {
    CtrEstimator::new(g, beta, master_seed)?.approx(num_seeds, unbias_distance)
}

/// Correlation of the sampled estimator with the exact average, for every
/// unbiasing distance in `d_range`.
pub fn scan_unbias_distance(
    g: &Graph,
    beta: f64,
    num_seeds: usize,
    d_range: &[u32],
    master_seed: u64,
) -> Result<ScanTable> {
    let est = CtrEstimator::new(g, beta, master_seed)?;
    let baseline = est.exact()?;
    est.scan(num_seeds, d_range, &baseline)
}
