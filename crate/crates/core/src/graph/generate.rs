//! Seeded random graph generators.
//!
//! Pair sampling uses geometric skipping, so the cost is proportional to the
//! number of edges produced rather than to the number of candidate pairs.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::{EventRecord, EventStream, Graph, NodeId};
use crate::rng::{substream, Domain, SimRng};
use crate::{Error, Result};

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Calls `emit(k)` for every index `k < count` kept by independent
/// Bernoulli(p) trials, in ascending order.
fn bernoulli_indices(rng: &mut SimRng, count: u64, p: f64, mut emit: impl FnMut(u64)) {
    if count == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..count).for_each(emit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut k: u64 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        let skip = (u.ln() / log_q).floor();
        if skip >= (count - k) as f64 {
            return;
        }
        k += skip as u64;
        emit(k);
        k += 1;
        if k >= count {
            return;
        }
    }
}

/// Samples pairs `(offset + i, offset + j)`, `i < j < n`, each with
/// probability `p`.
fn sample_within(rng: &mut SimRng, offset: u32, n: u32, p: f64, out: &mut Vec<(NodeId, NodeId)>) {
    let n64 = n as u64;
    let total = n64 * n64.saturating_sub(1) / 2;
    // Row i holds n-1-i pairs; indices arrive in ascending order.
    let mut row: u64 = 0;
    let mut row_start: u64 = 0;
    bernoulli_indices(rng, total, p, |k| {
        while k >= row_start + (n64 - 1 - row) {
            row_start += n64 - 1 - row;
            row += 1;
        }
        let col = row + 1 + (k - row_start);
        out.push((offset + row as u32, offset + col as u32));
    });
}

/// Samples pairs `(a_off + i, b_off + j)` with `i < a_len`, `j < b_len`.
fn sample_between(
    rng: &mut SimRng,
    a_off: u32,
    a_len: u32,
    b_off: u32,
    b_len: u32,
    p: f64,
    out: &mut Vec<(NodeId, NodeId)>,
) {
    let total = a_len as u64 * b_len as u64;
    bernoulli_indices(rng, total, p, |k| {
        let i = (k / b_len as u64) as u32;
        let j = (k % b_len as u64) as u32;
        out.push((a_off + i, b_off + j));
    });
}

fn sbm_pairs(
    blocks: &[usize],
    p_in: f64,
    p_out: f64,
    rng: &mut SimRng,
) -> (usize, Vec<(NodeId, NodeId)>) {
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut n = 0u32;
    for &b in blocks {
        offsets.push(n);
        n += b as u32;
    }
    let mut pairs = Vec::new();
    for (a, &size_a) in blocks.iter().enumerate() {
        sample_within(rng, offsets[a], size_a as u32, p_in, &mut pairs);
        for (b, &size_b) in blocks.iter().enumerate().skip(a + 1) {
            sample_between(
                rng,
                offsets[a],
                size_a as u32,
                offsets[b],
                size_b as u32,
                p_out,
                &mut pairs,
            );
        }
    }
    pairs.sort_unstable();
    (n as usize, pairs)
}

/// Erdős–Rényi G(n, p) with unit weights.
pub fn generate_er(n: usize, p: f64, rng_seed: u64) -> Result<Graph> {
    generate_sbm(&[n], p, 0.0, rng_seed)
}

/// Stochastic block model with unit weights. Nodes are numbered block by
/// block; `block_of` recovers the membership.
pub fn generate_sbm(blocks: &[usize], p_in: f64, p_out: f64, rng_seed: u64) -> Result<Graph> {
    check_probability("p_in", p_in)?;
    check_probability("p_out", p_out)?;
    let total: usize = blocks.iter().sum();
    if total >= NodeId::MAX as usize {
        return Err(Error::arg("too many nodes"));
    }
    let mut rng = substream(rng_seed, Domain::Generator, 0);
    let (n, pairs) = sbm_pairs(blocks, p_in, p_out, &mut rng);
    let weights = vec![1.0; pairs.len()];
    Ok(Graph::from_canonical(
        n,
        pairs,
        weights,
        (0..n as u64).collect(),
    ))
}

/// Block index of every node of a block model with the given block sizes.
pub fn block_of(blocks: &[usize]) -> Vec<usize> {
    blocks
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect()
}

/// Parameters of a synthetic interaction log laid over a block model.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmEventParams {
    pub blocks: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    /// Mean number of events per direction on an intra-block link (≥ 1).
    pub mean_events_in: f64,
    /// Mean number of events per direction on an inter-block link (≥ 1).
    pub mean_events_out: f64,
    /// Fraction of links whose events all go one way.
    pub one_way_fraction: f64,
    /// Timestamps are drawn uniformly from `0..horizon`.
    pub horizon: u64,
}

impl Default for SbmEventParams {
    fn default() -> Self {
        SbmEventParams {
            blocks: vec![100; 4],
            p_in: 0.1,
            p_out: 0.002,
            mean_events_in: 8.0,
            mean_events_out: 1.5,
            one_way_fraction: 0.0,
            horizon: 1_000_000,
        }
    }
}

/// Directed event stream over an SBM: every sampled link carries a
/// geometric number of events per direction (at least one), with
/// intra-block links more active than inter-block ones.
pub fn generate_sbm_events(params: &SbmEventParams, rng_seed: u64) -> Result<EventStream> {
    check_probability("p_in", params.p_in)?;
    check_probability("p_out", params.p_out)?;
    check_probability("one_way_fraction", params.one_way_fraction)?;
    for (name, m) in [
        ("mean_events_in", params.mean_events_in),
        ("mean_events_out", params.mean_events_out),
    ] {
        if !(m >= 1.0 && m.is_finite()) {
            return Err(Error::arg(format!("{name} must be at least 1, got {m}")));
        }
    }
    if params.horizon == 0 {
        return Err(Error::arg("horizon must be positive"));
    }
    let mut rng = substream(rng_seed, Domain::Generator, 0);
    let (_, pairs) = sbm_pairs(&params.blocks, params.p_in, params.p_out, &mut rng);
    let membership = block_of(&params.blocks);
    let geo_in = Geometric::new(1.0 / params.mean_events_in).unwrap();
    let geo_out = Geometric::new(1.0 / params.mean_events_out).unwrap();

    let mut events = Vec::new();
    for (u, v) in pairs {
        let intra = membership[u as usize] == membership[v as usize];
        let law = if intra { &geo_in } else { &geo_out };
        let one_way = rng.random_bool(params.one_way_fraction);
        let forward = 1 + law.sample(&mut rng);
        let backward = if one_way { 0 } else { 1 + law.sample(&mut rng) };
        for (src, dst, count) in [(u, v, forward), (v, u, backward)] {
            for _ in 0..count {
                events.push(EventRecord {
                    time: rng.random_range(0..params.horizon),
                    src: src as u64,
                    dst: dst as u64,
                });
            }
        }
    }
    events.sort_unstable_by_key(|e| (e.time, e.src, e.dst));
    Ok(EventStream {
        directed: true,
        events,
    })
}
