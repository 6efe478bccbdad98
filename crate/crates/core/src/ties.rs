//! Local tie-strength metrics, link rankings and correlation statistics.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::graph::{EdgeId, Graph, NodeId};
use crate::rng::{substream, Domain};
use crate::{Error, Result};

fn common_neighbors(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Fraction of shared neighbours of the edge's endpoints:
/// `n_ij / ((k_i - 1) + (k_j - 1) - n_ij)`, and 0 when the denominator is 0.
pub fn overlap(g: &Graph, edge: EdgeId) -> f64 {
    let (i, j) = g.endpoints(edge);
    let n = common_neighbors(g.neighbors(i), g.neighbors(j));
    let denom = (g.degree(i) - 1) + (g.degree(j) - 1) - n;
    if denom == 0 {
        0.0
    } else {
        n as f64 / denom as f64
    }
}

/// Overlap of every edge, indexed by edge id.
pub fn overlaps(g: &Graph) -> Vec<f64> {
    (0..g.edge_count() as EdgeId)
        .into_par_iter()
        .map(|e| overlap(g, e))
        .collect()
}

/// Aggregated interaction count stored on the edge.
pub fn dyadic_strength(g: &Graph, edge: EdgeId) -> f64 {
    g.weight(edge)
}

/// Share of edges whose overlap is exactly zero.
pub fn zero_overlap_fraction(g: &Graph) -> f64 {
    if g.edge_count() == 0 {
        return 0.0;
    }
    let zeros = overlaps(g).iter().filter(|&&o| o == 0.0).count();
    zeros as f64 / g.edge_count() as f64
}

/// Per-edge metric vectors used for ranking.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeMetrics {
    pub overlap: Vec<f64>,
    pub strength: Vec<f64>,
    pub ctr: Option<Vec<f64>>,
}

impl EdgeMetrics {
    /// Overlap and strength straight from the graph, with optional centrality.
    pub fn compute(g: &Graph, ctr: Option<Vec<f64>>) -> Result<Self> {
        if let Some(c) = &ctr {
            if c.len() != g.edge_count() {
                return Err(Error::arg(format!(
                    "centrality covers {} edges, graph has {}",
                    c.len(),
                    g.edge_count()
                )));
            }
        }
        Ok(EdgeMetrics {
            overlap: overlaps(g),
            strength: g.weights().to_vec(),
            ctr,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.overlap.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Increasing overlap, then increasing strength.
    OverlapThenStrength,
    /// Increasing overlap, then decreasing transmission centrality.
    OverlapThenInverseCtr,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::OverlapThenInverseCtr,
        Strategy::OverlapThenStrength,
        Strategy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::OverlapThenStrength => "overlap_then_strength",
            Strategy::OverlapThenInverseCtr => "overlap_then_inverse_ctr",
            Strategy::Random => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "overlap_then_strength" | "O,w" => Ok(Strategy::OverlapThenStrength),
            "overlap_then_inverse_ctr" | "O,ctr_inv" => Ok(Strategy::OverlapThenInverseCtr),
            "random" => Ok(Strategy::Random),
            other => Err(Error::arg(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Edges ordered weakest first under some strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRanking {
    pub strategy: Strategy,
    pub order: Vec<EdgeId>,
    /// Fingerprint of the metric vectors (or shuffle seed) behind the order.
    pub inputs_hash: String,
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn values(&mut self, values: &[f64]) {
        self.bytes(&(values.len() as u64).to_le_bytes());
        for v in values {
            self.bytes(&v.to_bits().to_le_bytes());
        }
    }

    fn hex(&self) -> String {
        format!("{:016x}", self.0)
    }
}

/// Orders edges weakest first. Ties left by the strategy's keys go to the
/// smaller edge id; the random strategy is a uniform shuffle from `rng_seed`.
pub fn rank_edges(strategy: Strategy, metrics: &EdgeMetrics, rng_seed: u64) -> Result<EdgeRanking> {
    let m = metrics.edge_count();
    if metrics.strength.len() != m {
        return Err(Error::arg("strength vector does not cover every edge"));
    }
    let mut order: Vec<EdgeId> = (0..m as EdgeId).collect();
    let mut hash = Fnv::new();
    hash.bytes(strategy.name().as_bytes());
    match strategy {
        Strategy::Random => {
            hash.bytes(&(m as u64).to_le_bytes());
            hash.bytes(&rng_seed.to_le_bytes());
            let mut rng = substream(rng_seed, Domain::Shuffle, 0);
            order.shuffle(&mut rng);
        }
        Strategy::OverlapThenStrength => {
            let (o, w) = (&metrics.overlap, &metrics.strength);
            hash.values(o);
            hash.values(w);
            order.sort_by(|&a, &b| {
                let (a, b) = (a as usize, b as usize);
                o[a].total_cmp(&o[b])
                    .then(w[a].total_cmp(&w[b]))
                    .then(a.cmp(&b))
            });
        }
        Strategy::OverlapThenInverseCtr => {
            let c = metrics
                .ctr
                .as_ref()
                .ok_or_else(|| Error::arg("strategy needs transmission centrality values"))?;
            if c.len() != m {
                return Err(Error::arg("centrality vector does not cover every edge"));
            }
            let o = &metrics.overlap;
            hash.values(o);
            hash.values(c);
            order.sort_by(|&a, &b| {
                let (a, b) = (a as usize, b as usize);
                o[a].total_cmp(&o[b])
                    .then(c[b].total_cmp(&c[a]))
                    .then(a.cmp(&b))
            });
        }
    }
    Ok(EdgeRanking {
        strategy,
        order,
        inputs_hash: hash.hex(),
    })
}

impl EdgeRanking {
    /// One edge id per line, weakest first, below a header naming the
    /// strategy and input fingerprint.
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "# strategy={} inputs_hash={}",
            self.strategy, self.inputs_hash
        )?;
        for e in &self.order {
            writeln!(out, "{e}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut strategy = None;
        let mut inputs_hash = String::new();
        let mut order = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    if let Some(s) = field.strip_prefix("strategy=") {
                        strategy = Some(s.parse::<Strategy>().map_err(|e| Error::Parse {
                            line: line_no,
                            msg: e.to_string(),
                        })?);
                    } else if let Some(h) = field.strip_prefix("inputs_hash=") {
                        inputs_hash = h.to_string();
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            order.push(line.parse::<EdgeId>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid edge id `{line}`"),
            })?);
        }
        let strategy = strategy.ok_or(Error::Parse {
            line: 1,
            msg: "missing `# strategy=` header".into(),
        })?;
        let mut seen = vec![false; order.len()];
        for &e in &order {
            match seen.get_mut(e as usize) {
                Some(s) if !*s => *s = true,
                _ => {
                    return Err(Error::Structure(
                        "ranking is not a permutation of edge ids".into(),
                    ))
                }
            }
        }
        Ok(EdgeRanking {
            strategy,
            order,
            inputs_hash,
        })
    }
}

/// Sample Pearson correlation with a two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Pearson r of `x` and `y`. The p-value comes from
/// `t = r * sqrt((n - 2) / (1 - r^2))` under Student's t with `n - 2`
/// degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::arg(format!("length mismatch: {} vs {}", n, y.len())));
    }
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 pairs, got {n}"
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InsufficientData("zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let dof = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else if n == 3 && r == 0.0 {
        1.0
    } else {
        let t = r * (dof / (1.0 - r * r)).sqrt();
        let law = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
        (2.0 * law.sf(t.abs())).min(1.0)
    };
    Ok(Correlation { r, p, n })
}
