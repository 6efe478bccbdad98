//! Controlled SIR spreading.
//!
//! A ranking picks the weakest fraction `f` of links; their weights are
//! scaled by `delta`, which scales their per-round transmission probability
//! to `omega * delta * beta`. Experiments compare strategies through ratios
//! of mean final outbreak sizes.
//!
//! Every run index `i` has a fixed seed node and a fixed random stream that
//! all strategies, fractions and deltas share, so two cells with the same
//! effective weights produce identical outcomes run by run.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::graph::{EdgeId, Graph, NodeId};
use crate::rng::{substream, Domain};
use crate::ties::{EdgeRanking, Strategy};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Unweighted,
    Weighted,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Unweighted => "unweighted",
            WeightMode::Weighted => "weighted",
        })
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unweighted" => Ok(WeightMode::Unweighted),
            "weighted" => Ok(WeightMode::Weighted),
            other => Err(Error::arg(format!("unknown weight mode `{other}`"))),
        }
    }
}

/// Base link weights: all 1, or `min(w / mean(w), 1)` from stored counts.
pub fn normalize_weights(g: &Graph, mode: WeightMode) -> Vec<f64> {
    match mode {
        WeightMode::Unweighted => vec![1.0; g.edge_count()],
        WeightMode::Weighted => {
            if g.is_unit_weighted() {
                log::warn!(
                    "weighted mode on a graph without interaction counts; all weights are 1"
                );
            }
            let m = g.edge_count();
            if m == 0 {
                return Vec::new();
            }
            let mean = g.weights().iter().sum::<f64>() / m as f64;
            if mean == 0.0 {
                return vec![0.0; m];
            }
            g.weights().iter().map(|w| (w / mean).min(1.0)).collect()
        }
    }
}

/// `round(f * edges)`, halves rounded up. Products within 1e-9 of a
/// half-integer or integer are snapped to it first so that decimal grids
/// like 0.36 behave as written.
pub fn controlled_count(f: f64, edges: usize) -> usize {
    let x = f * edges as f64;
    let halves = (x * 2.0).round() / 2.0;
    let x = if (x - halves).abs() < 1e-9 { halves } else { x };
    ((x + 0.5).floor() as usize).min(edges)
}

/// Which links are throttled and by how much.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPlan {
    pub base_weights: Vec<f64>,
    pub controlled: Vec<EdgeId>,
    pub delta: f64,
    pub effective: Vec<f64>,
}

/// Scales the first `round(f * E)` edges of `ranking` by `delta`.
pub fn build_control_plan(
    g: &Graph,
    ranking: &EdgeRanking,
    f: f64,
    delta: f64,
    omega: &[f64],
) -> Result<ControlPlan> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::arg(format!("f must lie in [0, 1], got {f}")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::arg(format!("delta must lie in [0, 1], got {delta}")));
    }
    let m = g.edge_count();
    if omega.len() != m || ranking.order.len() != m {
        return Err(Error::arg("weights and ranking must cover every edge"));
    }
    let controlled = ranking.order[..controlled_count(f, m)].to_vec();
    let mut effective = omega.to_vec();
    for &e in &controlled {
        effective[e as usize] = delta * omega[e as usize];
    }
    Ok(ControlPlan {
        base_weights: omega.to_vec(),
        controlled,
        delta,
        effective,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compartment {
    Susceptible,
    Infected,
    Recovered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundCounts {
    pub round: u32,
    pub susceptible: usize,
    pub infected: usize,
    pub recovered: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SirOutcome {
    pub recovered_final: u32,
    pub rounds: u32,
    pub seed: NodeId,
}

/// Per-edge transmission probabilities of one control plan.
#[derive(Debug, Clone)]
pub struct SirModel<'g> {
    graph: &'g Graph,
    transmit: Vec<f64>,
    mu: f64,
}

impl<'g> SirModel<'g> {
    pub fn new(graph: &'g Graph, plan: &ControlPlan, beta: f64, mu: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::arg(format!("beta must lie in (0, 1], got {beta}")));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::arg(format!("mu must lie in (0, 1], got {mu}")));
        }
        if plan.effective.len() != graph.edge_count() {
            return Err(Error::arg("control plan does not cover every edge"));
        }
        let transmit = plan
            .effective
            .iter()
            .map(|w| (w * beta).clamp(0.0, beta))
            .collect();
        Ok(SirModel {
            graph,
            transmit,
            mu,
        })
    }

    /// Transmission probability per round on `edge`.
    pub fn transmission(&self, edge: EdgeId) -> f64 {
        self.transmit[edge as usize]
    }

    pub fn run<R: Rng + ?Sized>(&self, seed: NodeId, rng: &mut R) -> Result<SirOutcome> {
        self.run_observed(seed, rng, |_, _| {})
    }

    /// Runs to extinction, calling `observe` with the compartment counts and
    /// states after every round (and once for the initial state).
    ///
    /// Within a round, every infected-susceptible edge gets its transmission
    /// trial first; then every node infected at the start of the round
    /// recovers with probability `mu`.
    pub fn run_observed<R, F>(
        &self,
        seed: NodeId,
        rng: &mut R,
        mut observe: F,
    ) -> Result<SirOutcome>
    where
        R: Rng + ?Sized,
        F: FnMut(&RoundCounts, &[Compartment]),
    {
        let g = self.graph;
        let n = g.node_count();
        if seed as usize >= n {
            return Err(Error::arg(format!(
                "seed {seed} out of range for {n} nodes"
            )));
        }
        let mut state = vec![Compartment::Susceptible; n];
        state[seed as usize] = Compartment::Infected;
        let mut infected = vec![seed];
        let mut next = Vec::new();
        let mut counts = RoundCounts {
            round: 0,
            susceptible: n - 1,
            infected: 1,
            recovered: 0,
        };
        observe(&counts, &state);

        while !infected.is_empty() {
            counts.round += 1;
            for &u in &infected {
                for (v, e) in g.adjacency(u) {
                    if state[v as usize] == Compartment::Susceptible
                        && rng.random::<f64>() < self.transmit[e as usize]
                    {
                        state[v as usize] = Compartment::Infected;
                        next.push(v);
                    }
                }
            }
            let newly = next.len();
            for &u in &infected {
                if rng.random::<f64>() < self.mu {
                    state[u as usize] = Compartment::Recovered;
                    counts.recovered += 1;
                } else {
                    next.push(u);
                }
            }
            counts.susceptible -= newly;
            counts.infected = next.len();
            std::mem::swap(&mut infected, &mut next);
            next.clear();
            observe(&counts, &state);
        }
        Ok(SirOutcome {
            recovered_final: counts.recovered as u32,
            rounds: counts.round,
            seed,
        })
    }
}

/// One SIR run under `plan`.
pub fn simulate_sir<R: Rng + ?Sized>(
    g: &Graph,
    plan: &ControlPlan,
    beta: f64,
    mu: f64,
    seed: NodeId,
    rng: &mut R,
) -> Result<SirOutcome> {
    SirModel::new(g, plan, beta, mu)?.run(seed, rng)
}

/// `points` values spaced evenly in log scale from `lo` to `hi`, endpoints
/// exact.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..points)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k == points - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub beta: f64,
    pub mu: f64,
    pub f_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub num_seeds: usize,
    pub master_seed: u64,
    pub mode: WeightMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            beta: 0.25,
            mu: 0.1,
            f_grid: vec![0.12, 0.24, 0.36, 0.48],
            delta_grid: log_grid(0.01, 1.0, 9),
            strategies: Strategy::ALL.to_vec(),
            num_seeds: 1000,
            master_seed: 0,
            mode: WeightMode::Unweighted,
        }
    }
}

impl ExperimentConfig {
    /// Reads `key = value` lines over the defaults. Lists are comma
    /// separated; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Parse {
                line: line_no,
                msg: format!("invalid {what} `{value}`"),
            };
            let list = |what: &str| -> Result<Vec<f64>> {
                value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| bad(what)))
                    .collect()
            };
            match key {
                "beta" => cfg.beta = value.parse().map_err(|_| bad("beta"))?,
                "mu" => cfg.mu = value.parse().map_err(|_| bad("mu"))?,
                "f_grid" => cfg.f_grid = list("f_grid")?,
                "delta_grid" => cfg.delta_grid = list("delta_grid")?,
                "strategies" => {
                    cfg.strategies = value
                        .split(',')
                        .map(|s| s.trim().parse::<Strategy>().map_err(|_| bad("strategy")))
                        .collect::<Result<_>>()?
                }
                "num_seeds" => cfg.num_seeds = value.parse().map_err(|_| bad("num_seeds"))?,
                "master_seed" => cfg.master_seed = value.parse().map_err(|_| bad("master_seed"))?,
                "mode" => cfg.mode = value.parse().map_err(|_| bad("mode"))?,
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.f_grid.is_empty() || self.delta_grid.is_empty() || self.strategies.is_empty() {
            return Err(Error::Config(
                "f_grid, delta_grid and strategies must be non-empty".into(),
            ));
        }
        if self.num_seeds == 0 {
            return Err(Error::Config("num_seeds must be at least 1".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) || !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::Config("beta and mu must lie in (0, 1]".into()));
        }
        for &x in self.f_grid.iter().chain(&self.delta_grid) {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Config(format!("grid value {x} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// `key = value` text that [`ExperimentConfig::parse`] reads back.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let strategies: Vec<&str> = self.strategies.iter().map(|s| s.name()).collect();
        format!(
            "beta = {}\nmu = {}\nf_grid = {}\ndelta_grid = {}\nstrategies = {}\nnum_seeds = {}\nmaster_seed = {}\nmode = {}\n",
            self.beta,
            self.mu,
            join(&self.f_grid),
            join(&self.delta_grid),
            strategies.join(", "),
            self.num_seeds,
            self.master_seed,
            self.mode
        )
    }
}

/// Outcomes of all runs of one (strategy, f, delta) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub strategy: Strategy,
    pub f: f64,
    pub delta: f64,
    /// Final recovered count of every run, indexed by run.
    pub recovered: Vec<u32>,
}

impl CellResult {
    pub fn num_runs(&self) -> usize {
        self.recovered.len()
    }

    pub fn mean(&self) -> f64 {
        self.recovered.iter().map(|&r| r as f64).sum::<f64>() / self.num_runs() as f64
    }

    pub fn stderr(&self) -> f64 {
        let n = self.num_runs();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.recovered.iter().map(|&r| (r as f64 - m).powi(2)).sum();
        (ss / (n - 1) as f64 / n as f64).sqrt()
    }
}

/// Ratio of mean outbreak sizes of two strategies at one (f, delta).
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub numerator: Strategy,
    pub denominator: Strategy,
    pub f: f64,
    pub delta: f64,
    pub phi: f64,
    pub stderr: f64,
}

impl RatioRow {
    pub fn pair_name(&self) -> String {
        format!("{}/{}", self.numerator, self.denominator)
    }
}

/// Ratio of means of paired samples with a delta-method standard error.
pub fn paired_ratio(a: &[u32], b: &[u32]) -> (f64, f64) {
    let n = a.len();
    let sa: f64 = a.iter().map(|&x| x as f64).sum();
    let sb: f64 = b.iter().map(|&x| x as f64).sum();
    let phi = sa / sb;
    if n < 2 {
        return (phi, 0.0);
    }
    let mb = sb / n as f64;
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x as f64 - phi * y as f64)
        .collect();
    let md = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - md).powi(2)).sum::<f64>() / (n - 1) as f64;
    (phi, (var / n as f64).sqrt() / mb)
}

/// Mean and standard error of the paired difference `a - b`.
pub fn paired_difference(a: &[u32], b: &[u32]) -> (f64, f64) {
    let n = a.len();
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x as f64 - y as f64)
        .collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
    pub ratios: Vec<RatioRow>,
    /// Seed node of every run index.
    pub seeds: Vec<NodeId>,
}

impl ExperimentResult {
    pub fn cell(&self, strategy: Strategy, f: f64, delta: f64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.strategy == strategy && c.f == f && c.delta == delta)
    }

    pub fn ratio(
        &self,
        numerator: Strategy,
        denominator: Strategy,
        f: f64,
        delta: f64,
    ) -> Option<&RatioRow> {
        self.ratios.iter().find(|r| {
            r.numerator == numerator && r.denominator == denominator && r.f == f && r.delta == delta
        })
    }
}

/// Strategy pairs compared by default: each targeted strategy against
/// random, and the centrality-based ordering against the strength-based one.
pub fn default_pairs(strategies: &[Strategy]) -> Vec<(Strategy, Strategy)> {
    let has = |s| strategies.contains(&s);
    let mut pairs = Vec::new();
    if has(Strategy::Random) {
        for &s in strategies {
            if s != Strategy::Random {
                pairs.push((s, Strategy::Random));
            }
        }
    }
    if has(Strategy::OverlapThenInverseCtr) && has(Strategy::OverlapThenStrength) {
        pairs.push((
            Strategy::OverlapThenInverseCtr,
            Strategy::OverlapThenStrength,
        ));
    }
    pairs
}

/// Seed node of every SIR run index.
pub fn run_seeds(node_count: usize, num_seeds: usize, master_seed: u64) -> Vec<NodeId> {
    (0..num_seeds as u64)
        .map(|i| substream(master_seed, Domain::SirSeed, i).random_range(0..node_count as NodeId))
        .collect()
}

/// Runs every (strategy, f, delta) cell of `cfg` with paired seeds and
/// random streams, then forms the ratio tables.
pub fn run_experiment(
    g: &Graph,
    rankings: &[EdgeRanking],
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    if g.node_count() == 0 {
        return Err(Error::arg("graph has no nodes"));
    }
    let omega = normalize_weights(g, cfg.mode);
    let seeds = run_seeds(g.node_count(), cfg.num_seeds, cfg.master_seed);

    let mut cells = Vec::new();
    for &strategy in &cfg.strategies {
        let ranking = rankings
            .iter()
            .find(|r| r.strategy == strategy)
            .ok_or_else(|| Error::Config(format!("no ranking supplied for strategy {strategy}")))?;
        for &f in &cfg.f_grid {
            for &delta in &cfg.delta_grid {
                let plan = build_control_plan(g, ranking, f, delta, &omega)?;
                let model = SirModel::new(g, &plan, cfg.beta, cfg.mu)?;
                let recovered = seeds
                    .par_iter()
                    .enumerate()
                    .map(|(i, &seed)| {
                        let mut rng = substream(cfg.master_seed, Domain::SirRun, i as u64);
                        model.run(seed, &mut rng).map(|o| o.recovered_final)
                    })
                    .collect::<Result<Vec<_>>>()?;
                log::debug!("sir cell {strategy} f={f} delta={delta} done");
                cells.push(CellResult {
                    strategy,
                    f,
                    delta,
                    recovered,
                });
            }
        }
    }

    let mut ratios = Vec::new();
    for (num, den) in default_pairs(&cfg.strategies) {
        for &f in &cfg.f_grid {
            for &delta in &cfg.delta_grid {
                let find = |s: Strategy| {
                    cells
                        .iter()
                        .find(|c| c.strategy == s && c.f == f && c.delta == delta)
                        .expect("cell computed above")
                };
                let (phi, stderr) = paired_ratio(&find(num).recovered, &find(den).recovered);
                ratios.push(RatioRow {
                    numerator: num,
                    denominator: den,
                    f,
                    delta,
                    phi,
                    stderr,
                });
            }
        }
    }
    Ok(ExperimentResult {
        cells,
        ratios,
        seeds,
    })
}

/// Adjacent delta pairs `(lower, higher)` at which the mean outbreak of a
/// strategy drops significantly (paired one-sided test at critical value
/// `z`) as delta grows.
pub fn monotonicity_violations(
    result: &ExperimentResult,
    strategy: Strategy,
    f: f64,
    z: f64,
) -> Vec<(f64, f64)> {
    let mut cells: Vec<&CellResult> = result
        .cells
        .iter()
        .filter(|c| c.strategy == strategy && c.f == f)
        .collect();
    cells.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    cells
        .windows(2)
        .filter_map(|w| {
            let (mean, se) = paired_difference(&w[0].recovered, &w[1].recovered);
            (mean > z * se && mean > 0.0).then_some((w[0].delta, w[1].delta))
        })
        .collect()
}
