use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use linkctr::centrality::{ccdf, tail_exponent, CtrEstimator, EdgeCentrality};
use linkctr::graph::{
    aggregate_events, block_of, build_graph, generate_er, generate_sbm, generate_sbm_events,
    parse_edge_list, parse_event_list, preprocess, EventStream, Graph, PreprocessOptions,
    SbmEventParams,
};
use linkctr::sir::{run_experiment, ExperimentConfig};
use linkctr::ties::{
    pearson, rank_edges, zero_overlap_fraction, EdgeMetrics, EdgeRanking, Strategy,
};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::io::{self, field, read_graph, read_table, write_graph, write_json, Table};
use crate::manifest::{Recorder, RunManifest, MANIFEST_FILE};
use crate::{
    Cli, Command, CtrArgs, GenerateArgs, GenerateKind, MetricsArgs, PreprocessArgs, RankArgs,
    ReplayArgs, ScanArgs, SirArgs,
};

pub fn dispatch(cli: &Cli, args: Vec<String>) -> CliResult<()> {
    let seed = cli.master_seed.unwrap_or(0);
    let (name, out) = match &cli.command {
        Command::Preprocess(a) => ("preprocess", &a.out),
        Command::Ctr(a) => ("ctr", &a.out),
        Command::Metrics(a) => ("metrics", &a.out),
        Command::Rank(a) => ("rank", &a.out),
        Command::Sir(a) => ("sir", &a.out),
        Command::ScanD(a) => ("scan-d", &a.out),
        Command::Generate(a) => ("generate", &a.out),
        Command::Replay(a) => return replay(a),
    };
    io::create_out_dir(out)?;
    let mut rec = Recorder::new(name, args, seed);
    match &cli.command {
        Command::Preprocess(a) => cmd_preprocess(a, &mut rec)?,
        Command::Ctr(a) => cmd_ctr(a, cli, seed, &mut rec)?,
        Command::Metrics(a) => cmd_metrics(a, cli, &mut rec)?,
        Command::Rank(a) => cmd_rank(a, seed, &mut rec)?,
        Command::Sir(a) => cmd_sir(a, cli, &mut rec)?,
        Command::ScanD(a) => cmd_scan(a, cli, seed, &mut rec)?,
        Command::Generate(a) => cmd_generate(a, seed, &mut rec)?,
        Command::Replay(_) => unreachable!("handled above"),
    }
    rec.finish(out)
}

fn replay(a: &ReplayArgs) -> CliResult<()> {
    let manifest = RunManifest::read(&a.manifest)?;
    manifest.verify_inputs()?;
    let mut argv = vec!["linkctr".to_string()];
    argv.extend(manifest.args.iter().cloned());
    argv.push("--out".into());
    argv.push(a.out.display().to_string());
    log::info!("replaying `{}`", manifest.args.join(" "));
    crate::run(argv)?;

    let fresh = RunManifest::read(&a.out.join(MANIFEST_FILE))?;
    if fresh.outputs != manifest.outputs {
        log::warn!("replayed outputs differ from the recorded digests");
    }
    Ok(())
}

fn load_graph(path: &Path, rec: &mut Recorder) -> CliResult<Graph> {
    rec.input(path)?;
    read_graph(path)
}

fn cmd_preprocess(a: &PreprocessArgs, rec: &mut Recorder) -> CliResult<()> {
    rec.input(&a.input)?;
    let mut warnings = Vec::new();
    let mut warn = |msg: String| {
        log::warn!("{msg}");
        warnings.push(msg);
    };
    let (graph, input_stats) = if a.events {
        let stream: EventStream =
            parse_event_list(io::open(&a.input)?).map_err(|e| CliError::read(&a.input, e))?;
        let mutual = if a.mutual && !stream.directed {
            warn("--mutual needs a directed event stream; aggregating without it".into());
            false
        } else {
            a.mutual
        };
        let (g, s) = aggregate_events(&stream, mutual)?;
        let stats = json!({
            "events": s.events,
            "self_events_dropped": s.self_events_dropped,
            "pairs": s.pairs,
            "one_way_pairs_dropped": s.one_way_pairs_dropped,
            "mutual_filter": mutual,
        });
        (g, stats)
    } else {
        if a.mutual {
            warn("--mutual only applies to event lists; ignored".into());
        }
        let records =
            parse_edge_list(io::open(&a.input)?).map_err(|e| CliError::read(&a.input, e))?;
        let (g, s) = build_graph(&records)?;
        let stats = json!({
            "records": s.records,
            "self_loops_dropped": s.self_loops_dropped,
            "duplicates_merged": s.duplicates_merged,
        });
        (g, stats)
    };
    let opts = PreprocessOptions {
        k_core: a.kcore,
        lcc: a.lcc,
    };
    let (graph, summary) = preprocess(graph, &opts)?;
    if graph.edge_count() == 0 {
        warn("the preprocessed graph has no links".into());
    }

    let graph_path = rec_path(a.out.join("graph.edges"), rec);
    write_graph(&graph_path, &graph)?;

    let mut map = Table::new(&["node", "label"]);
    for (node, &label) in graph.labels().iter().enumerate() {
        map.push(vec![node.into(), label.into()]);
    }
    let map_path = map.write(&a.out, "node_map", io::Format::Csv)?;
    rec.output(&map_path);

    let stages: Vec<_> = summary
        .stages
        .iter()
        .map(|s| json!({"stage": s.stage, "nodes": s.nodes, "edges": s.edges}))
        .collect();
    let summary_path = rec_path(a.out.join("summary.json"), rec);
    write_json(
        &summary_path,
        &json!({"input": input_stats, "stages": stages, "warnings": warnings}),
    )?;
    rec.config(json!({
        "input": a.input.display().to_string(),
        "events": a.events,
        "mutual": a.mutual,
        "kcore": a.kcore,
        "lcc": a.lcc,
    }));
    Ok(())
}

fn rec_path(path: std::path::PathBuf, rec: &mut Recorder) -> std::path::PathBuf {
    rec.output(&path);
    path
}

fn ctr_table(g: &Graph, ctr: &EdgeCentrality) -> Table {
    let mut t = Table::new(&["edge_id", "u", "v", "ctr", "contributions"]);
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        t.push(vec![
            e.into(),
            u.into(),
            v.into(),
            ctr.values[e].into(),
            ctr.contributions[e].into(),
        ]);
    }
    t
}

fn ccdf_table(ctr: &EdgeCentrality) -> CliResult<Option<Table>> {
    let counted: Vec<f64> = ctr
        .values
        .iter()
        .zip(&ctr.contributions)
        .filter(|(_, &c)| c > 0)
        .map(|(&v, _)| v)
        .collect();
    if counted.is_empty() {
        return Ok(None);
    }
    let mut t = Table::new(&["x", "ccdf"]);
    for (x, p) in ccdf(&counted)? {
        t.push(vec![x.into(), p.into()]);
    }
    Ok(Some(t))
}

fn cmd_ctr(a: &CtrArgs, cli: &Cli, seed: u64, rec: &mut Recorder) -> CliResult<()> {
    let g = load_graph(&a.graph, rec)?;
    let mut est = CtrEstimator::new(&g, a.beta, seed)?;
    if let Some(n) = a.progress {
        est = est.progress_every(n);
    }
    let (method, ctr) = match a.seeds {
        Some(m) => ("approx", est.approx(m, a.unbias)?),
        None => ("exact", est.exact()?),
    };
    rec.output(&ctr_table(&g, &ctr).write(&a.out, "ctr", cli.format)?);
    if let Some(t) = ccdf_table(&ctr)? {
        rec.output(&t.write(&a.out, "ccdf", cli.format)?);
    }
    let tail = match a.xmin {
        Some(xmin) => {
            let counted: Vec<f64> = ctr
                .values
                .iter()
                .zip(&ctr.contributions)
                .filter(|(_, &c)| c > 0)
                .map(|(&v, _)| v)
                .collect();
            Some(tail_exponent(&counted, xmin)?)
        }
        None => None,
    };
    let summary = json!({
        "method": method,
        "beta": a.beta,
        "realizations": ctr.realizations,
        "seeds": a.seeds,
        "unbias_distance": a.seeds.map(|_| a.unbias),
        "flagged_edges": ctr.flagged_count(),
        "xmin": a.xmin,
        "tail_exponent": tail,
    });
    let path = rec_path(a.out.join("summary.json"), rec);
    write_json(&path, &summary)?;
    rec.config(json!({
        "graph": a.graph.display().to_string(),
        "beta": a.beta,
        "method": method,
        "seeds": a.seeds,
        "unbias": a.unbias,
        "xmin": a.xmin,
    }));
    Ok(())
}

/// Centrality column of a `ctr` table, checked against the graph's edges.
fn read_ctr(path: &Path, g: &Graph) -> CliResult<Vec<f64>> {
    let rows = read_table(path)?;
    if rows.len() != g.edge_count() {
        return Err(CliError::read(
            path,
            format!(
                "{} rows for a graph with {} links",
                rows.len(),
                g.edge_count()
            ),
        ));
    }
    let mut values = vec![f64::NAN; g.edge_count()];
    for (i, row) in rows.iter().enumerate() {
        let e: usize = required(path, i, row, "edge_id")?;
        let u: u32 = required(path, i, row, "u")?;
        let v: u32 = required(path, i, row, "v")?;
        if e >= values.len() || g.endpoints(e as u32) != (u, v) {
            return Err(CliError::read(
                path,
                format!("row {i}: edge {e} ({u}, {v}) is not in the graph"),
            ));
        }
        values[e] = required(path, i, row, "ctr")?;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(CliError::read(path, "some links are missing"));
    }
    Ok(values)
}

fn required<T: std::str::FromStr>(
    path: &Path,
    i: usize,
    row: &std::collections::HashMap<String, String>,
    column: &str,
) -> CliResult<T> {
    field(path, i, row, column)?
        .ok_or_else(|| CliError::read(path, format!("row {i}: empty {column}")))
}

fn cmd_metrics(a: &MetricsArgs, cli: &Cli, rec: &mut Recorder) -> CliResult<()> {
    let g = load_graph(&a.graph, rec)?;
    let ctr = match &a.ctr {
        Some(p) => {
            rec.input(p)?;
            Some(read_ctr(p, &g)?)
        }
        None => None,
    };
    let m = EdgeMetrics::compute(&g, ctr)?;
    let mut t = Table::new(&["edge_id", "u", "v", "overlap", "strength", "ctr"]);
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        t.push(vec![
            e.into(),
            u.into(),
            v.into(),
            m.overlap[e].into(),
            m.strength[e].into(),
            m.ctr.as_ref().map(|c| c[e]).into(),
        ]);
    }
    rec.output(&t.write(&a.out, "metrics", cli.format)?);

    let corr = |x: &[f64], y: &[f64]| match pearson(x, y) {
        Ok(c) => json!({"r": c.r, "p": c.p, "n": c.n}),
        Err(e) => json!({"error": e.to_string()}),
    };
    let mut correlations = serde_json::Map::new();
    correlations.insert("overlap_strength".into(), corr(&m.overlap, &m.strength));
    if let Some(c) = &m.ctr {
        correlations.insert("overlap_ctr".into(), corr(&m.overlap, c));
        correlations.insert("strength_ctr".into(), corr(&m.strength, c));
    }
    let path = rec_path(a.out.join("summary.json"), rec);
    write_json(
        &path,
        &json!({
            "edges": g.edge_count(),
            "zero_overlap_fraction": zero_overlap_fraction(&g),
            "correlations": correlations,
        }),
    )?;
    rec.config(json!({
        "graph": a.graph.display().to_string(),
        "ctr": a.ctr.as_ref().map(|p| p.display().to_string()),
    }));
    Ok(())
}

fn read_metrics(path: &Path) -> CliResult<EdgeMetrics> {
    let rows = read_table(path)?;
    let mut m = EdgeMetrics {
        overlap: vec![f64::NAN; rows.len()],
        strength: vec![f64::NAN; rows.len()],
        ctr: None,
    };
    let mut ctr = vec![None; rows.len()];
    for (i, row) in rows.iter().enumerate() {
        let e: usize = required(path, i, row, "edge_id")?;
        if e >= rows.len() || !m.overlap[e].is_nan() {
            return Err(CliError::read(
                path,
                format!("row {i}: edge ids must be 0..{} once each", rows.len()),
            ));
        }
        m.overlap[e] = required(path, i, row, "overlap")?;
        m.strength[e] = required(path, i, row, "strength")?;
        ctr[e] = field::<f64>(path, i, row, "ctr")?;
    }
    if ctr.iter().all(Option::is_some) && !ctr.is_empty() {
        m.ctr = Some(ctr.into_iter().flatten().collect());
    }
    Ok(m)
}

fn cmd_rank(a: &RankArgs, seed: u64, rec: &mut Recorder) -> CliResult<()> {
    rec.input(&a.metrics)?;
    let metrics = read_metrics(&a.metrics)?;
    for &s in &a.strategy {
        let ranking = rank_edges(s, &metrics, seed)?;
        let path = a.out.join(format!("ranking_{}.txt", s.name()));
        let file = File::create(&path).map_err(|e| CliError::write(&path, e))?;
        ranking
            .write(&mut BufWriter::new(file))
            .map_err(|e| CliError::write(&path, e))?;
        rec.output(&path);
    }
    let names: Vec<&str> = a.strategy.iter().map(|s| s.name()).collect();
    rec.config(json!({"metrics": a.metrics.display().to_string(), "strategies": names}));
    Ok(())
}

fn cmd_sir(a: &SirArgs, cli: &Cli, rec: &mut Recorder) -> CliResult<()> {
    let g = load_graph(&a.graph, rec)?;
    let mut cfg = match &a.config {
        Some(p) => {
            rec.input(p)?;
            let text = fs::read_to_string(p).map_err(|e| CliError::read(p, e))?;
            ExperimentConfig::parse(&text).map_err(|e| CliError::read(p, e))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.master_seed {
        cfg.master_seed = s;
    }
    let mut rankings = Vec::new();
    for p in &a.ranking {
        rec.input(p)?;
        let r = EdgeRanking::read(io::open(p)?).map_err(|e| CliError::read(p, e))?;
        if r.order.len() != g.edge_count() {
            return Err(CliError::read(
                p,
                "ranking does not cover every link of the graph",
            ));
        }
        rankings.push(r);
    }
    if cfg.strategies.contains(&Strategy::Random)
        && !rankings.iter().any(|r| r.strategy == Strategy::Random)
    {
        let blank = EdgeMetrics {
            overlap: vec![0.0; g.edge_count()],
            strength: vec![0.0; g.edge_count()],
            ctr: None,
        };
        rankings.push(rank_edges(Strategy::Random, &blank, cfg.master_seed)?);
    }
    let res = run_experiment(&g, &rankings, &cfg)?;

    let mut outcomes = Table::new(&["strategy", "f", "delta", "mean_R", "stderr_R", "num_runs"]);
    for c in &res.cells {
        outcomes.push(vec![
            c.strategy.name().to_string().into(),
            c.f.into(),
            c.delta.into(),
            c.mean().into(),
            c.stderr().into(),
            c.num_runs().into(),
        ]);
    }
    rec.output(&outcomes.write(&a.out, "outcomes", cli.format)?);
    let mut ratios = Table::new(&["pair", "f", "delta", "phi", "stderr"]);
    for r in &res.ratios {
        ratios.push(vec![
            r.pair_name().into(),
            r.f.into(),
            r.delta.into(),
            r.phi.into(),
            r.stderr.into(),
        ]);
    }
    rec.output(&ratios.write(&a.out, "ratios", cli.format)?);
    let cfg_path = rec_path(a.out.join("config.txt"), rec);
    fs::write(&cfg_path, cfg.to_text()).map_err(|e| CliError::write(&cfg_path, e))?;
    rec.config(json!({"experiment": cfg.to_text()}));
    Ok(())
}

fn parse_d_range(s: &str) -> CliResult<Vec<u32>> {
    let bad = || CliError::Usage(format!("invalid --d-range `{s}`"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect()
}

fn cmd_scan(a: &ScanArgs, cli: &Cli, seed: u64, rec: &mut Recorder) -> CliResult<()> {
    let d_range = parse_d_range(&a.d_range)?;
    let g = load_graph(&a.graph, rec)?;
    let est = CtrEstimator::new(&g, a.beta, seed)?;
    let baseline = est.exact()?;
    let table = est.scan(a.seeds, &d_range, &baseline)?;
    let mut t = Table::new(&["d", "r", "flagged"]);
    for row in &table.rows {
        t.push(vec![row.d.into(), row.r.into(), row.flagged.into()]);
    }
    rec.output(&t.write(&a.out, "scan", cli.format)?);
    let path = rec_path(a.out.join("summary.json"), rec);
    write_json(
        &path,
        &json!({"beta": a.beta, "seeds": a.seeds, "recommended_d": table.recommended}),
    )?;
    rec.config(json!({
        "graph": a.graph.display().to_string(),
        "beta": a.beta,
        "seeds": a.seeds,
        "d_range": d_range,
    }));
    Ok(())
}

fn cmd_generate(a: &GenerateArgs, seed: u64, rec: &mut Recorder) -> CliResult<()> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| CliError::Usage(format!("--kind {:?} needs --{name}", a.kind)))
    };
    if a.kind != GenerateKind::Er && a.blocks.is_empty() {
        return Err(CliError::Usage(
            "--blocks is required for block models".into(),
        ));
    }
    match a.kind {
        GenerateKind::Er => {
            let n =
                a.n.ok_or_else(|| CliError::Usage("--kind er needs --n".into()))?;
            let g = generate_er(n, need(a.p, "p")?, seed)?;
            let path = rec_path(a.out.join("graph.edges"), rec);
            write_graph(&path, &g)?;
        }
        GenerateKind::Sbm => {
            let g = generate_sbm(
                &a.blocks,
                need(a.p_in, "p-in")?,
                need(a.p_out, "p-out")?,
                seed,
            )?;
            let path = rec_path(a.out.join("graph.edges"), rec);
            write_graph(&path, &g)?;
        }
        GenerateKind::Events => {
            let d = SbmEventParams::default();
            let params = SbmEventParams {
                blocks: a.blocks.clone(),
                p_in: a.p_in.unwrap_or(d.p_in),
                p_out: a.p_out.unwrap_or(d.p_out),
                mean_events_in: a.mean_in.unwrap_or(d.mean_events_in),
                mean_events_out: a.mean_out.unwrap_or(d.mean_events_out),
                one_way_fraction: a.one_way.unwrap_or(d.one_way_fraction),
                horizon: d.horizon,
            };
            let stream = generate_sbm_events(&params, seed)?;
            let path = rec_path(a.out.join("events.txt"), rec);
            write_events(&path, &stream)?;
        }
    }
    if a.kind != GenerateKind::Er {
        let mut t = Table::new(&["node", "block"]);
        for (node, b) in block_of(&a.blocks).into_iter().enumerate() {
            t.push(vec![node.into(), b.into()]);
        }
        rec.output(&t.write(&a.out, "blocks", io::Format::Csv)?);
    }
    rec.config(json!({
        "kind": format!("{:?}", a.kind).to_lowercase(),
        "n": a.n, "p": a.p, "blocks": a.blocks, "p_in": a.p_in, "p_out": a.p_out,
        "mean_in": a.mean_in, "mean_out": a.mean_out, "one_way": a.one_way,
    }));
    Ok(())
}

fn write_events(path: &Path, stream: &EventStream) -> CliResult<()> {
    use std::io::Write;
    let file = File::create(path).map_err(|e| CliError::write(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "directed={}", stream.directed)?;
        for ev in &stream.events {
            writeln!(w, "{} {} {}", ev.time, ev.src, ev.dst)?;
        }
        w.flush()
    })();
    res.map_err(|e| CliError::write(path, e))
}
