use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use linkctr::graph::{build_graph, k_core, largest_connected_component, parse_edge_list};

fn run(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linkctr"))
        .current_dir(cwd)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(cwd: &Path, args: &[&str]) -> Output {
    let out = run(cwd, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: &Path, column: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == column)
        .unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].to_string())
        .collect()
}

#[test]
fn triangle_with_pendant_reduces_to_triangle() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "0 1\n1 2\n2 0\n2 3\n").unwrap();
    ok(
        dir.path(),
        &[
            "preprocess",
            "--input",
            "g.txt",
            "--kcore",
            "2",
            "--lcc",
            "--out",
            "pp",
        ],
    );
    let summary = json(&dir.path().join("pp/summary.json"));
    let last = summary["stages"]
        .as_array()
        .unwrap()
        .last()
        .unwrap()
        .clone();
    assert_eq!(last["nodes"], 3);
    assert_eq!(last["edges"], 3);
    assert!(dir.path().join("pp/manifest.json").exists());
}

#[test]
fn one_way_events_give_empty_graph_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("ev.txt"),
        "directed=true\n1 0 1\n2 1 2\n3 0 1\n",
    )
    .unwrap();
    let out = ok(
        dir.path(),
        &[
            "preprocess",
            "--input",
            "ev.txt",
            "--events",
            "--mutual",
            "--out",
            "pp",
        ],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("no links"));
    let summary = json(&dir.path().join("pp/summary.json"));
    assert_eq!(summary["stages"][0]["edges"], 0);
    assert_eq!(summary["input"]["one_way_pairs_dropped"], 2);
}

#[test]
fn mutual_on_undirected_events_falls_back_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ev.txt"), "directed=false\n1 0 1\n2 1 2\n").unwrap();
    let out = ok(
        dir.path(),
        &[
            "preprocess",
            "--input",
            "ev.txt",
            "--events",
            "--mutual",
            "--out",
            "pp",
        ],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("directed"));
    let summary = json(&dir.path().join("pp/summary.json"));
    assert_eq!(summary["input"]["mutual_filter"], false);
    assert_eq!(summary["stages"][0]["edges"], 2);
}

#[test]
fn er_preprocess_matches_library_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "generate",
            "--kind",
            "er",
            "--n",
            "1000",
            "--p",
            "0.004",
            "--master-seed",
            "2",
            "--out",
            "gen",
        ],
    );
    ok(
        dir.path(),
        &[
            "preprocess",
            "--input",
            "gen/graph.edges",
            "--kcore",
            "2",
            "--lcc",
            "--out",
            "pp",
        ],
    );

    let text = fs::read_to_string(dir.path().join("gen/graph.edges")).unwrap();
    let (g, _) = build_graph(&parse_edge_list(text.as_bytes()).unwrap()).unwrap();
    let core = k_core(&g, 2).unwrap();
    let lcc = largest_connected_component(&core);

    let stages = json(&dir.path().join("pp/summary.json"))["stages"].clone();
    let counts: Vec<(u64, u64)> = stages
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["nodes"].as_u64().unwrap(), s["edges"].as_u64().unwrap()))
        .collect();
    let expected = [&g, &core, &lcc].map(|h| (h.node_count() as u64, h.edge_count() as u64));
    assert_eq!(counts, expected.to_vec());

    let labels = csv_column(&dir.path().join("pp/node_map.csv"), "label");
    let want: Vec<String> = lcc.labels().iter().map(|l| l.to_string()).collect();
    assert_eq!(labels, want);
}

#[test]
fn path_of_three_exact_centrality() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p3.txt"), "0 1\n1 2\n").unwrap();
    ok(
        dir.path(),
        &[
            "ctr", "--graph", "p3.txt", "--beta", "1", "--exact", "--out", "c",
        ],
    );
    let values = csv_column(&dir.path().join("c/ctr.csv"), "ctr");
    assert_eq!(values.len(), 2);
    for v in values {
        assert_eq!(v.parse::<f64>().unwrap(), 4.0 / 3.0);
    }
}

#[test]
fn all_seeds_without_masking_reproduce_exact_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "generate", "--kind", "sbm", "--blocks", "30,30", "--p-in", "0.2", "--p-out", "0.02",
            "--out", "gen",
        ],
    );
    ok(
        dir.path(),
        &[
            "preprocess",
            "--input",
            "gen/graph.edges",
            "--lcc",
            "--out",
            "pp",
        ],
    );
    let n = csv_column(&dir.path().join("pp/node_map.csv"), "node")
        .len()
        .to_string();
    for (out, extra) in [
        ("exact", vec!["--exact"]),
        ("approx", vec!["--seeds", n.as_str(), "--unbias", "0"]),
    ] {
        let mut args = vec![
            "ctr",
            "--graph",
            "pp/graph.edges",
            "--beta",
            "0.4",
            "--master-seed",
            "5",
            "--out",
            out,
        ];
        args.extend(extra);
        ok(dir.path(), &args);
    }
    for file in ["ctr.csv", "ccdf.csv"] {
        let a = fs::read(dir.path().join("exact").join(file)).unwrap();
        let b = fs::read(dir.path().join("approx").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}

#[test]
fn missing_graph_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "ctr",
            "--graph",
            "absent.edges",
            "--beta",
            "1",
            "--exact",
            "--out",
            "c",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.edges"));
}

#[test]
fn disconnected_graph_exact_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "0 1\n2 3\n").unwrap();
    let out = run(
        dir.path(),
        &[
            "ctr", "--graph", "g.txt", "--beta", "1", "--exact", "--out", "c",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["ctr", "--beta", "1", "--out", "c"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(
        dir.path(),
        &[
            "rank",
            "--metrics",
            "m.csv",
            "--strategy",
            "bogus",
            "--out",
            "r",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(run(dir.path(), &["--help"]).status.success());
}

#[test]
fn equal_metrics_rank_in_edge_id_order() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("edge_id,u,v,overlap,strength,ctr\n");
    for e in 0..6 {
        text.push_str(&format!("{e},0,{},0.5,2,1.5\n", e + 1));
    }
    fs::write(dir.path().join("m.csv"), text).unwrap();
    ok(
        dir.path(),
        &[
            "rank",
            "--metrics",
            "m.csv",
            "--strategy",
            "overlap_then_strength,overlap_then_inverse_ctr",
            "--out",
            "r",
        ],
    );
    for name in ["overlap_then_strength", "overlap_then_inverse_ctr"] {
        let body = fs::read_to_string(dir.path().join(format!("r/ranking_{name}.txt"))).unwrap();
        let ids: Vec<&str> = body.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(ids, ["0", "1", "2", "3", "4", "5"]);
    }
}

#[test]
fn inverse_ctr_ranking_needs_centrality() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "0 1\n1 2\n2 0\n").unwrap();
    ok(dir.path(), &["metrics", "--graph", "g.txt", "--out", "m"]);
    let out = run(
        dir.path(),
        &[
            "rank",
            "--metrics",
            "m/metrics.csv",
            "--strategy",
            "overlap_then_inverse_ctr",
            "--out",
            "r",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn uncontrolled_experiment_has_unit_ratios() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "generate", "--kind", "events", "--blocks", "40,40", "--out", "gen",
        ],
    );
    ok(
        dir.path(),
        &[
            "preprocess",
            "--input",
            "gen/events.txt",
            "--events",
            "--mutual",
            "--kcore",
            "2",
            "--lcc",
            "--out",
            "pp",
        ],
    );
    ok(
        dir.path(),
        &["metrics", "--graph", "pp/graph.edges", "--out", "m"],
    );
    ok(
        dir.path(),
        &[
            "rank",
            "--metrics",
            "m/metrics.csv",
            "--strategy",
            "overlap_then_strength",
            "--out",
            "r",
        ],
    );
    fs::write(
        dir.path().join("sir.cfg"),
        "delta_grid = 1.0\nf_grid = 0.12, 0.48\nnum_seeds = 50\nstrategies = overlap_then_strength, random\n",
    )
    .unwrap();
    ok(
        dir.path(),
        &[
            "sir",
            "--graph",
            "pp/graph.edges",
            "--ranking",
            "r/ranking_overlap_then_strength.txt",
            "--config",
            "sir.cfg",
            "--out",
            "s",
        ],
    );
    let phis = csv_column(&dir.path().join("s/ratios.csv"), "phi");
    assert_eq!(phis.len(), 2);
    assert!(phis.iter().all(|p| p == "1"));
    let runs = csv_column(&dir.path().join("s/outcomes.csv"), "num_runs");
    assert!(runs.iter().all(|r| r == "50"));
}

#[test]
fn json_tables_feed_later_stages() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "0 1\n1 2\n2 0\n2 3\n3 4\n").unwrap();
    ok(
        dir.path(),
        &[
            "--format", "json", "ctr", "--graph", "g.txt", "--beta", "1", "--exact", "--out", "c",
        ],
    );
    ok(
        dir.path(),
        &[
            "--format",
            "json",
            "metrics",
            "--graph",
            "g.txt",
            "--ctr",
            "c/ctr.json",
            "--out",
            "m",
        ],
    );
    let rows = json(&dir.path().join("m/metrics.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r["ctr"].is_number()));
    ok(
        dir.path(),
        &[
            "rank",
            "--metrics",
            "m/metrics.json",
            "--strategy",
            "overlap_then_inverse_ctr",
            "--out",
            "r",
        ],
    );
}

#[test]
fn replay_refuses_changed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "0 1\n1 2\n").unwrap();
    ok(
        dir.path(),
        &[
            "ctr", "--graph", "g.txt", "--beta", "1", "--exact", "--out", "c",
        ],
    );
    ok(
        dir.path(),
        &["replay", "--manifest", "c/manifest.json", "--out", "c2"],
    );
    assert_eq!(
        fs::read(dir.path().join("c/ctr.csv")).unwrap(),
        fs::read(dir.path().join("c2/ctr.csv")).unwrap()
    );
    fs::write(dir.path().join("g.txt"), "0 1\n1 2\n2 3\n").unwrap();
    let out = run(
        dir.path(),
        &["replay", "--manifest", "c/manifest.json", "--out", "c3"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_reports_recommended_distance() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p3.txt"), "0 1\n1 2\n").unwrap();
    ok(
        dir.path(),
        &[
            "scan-d",
            "--graph",
            "p3.txt",
            "--beta",
            "1",
            "--seeds",
            "3",
            "--d-range",
            "0,1",
            "--out",
            "s",
        ],
    );
    let summary = json(&dir.path().join("s/summary.json"));
    assert_eq!(summary["recommended_d"], 0);
    assert_eq!(csv_column(&dir.path().join("s/scan.csv"), "r")[0], "1");
}
