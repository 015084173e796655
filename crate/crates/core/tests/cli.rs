use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gasp::affinity::AffinityVolume;
use gasp::io::{self, WeightEncoding};
use gasp::{EdgeSpec, SignedGraph};

fn gasp_cmd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gasp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gasp_cmd(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_triangle(dir: &Path) {
    let g = SignedGraph::new(3, [EdgeSpec::signed(0, 1, 2.0), EdgeSpec::signed(1, 2, 1.0), EdgeSpec::signed(0, 2, -1.5)]).unwrap();
    io::write_sgr(&dir.join("tri.sgr"), &g, WeightEncoding::Split).unwrap();
}

fn write_cube(dir: &Path) {
    let vol = AffinityVolume::new([3, 3, 3], vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]], (0..81).map(|i| (i % 10) as f64 / 9.0).collect()).unwrap();
    io::write_aff(&dir.join("cube.aff"), &vol).unwrap();
}

#[test]
fn run_triangle_with_each_rule() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_triangle(d);
    for (rule, expected) in [("max", vec![0, 0, 0]), ("average", vec![0, 0, 1]), ("sum", vec![0, 0, 1])] {
        ok(d, &["run", "--graph", "tri.sgr", "--rule", rule, "--out", "l.lbl", "--merge-log", "m.csv", "--edge-map", "e.bin"]);
        let labels = io::read_labels(&d.join("l.lbl")).unwrap();
        assert_eq!(labels.shape, vec![3]);
        assert_eq!(labels.labels, expected, "{rule}");
    }
    let csv = fs::read_to_string(d.join("m.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("iteration,root_a,root_b,value,size"));
    assert_eq!(io::read_edge_merge_map(&d.join("e.bin")).unwrap(), vec![1, u32::MAX, u32::MAX]);
}

#[test]
fn build_counts_lattice_edges_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_cube(d);
    ok(d, &["build", "--affinities", "cube.aff", "--out", "a.sgr"]);
    ok(d, &["build", "--affinities", "cube.aff", "--out", "b.sgr"]);
    assert_eq!(io::read_sgr(&d.join("a.sgr")).unwrap().edge_count(), 54);
    assert_eq!(fs::read(d.join("a.sgr.bin")).unwrap(), fs::read(d.join("b.sgr.bin")).unwrap());

    ok(d, &["build", "--affinities", "cube.aff", "--mapping", "additive", "--beta", "1.0", "--out", "c.sgr", "--weights", "signed"]);
    let g = io::read_sgr(&d.join("c.sgr")).unwrap();
    assert!(g.edges().iter().all(|e| e.signed_weight() <= 0.0));

    fs::write(d.join("bad.aff"), "{\"format\":\"aff\"").unwrap();
    let out = gasp_cmd(d, &["build", "--affinities", "bad.aff", "--out", "x.sgr"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.aff"));
}

#[test]
fn invalid_flag_combinations_fail() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_triangle(d);
    for args in [
        vec!["run", "--graph", "tri.sgr", "--rule", "sum", "--fast", "--out", "x"],
        vec!["run", "--graph", "tri.sgr", "--premerge", "0.5", "--out", "x"],
        vec!["run", "--graph", "tri.sgr", "--rule", "median", "--out", "x"],
    ] {
        let out = gasp_cmd(d, &args);
        assert!(!out.status.success(), "{args:?}");
    }
}

#[test]
fn fast_path_writes_identical_labels() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--shape", "2,12,12", "--segments", "5", "--out-affinities", "a.aff", "--out-gt", "gt.lbl"]);
    ok(d, &["perturb", "--affinities", "a.aff", "--K", "3", "--direction", "over", "--seed", "4", "--out", "p.aff"]);
    for extra in [[].as_slice(), ["--constraints", "true"].as_slice()] {
        let mut exact = vec!["run", "--affinities", "p.aff", "--rule", "absmax", "--out", "e.lbl"];
        exact.extend_from_slice(extra);
        ok(d, &exact);
        ok(d, &["run", "--affinities", "p.aff", "--rule", "absmax", "--fast", "--out", "f.lbl"]);
        assert_eq!(fs::read(d.join("e.lbl.bin")).unwrap(), fs::read(d.join("f.lbl.bin")).unwrap());
    }
}

#[test]
fn eval_prints_scores() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    io::write_labels(&d.join("seg.lbl"), &[1, 2, 2], &[1, 1, 2, 2]).unwrap();
    io::write_labels(&d.join("gt.lbl"), &[1, 2, 2], &[3, 3, 3, 3]).unwrap();
    let out = ok(d, &["eval", "--seg", "seg.lbl", "--gt", "gt.lbl"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["vi_split"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert_eq!(v["vi_merge"].as_f64().unwrap(), 0.0);
    assert!(v["adapted_rand"].is_number() && v["combined"].is_number());

    io::write_labels(&d.join("gt0.lbl"), &[4], &[0, 0, 0, 0]).unwrap();
    assert!(!gasp_cmd(d, &["eval", "--seg", "seg.lbl", "--gt", "gt0.lbl"]).status.success());
    ok(d, &["eval", "--seg", "seg.lbl", "--gt", "gt0.lbl", "--no-ignore"]);
}

#[test]
fn zero_noise_bench_matches_plain_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--shape", "2,16,16", "--segments", "4", "--seed", "3", "--out-affinities", "a.aff", "--out-gt", "gt.lbl"]);
    let bench = [
        "bench", "--affinities", "a.aff", "--gt", "gt.lbl", "--rules", "average", "--K-grid", "0", "--samples", "1", "--p-long", "1",
        "--min-size", "20", "--out", "b.csv",
    ];
    ok(d, &bench);
    ok(d, &["run", "--affinities", "a.aff", "--rule", "average", "--min-size", "20", "--out", "s.lbl"]);
    let eval: serde_json::Value = serde_json::from_str(&ok(d, &["eval", "--seg", "s.lbl", "--gt", "gt.lbl"])).unwrap();
    let csv = fs::read_to_string(d.join("b.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    for (col, key) in [(4, "vi_split"), (5, "vi_merge"), (6, "adapted_rand"), (7, "combined")] {
        assert_eq!(row[col].parse::<f64>().unwrap(), eval[key].as_f64().unwrap(), "{key}");
    }
}

#[test]
fn bench_rows_and_summary_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--shape", "2,16,16", "--segments", "4", "--out-affinities", "a.aff", "--out-gt", "gt.lbl"]);
    let args = |out: &'static str| {
        vec![
            "bench", "--affinities", "a.aff", "--gt", "gt.lbl", "--rules", "sum,average", "--K-grid", "0,4", "--samples", "3",
            "--p-long", "0,0.5", "--min-size", "10", "--seed", "9", "--out", out,
        ]
    };
    ok(d, &args("one.csv"));
    let out = Command::new(env!("CARGO_BIN_EXE_gasp"))
        .current_dir(d)
        .args(args("two.csv"))
        .env("GASP_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let strip = |name: &str| {
        fs::read_to_string(d.join(name))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    let one = strip("one.csv");
    assert_eq!(one, strip("two.csv"));
    assert_eq!(one.len(), 1 + 2 * 2 * 2 * 3);
    assert_eq!(fs::read(d.join("one.csv.summary.csv")).unwrap(), fs::read(d.join("two.csv.summary.csv")).unwrap());
    assert!(fs::read_to_string(d.join("one.csv.summary.csv")).unwrap().starts_with("rule,K,p_long,metric,median,p25,p75"));
}

#[test]
fn oracle_check_reports_no_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["oracle-check", "--n-graphs", "60", "--max-nodes", "20", "--seed", "5"]);
    assert!(out.contains("0 divergences"), "{out}");
    let out = ok(dir.path(), &["oracle-check", "--n-graphs", "30", "--positive"]);
    assert!(out.contains("0 divergences"), "{out}");
}
