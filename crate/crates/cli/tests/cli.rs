//! End-to-end runs of the `amortize` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn amortize(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amortize"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn amortize")
}

fn write_config(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

const ILP: &str = r#"
dataset = "synthetic"
shape = "linear"
n = 12
mode = "single_query"
iterations = 40
policy = "ilp"
theta = 0.8
candidates = 12
attention = "geometric"
p = 0.5
cutoff = 3
output = "out_ilp"
"#;

/// Drops the timing column so runs can be compared byte for byte.
fn without_timing(csv: &str) -> String {
    csv.lines()
        .map(|line| line.rsplit_once(',').map_or(line, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn run_writes_curve_ledger_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "ilp.toml", ILP);
    let out = amortize(&["run", "ilp.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let curve = fs::read_to_string(dir.path().join("out_ilp/iterations.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("iteration,unfairness,ndcg_quality,feasible,solve_ms"));
    assert_eq!(lines.count(), 40);

    let ledger = fs::read_to_string(dir.path().join("out_ilp/ledger.csv")).unwrap();
    assert!(ledger.starts_with("subject_id,cum_attention,cum_relevance"));
    assert_eq!(ledger.lines().count(), 13);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out_ilp/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["iterations"], 40);
    assert!(summary["min_quality"].as_f64().unwrap() >= 0.8 - 1e-7);
}

#[test]
fn repeated_runs_are_identical_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "ilp.toml", ILP);
    let mut curves = Vec::new();
    let mut ledgers = Vec::new();
    for _ in 0..2 {
        assert!(amortize(&["run", "ilp.toml"], dir.path()).status.success());
        curves.push(without_timing(&fs::read_to_string(dir.path().join("out_ilp/iterations.csv")).unwrap()));
        ledgers.push(fs::read(dir.path().join("out_ilp/ledger.csv")).unwrap());
    }
    assert_eq!(curves[0], curves[1]);
    assert_eq!(ledgers[0], ledgers[1]);
}

#[test]
fn overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "ilp.toml", ILP);
    let out = amortize(
        &["run", "ilp.toml", "--set", "iterations=7", "--set", "output=elsewhere"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = fs::read_to_string(dir.path().join("elsewhere/iterations.csv")).unwrap();
    assert_eq!(curve.lines().count(), 8);
}

#[test]
fn invalid_configs_fail_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", format!("{ILP}\nunknown_key = 1\n")),
        ("theta.toml", ILP.replace("theta = 0.8", "theta = 1.5")),
        ("cutoff.toml", ILP.replace("cutoff = 3", "cutoff = 0")),
        ("missing.toml", "dataset = \"listings\"\npath = \"nowhere.csv\"\nrating_columns = [\"r\"]\n".to_string()),
    ];
    for (name, body) in &cases {
        write_config(dir.path(), name, body);
        let out = amortize(&["run", name], dir.path());
        assert!(!out.status.success(), "{name} should have been rejected");
        assert!(!out.stderr.is_empty());
    }
    assert!(!amortize(&["run", "does_not_exist.toml"], dir.path()).status.success());
}

#[test]
fn compare_merges_unfairness_curves() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "ilp.toml", ILP);
    write_config(
        dir.path(),
        "relevance.toml",
        &ILP.replace("policy = \"ilp\"", "policy = \"relevance\"").replace("out_ilp", "out_rel"),
    );
    let out = amortize(&["compare", "ilp.toml", "relevance.toml", "-o", "curves/all.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("curves/all.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("iteration,ilp_theta_0.8,relevance"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 40);
    let last = rows.last().unwrap();
    assert!(last[1] < last[2], "amortized curve should sit below the relevance baseline");
}

#[test]
fn compare_rejects_mismatched_data() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "a.toml", ILP);
    write_config(dir.path(), "b.toml", &ILP.replace("n = 12", "n = 13").replace("out_ilp", "out_b"));
    let out = amortize(&["compare", "a.toml", "b.toml", "-o", "x.csv"], dir.path());
    assert!(!out.status.success());
}
