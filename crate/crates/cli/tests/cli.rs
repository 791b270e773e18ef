use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pushsaga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pushsaga"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn graph_writes_file_and_reports_connectivity() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.txt");
    let o = pushsaga(&["graph", "--gen", "exponential", "--n", "16", "--out", p(&file)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let info = stdout_json(&o);
    assert_eq!(info["strongly_connected"], Value::Bool(true));
    assert_eq!(info["n"], 16);
    let text = std::fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().next(), Some("16"));
    // Self plus four hops at every node.
    assert!(text.lines().skip(1).all(|l| l.split_whitespace().count() == 6), "{text}");
}

#[test]
fn over_capacity_cycle_is_a_usage_error() {
    let o = pushsaga(&["graph", "--gen", "cycle", "--n", "8", "--extra", "100"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("extra"), "{}", stderr(&o));
}

#[test]
fn geometric_graph_is_reproducible() {
    let args = ["graph", "--gen", "geometric", "--n", "32", "--radius", "0.5", "--seed", "7"];
    let a = pushsaga(&args);
    let b = pushsaga(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn unknown_flag_and_subcommand_exit_two() {
    assert_eq!(code(&pushsaga(&["solve", "--bogus"])), 2);
    assert_eq!(code(&pushsaga(&["frobnicate"])), 2);
    assert_eq!(code(&pushsaga(&["solve", "--alg", "nope"])), 2);
    assert_eq!(code(&pushsaga(&["--help"])), 0);
}

fn profile_of(dir: &Path, args: &[&str]) -> Value {
    let file = dir.join("g.txt");
    let mut full = vec!["graph", "--out", p(&file)];
    full.extend_from_slice(args);
    let o = pushsaga(&full);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = pushsaga(&["profile", p(&file)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    stdout_json(&o)
}

#[test]
fn profile_of_five_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let prof = profile_of(dir.path(), &["--gen", "cycle", "--n", "5"]);
    // Eigenvalues of the lazy cycle are (1 + w) / 2 for fifth roots of unity w.
    let expected = (std::f64::consts::PI / 5.0).cos();
    assert!((prof["lambda"].as_f64().unwrap() - expected).abs() < 1e-9, "{prof}");
    // Every node has in- and out-degree two, so the weights are doubly stochastic.
    assert!((prof["psi"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    for key in ["n", "lambda", "h", "T", "y", "y_inv", "psi", "pi"] {
        assert!(prof.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn profile_of_complete_graph() {
    let dir = tempfile::tempdir().unwrap();
    let prof = profile_of(dir.path(), &["--gen", "cycle", "--n", "5", "--extra", "15"]);
    assert!(prof["lambda"].as_f64().unwrap().abs() < 1e-12, "{prof}");
}

#[test]
fn missing_graph_file_is_a_runtime_error() {
    let o = pushsaga(&["profile", "/nonexistent/graph.txt"]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
}

#[test]
fn theory_stepsize_solves_the_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let o = pushsaga(&[
        "solve", "--gen", "exponential", "--n", "4", "--problem", "quadratic", "--m", "10", "--dim", "3",
        "--kappa", "2", "--alg", "push_saga", "--alpha", "theory", "--epochs", "8000", "--record-every", "1000",
        "--out", p(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = stdout_json(&o);
    assert!(s["final_gap"].as_f64().unwrap() <= 1e-10, "{s}");
    assert_eq!(s["alpha"], s["alpha_bar"]);
    assert!(dir.path().join("trace.csv").exists());
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["artifacts"].as_array().unwrap().len(), 2);
}

#[test]
fn dsgd_refuses_directed_graphs() {
    let o = pushsaga(&[
        "solve", "--gen", "cycle", "--n", "6", "--extra", "5", "--graph-seed", "3", "--alg", "dsgd", "--alpha", "0.01",
        "--epochs", "2",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("requires doubly stochastic"), "{}", stderr(&o));
}

#[test]
fn divergence_exits_one_and_keeps_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = pushsaga(&[
        "solve", "--gen", "exponential", "--n", "4", "--problem", "quadratic", "--m", "5", "--alg", "addopt",
        "--alpha", "100/L", "--epochs", "500", "--out", p(dir.path()),
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("diverged"), "{}", stderr(&o));
    let s = stdout_json(&o);
    assert_eq!(s["diverged"], Value::Bool(true));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.lines().count() >= 2, "{trace}");
}

#[test]
fn same_seed_gives_identical_trace_bytes() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = pushsaga(&[
            "--threads", threads, "solve", "--gen", "geometric", "--n", "8", "--graph-seed", "2", "--samples", "400",
            "--alg", "push_saga", "--alpha", "0.5/L", "--epochs", "5", "--seed", "42", "--out", p(dir.path()),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(dir.path().join("trace.csv")).unwrap()
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("4"));
}

#[test]
fn compare_campaign_writes_traces_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("compare.toml");
    std::fs::write(
        &cfg,
        r#"
kind = "compare"
epochs = 3

[graph]
generator = "exponential"
n = 16

[problem]
samples = 320
dim = 4

[tuning]
base = "inverse_smoothness"
multipliers = [0.25, 0.5]

[[algorithms]]
name = "push_saga"

[[algorithms]]
name = "sgp"
alpha = "0.25/L"

[[algorithms]]
name = "saddopt"
alpha = "0.25/L"

[[algorithms]]
name = "gp"
alpha = "0.25/L"

[[algorithms]]
name = "addopt"
alpha = "theory"
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = pushsaga(&["campaign", "--config", p(&cfg), "--out", p(&out), "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let traces: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert!(traces.len() >= 5, "{traces:?}");
    assert!(traces.contains(&"push_saga_seed5.csv".to_string()));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"], serde_json::json!([5]));
    assert_eq!(manifest["artifacts"].as_array().unwrap().len(), traces.len() + 1);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["ranking"].as_array().unwrap().len(), 5);
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"compare\"\n\n[graph]\nnodes = 4\n").unwrap();
    let o = pushsaga(&["campaign", "--config", p(&cfg)]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("nodes") && err.contains("line 4"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn certify_at_alpha_bar_reports_closed_form_gamma() {
    let (l, mu, lambda, psi, m, big_m): (f64, f64, f64, f64, f64, f64) = (4.0, 1.0, 0.5, 2.0, 8.0, 16.0);
    let o = pushsaga(&[
        "certify", "--alpha-bar", "--lambda", "0.5", "--smoothness", "4", "--mu", "1", "--psi", "2", "--nodes", "4",
        "--m-min", "8", "--m-max", "16", "--pi-max", "0.3", "--pi-min", "0.2", "--push-sum-t", "0.1",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let c = stdout_json(&o);
    let kappa = l / mu;
    let gamma = 1.0 - f64::min(1.0 / (20.0 * big_m), m / (1600.0 * big_m) * (1.0 - lambda).powi(2) / (kappa * kappa * psi));
    let alpha_bar = f64::min(1.0 / (5.0 * big_m * mu), (m / big_m) * (1.0 - lambda).powi(2) / (400.0 * l * kappa * psi));
    assert!((c["gamma_closed_form"].as_f64().unwrap() - gamma).abs() < 1e-15, "{c}");
    assert!((c["alpha_bar"].as_f64().unwrap() - alpha_bar).abs() < 1e-18, "{c}");
    assert_eq!(c["alpha"], c["alpha_bar"]);
    assert_eq!(c["pass"], Value::Bool(true));
}

#[test]
fn certify_rejects_invalid_constants() {
    let o = pushsaga(&["certify", "--lambda", "1.5", "--smoothness", "1", "--mu", "1", "--psi", "1"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}
