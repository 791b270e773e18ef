use std::path::Path;

use pushsaga_core::harness::{
    run_campaign, AlgorithmSpec, AlphaPolicy, CampaignReport, ExperimentConfig, ExperimentKind, GraphGenerator,
    ProblemKind,
};
use pushsaga_core::solvers::Algorithm;
use pushsaga_core::Error;

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Every artifact listed in the manifest exists, and nothing else was written.
fn check_manifest(dir: &Path, kind: &str) -> serde_json::Value {
    let m = manifest(dir);
    assert_eq!(m["kind"], kind);
    let listed: Vec<String> =
        m["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap().to_string()).collect();
    for p in &listed {
        assert!(dir.join(p).is_file(), "{p} listed but missing");
    }
    let mut on_disk: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut sorted = listed.clone();
    sorted.sort();
    assert_eq!(on_disk, sorted);
    m
}

#[test]
fn config_survives_a_toml_round_trip() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Compare);
    cfg.seeds = vec![3, 9];
    cfg.record_every = Some(7);
    cfg.graph.generator = GraphGenerator::Cycle;
    cfg.graph.extra = 5;
    cfg.problem.kind = ProblemKind::Quadratic;
    cfg.algorithms = vec![
        AlgorithmSpec { name: Algorithm::PushSaga, alpha: AlphaPolicy::Theory },
        AlgorithmSpec { name: Algorithm::Sgp, alpha: AlphaPolicy::Fixed(0.125) },
        AlgorithmSpec { name: Algorithm::Gp, alpha: AlphaPolicy::Tuned },
    ];
    let text = cfg.to_toml_string();
    let back = ExperimentConfig::from_toml_str(&text).unwrap();
    assert_eq!(back, cfg, "{text}");
}

#[test]
fn invalid_configs_are_rejected_with_the_key() {
    let err = ExperimentConfig::from_toml_str("kind = \"compare\"\nseeds = [1, 1]\n[[algorithms]]\nname = \"gp\"\n")
        .unwrap_err();
    assert!(matches!(&err, Error::InvalidConfiguration(m) if m.contains("seeds")), "{err}");
    let err = ExperimentConfig::from_toml_str("kind = \"speedup\"\n[[algorithms]]\nname = \"gp\"\nalpha = \"theory\"\n")
        .unwrap_err();
    assert!(err.to_string().contains("algorithms"), "{err}");
    let err = ExperimentConfig::from_toml_str("kind = \"warp\"\n").unwrap_err();
    assert!(err.to_string().contains("line 1"), "{err}");
}

#[test]
fn small_speedup_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Speedup);
    cfg.output_dir = dir.path().to_path_buf();
    cfg.graph.generator = GraphGenerator::Exponential;
    cfg.problem.kind = ProblemKind::Quadratic;
    cfg.problem.dim = 4;
    cfg.speedup.nodes = vec![1, 2, 4];
    cfg.speedup.total_samples = 400;
    cfg.speedup.saga_target = 1e-8;
    cfg.epochs = 300.0;
    cfg.algorithms = vec![AlgorithmSpec { name: Algorithm::PushSaga, alpha: AlphaPolicy::Fixed(0.01) }];
    let CampaignReport::Speedup(report) = run_campaign(&cfg).unwrap() else { panic!("wrong report kind") };
    assert_eq!(report.rows.len(), 3);
    for row in &report.rows {
        assert_eq!(row.central, Algorithm::SagaCentral);
        assert!(row.iters_central.is_some() && row.iters_decentralized.is_some(), "{row:?}");
    }
    assert!(report.rows[2].ratio().unwrap() > 1.5, "{:?}", report.rows);
    check_manifest(dir.path(), "speedup");
    let csv = std::fs::read_to_string(dir.path().join("speedup.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn small_network_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::NetworkIndependence);
    cfg.output_dir = dir.path().to_path_buf();
    cfg.graph.n = 6;
    cfg.graph.seed = 4;
    cfg.problem.kind = ProblemKind::Quadratic;
    cfg.problem.m = 200;
    cfg.problem.dim = 3;
    cfg.network.extras = vec![0, 10, 24];
    cfg.network.target = 1e-6;
    cfg.epochs = 200.0;
    cfg.seeds = vec![1, 2];
    cfg.algorithms = vec![AlgorithmSpec { name: Algorithm::PushSaga, alpha: AlphaPolicy::Fixed(0.02) }];
    let CampaignReport::NetworkIndependence(report) = run_campaign(&cfg).unwrap() else { panic!("wrong report kind") };
    assert_eq!(report.levels.len(), 3);
    // More edges never slow mixing on this family; the complete graph mixes in one step.
    assert!(report.levels[2].lambda < 1e-9);
    for level in &report.levels {
        assert_eq!(level.runs.len(), 2);
        assert_eq!(level.in_regime, level.indicator >= cfg.network.regime_factor);
    }
    let m = check_manifest(dir.path(), "network_independence");
    assert_eq!(m["seeds"], serde_json::json!([1, 2]));
    assert!(dir.path().join("push_saga_extra10_seed2.csv").is_file());
}

#[test]
fn sweep_campaign_certifies_every_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::CertifySweep);
    cfg.output_dir = dir.path().to_path_buf();
    cfg.sweep.tuples = 25;
    cfg.sweep.alpha_multipliers = vec![0.5, 1.0, 3.0];
    let CampaignReport::CertifySweep(report) = run_campaign(&cfg).unwrap() else { panic!("wrong report kind") };
    assert_eq!(report.rows.len(), 75);
    for r in &report.rows {
        if r.alpha_multiplier <= 1.0 {
            assert!(r.pass && r.rho <= r.gamma_working + 1e-9, "{r:?}");
        }
        assert_eq!(r.guaranteed, r.alpha_multiplier < 1.0);
    }
    check_manifest(dir.path(), "certify_sweep");
}

#[test]
fn campaigns_are_reproducible() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(ExperimentKind::Compare);
        cfg.output_dir = dir.path().to_path_buf();
        cfg.graph.n = 5;
        cfg.problem.samples = 100;
        cfg.problem.dim = 3;
        cfg.epochs = 3.0;
        cfg.seeds = vec![4];
        cfg.algorithms = vec![
            AlgorithmSpec { name: Algorithm::PushSaga, alpha: AlphaPolicy::Fixed(0.05) },
            AlgorithmSpec { name: Algorithm::Sgp, alpha: AlphaPolicy::Fixed(0.05) },
        ];
        run_campaign(&cfg).unwrap();
        let m = manifest(dir.path());
        let trace = std::fs::read(dir.path().join("push_saga_seed4.csv")).unwrap();
        (m, trace)
    };
    assert_eq!(run(), run());
}
