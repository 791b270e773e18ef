//! Experiment campaigns.
//!
//! A campaign is described by an [`ExperimentConfig`] (usually TOML), runs
//! its independent solver jobs on the rayon pool and writes CSV traces, a
//! `summary.json` and a `manifest.json` listing every file with the hash of
//! the parameters that produced it.

mod build;
mod compare;
mod config;
mod network;
mod output;
mod speedup;
mod sweep;

use serde::Serialize;

use crate::error::Result;
use crate::objective::{FiniteSumProblem, ReferenceSolution};
use crate::solvers::Algorithm;

pub use build::{build_graph, build_problem, profile_of, resolve_alpha, single_node_profile, DynProblem, PROFILE_TOL};
pub use compare::{run_compare, CompareReport, CompareRun, RankEntry, TuningPoint, TuningResult};
pub use config::{
    AlgorithmSpec, AlphaPolicy, ExperimentConfig, ExperimentKind, GraphGenerator, GraphSpec, NetworkSpec, ProblemKind,
    ProblemSpec, SpeedupSpec, SweepSpec, TuneBase, TuningSpec,
};
pub use network::{run_network_independence, Level, LevelRun, NetworkReport};
pub use output::{param_hash, Artifact, Manifest, OutputDir};
pub use speedup::{run_speedup, SpeedupReport, SpeedupRow};
pub use sweep::{random_network_params, run_certify_sweep, sweep_rows, SweepReport, SweepRow};

/// How the reference minimizer of a campaign was obtained.
#[derive(Clone, Debug, Serialize)]
pub struct ReferenceInfo {
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&ReferenceSolution<f64>> for ReferenceInfo {
    fn from(r: &ReferenceSolution<f64>) -> Self {
        Self {
            value: r.value,
            grad_norm: r.grad_norm,
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

/// One trace row per epoch: every `N / n` iterations for stochastic
/// methods, every iteration for batch ones.
pub(crate) fn default_record_every(algorithm: Algorithm, problem: &dyn FiniteSumProblem<f64>) -> usize {
    if algorithm.is_stochastic() {
        let counts = problem.counts();
        let total: usize = counts.iter().sum();
        ((total as f64 / counts.len() as f64).round() as usize).max(1)
    } else {
        1
    }
}

/// Result of any campaign kind.
#[derive(Clone, Debug)]
pub enum CampaignReport {
    Compare(CompareReport),
    Speedup(SpeedupReport),
    NetworkIndependence(NetworkReport),
    CertifySweep(SweepReport),
}

impl CampaignReport {
    pub fn artifacts(&self) -> &[Artifact] {
        match self {
            CampaignReport::Compare(r) => &r.artifacts,
            CampaignReport::Speedup(r) => &r.artifacts,
            CampaignReport::NetworkIndependence(r) => &r.artifacts,
            CampaignReport::CertifySweep(r) => &r.artifacts,
        }
    }
}

/// Runs the campaign `cfg.kind` names.
pub fn run_campaign(cfg: &ExperimentConfig) -> Result<CampaignReport> {
    Ok(match cfg.kind {
        ExperimentKind::Compare => CampaignReport::Compare(run_compare(cfg)?),
        ExperimentKind::Speedup => CampaignReport::Speedup(run_speedup(cfg)?),
        ExperimentKind::NetworkIndependence => CampaignReport::NetworkIndependence(run_network_independence(cfg)?),
        ExperimentKind::CertifySweep => CampaignReport::CertifySweep(run_certify_sweep(cfg)?),
    })
}
