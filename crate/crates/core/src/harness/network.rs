use rayon::prelude::*;
use serde::Serialize;

use crate::digraph::build_cycle_plus_edges;
use crate::error::{Error, Result};
use crate::objective::{solve_reference, DEFAULT_REFERENCE_TOL};
use crate::solvers::{algorithm_params, run, trace_to_csv, Algorithm, SolverConfig, Stepsize};

use super::build::{build_problem, profile_of, resolve_alpha};
use super::config::{AlphaPolicy, ExperimentConfig};
use super::default_record_every;
use super::output::{artifact, param_hash, Artifact, OutputDir};

/// One connectivity level of the cycle-plus-edges family.
#[derive(Clone, Debug, Serialize)]
pub struct Level {
    pub extra: usize,
    pub lambda: f64,
    pub psi: f64,
    /// `m (1 - lambda)^2 / psi`.
    pub indicator: f64,
    pub in_regime: bool,
    pub runs: Vec<LevelRun>,
    /// Mean over seeds; `None` when some seed missed the target.
    pub epochs_to_target: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelRun {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub trace_file: String,
    pub epochs_to_target: Option<f64>,
    pub final_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NetworkReport {
    pub kind: &'static str,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub target: f64,
    pub regime_factor: f64,
    pub levels: Vec<Level>,
    /// `(max - min) / min` of the epochs to target over in-regime levels.
    pub spread: Option<f64>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

/// Runs the first configured algorithm on a family of cycle-plus-edges
/// graphs with one shared stepsize and reports how much the epochs to the
/// target gap move across the levels that satisfy the regime indicator.
pub fn run_network_independence(cfg: &ExperimentConfig) -> Result<NetworkReport> {
    cfg.validate()?;
    let spec = &cfg.network;
    let n = cfg.graph.n;
    let algorithm = cfg.algorithms[0].name;
    let problem = build_problem(&cfg.problem, n)?;
    let z_star = match problem.known_minimizer() {
        Some(z) => z.to_vec(),
        None => solve_reference(problem.as_ref(), DEFAULT_REFERENCE_TOL).z,
    };
    let m = problem.counts().into_iter().min().unwrap_or(0);

    let profiles = spec
        .extras
        .par_iter()
        .map(|&extra| profile_of(&build_cycle_plus_edges(n, extra, cfg.graph.seed)?))
        .collect::<Result<Vec<_>>>()?;

    // One stepsize for every level. The theory policy takes the most
    // conservative level.
    let alpha = match cfg.algorithms[0].alpha {
        AlphaPolicy::Tuned => {
            return Err(Error::InvalidConfiguration(
                "algorithms.alpha: network_independence needs an explicit or theory stepsize".into(),
            ))
        }
        AlphaPolicy::Theory => profiles
            .iter()
            .map(|p| algorithm_params(algorithm, p, problem.as_ref()).alpha_bar())
            .fold(f64::INFINITY, f64::min),
        policy => resolve_alpha(policy, problem.smoothness(), &algorithm_params(algorithm, &profiles[0], problem.as_ref()))?,
    };
    let record_every = cfg.record_every.unwrap_or_else(|| default_record_every(algorithm, problem.as_ref()));

    let jobs: Vec<(usize, u64)> = (0..profiles.len())
        .flat_map(|li| cfg.seeds.iter().map(move |&s| (li, s)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(li, seed)| {
            let mut sc = SolverConfig::new(algorithm, Stepsize::Fixed(alpha), cfg.epochs, seed);
            sc.record_every = record_every;
            sc.stop_at_gap = Some(spec.target);
            sc.track_reference_points = false;
            match run(&sc, problem.as_ref(), &profiles[li], &z_star) {
                Ok(o) => Ok((o.hit_target_epoch(), Some(o.final_gap), o.trace)),
                Err(Error::Diverged { partial_trace, .. }) => Ok((None, None, partial_trace)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = OutputDir::create(&cfg.output_dir)?;
    let mut levels: Vec<Level> = spec
        .extras
        .iter()
        .zip(&profiles)
        .map(|(&extra, p)| {
            let indicator = m as f64 * (1.0 - p.lambda).powi(2) / p.psi;
            Level {
                extra,
                lambda: p.lambda,
                psi: p.psi,
                indicator,
                in_regime: indicator >= spec.regime_factor,
                runs: Vec::new(),
                epochs_to_target: None,
            }
        })
        .collect();
    for (&(li, seed), (epochs, final_gap, trace)) in jobs.iter().zip(outcomes) {
        let name = format!("{}_extra{}_seed{}.csv", algorithm, levels[li].extra, seed);
        let hash = param_hash(&(algorithm, alpha, seed, levels[li].extra, &cfg.graph, &cfg.problem));
        out.write_bytes(&name, &trace_to_csv(&trace), artifact("trace", Some(algorithm.name()), Some(seed), hash))?;
        levels[li].runs.push(LevelRun { algorithm, seed, trace_file: name, epochs_to_target: epochs, final_gap });
    }
    for level in &mut levels {
        let hits: Option<Vec<f64>> = level.runs.iter().map(|r| r.epochs_to_target).collect();
        level.epochs_to_target = hits.map(|h| h.iter().sum::<f64>() / h.len() as f64);
    }

    let in_regime: Option<Vec<f64>> = levels.iter().filter(|l| l.in_regime).map(|l| l.epochs_to_target).collect();
    let spread = in_regime.filter(|v| !v.is_empty()).map(|v| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo
    });

    let report = NetworkReport {
        kind: "network_independence",
        n,
        m,
        alpha,
        target: spec.target,
        regime_factor: spec.regime_factor,
        levels,
        spread,
        artifacts: Vec::new(),
    };
    let hash = cfg.content_hash();
    out.write_json("summary.json", &report, artifact("summary", Some(algorithm.name()), None, hash.clone()))?;
    let artifacts = out.finish("network_independence", hash, cfg.seeds.clone())?;
    Ok(NetworkReport { artifacts, ..report })
}
