use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::{solve_reference, DEFAULT_REFERENCE_TOL};
use crate::solvers::{algorithm_params, run, trace_to_csv, Algorithm, SolverConfig, Stepsize, TraceRow};

use super::build::{build_graph, build_problem, profile_of, resolve_alpha, DynProblem};
use super::config::{AlphaPolicy, ExperimentConfig, TuneBase};
use super::output::{artifact, param_hash, Artifact, OutputDir};
use super::{default_record_every, ReferenceInfo};

/// One finished (or failed) run of a compare campaign.
#[derive(Clone, Debug, Serialize)]
pub struct CompareRun {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub alpha: f64,
    pub alpha_policy: String,
    pub trace_file: String,
    pub epochs_run: f64,
    /// `None` when the run diverged.
    pub final_gap: Option<f64>,
    pub diverged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub tracking_drift: f64,
    pub mass_drift: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

/// Final gap of one stepsize on the tuning grid.
#[derive(Clone, Debug, Serialize)]
pub struct TuningPoint {
    pub alpha: f64,
    pub final_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TuningResult {
    pub algorithm: Algorithm,
    pub base: f64,
    pub grid: Vec<TuningPoint>,
    pub chosen: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankEntry {
    pub algorithm: Algorithm,
    /// Mean final gap over the seeds that did not diverge.
    pub mean_final_gap: Option<f64>,
    pub diverged_runs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub kind: &'static str,
    pub n: usize,
    pub lambda: f64,
    pub psi: f64,
    pub reference: ReferenceInfo,
    pub tuning: Vec<TuningResult>,
    pub ranking: Vec<RankEntry>,
    pub runs: Vec<CompareRun>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl CompareReport {
    pub fn runs_of(&self, algorithm: Algorithm) -> impl Iterator<Item = &CompareRun> {
        self.runs.iter().filter(move |r| r.algorithm == algorithm)
    }
}

struct Job {
    algorithm: Algorithm,
    seed: u64,
    alpha: f64,
}

fn execute(
    job: &Job,
    cfg: &ExperimentConfig,
    problem: &DynProblem,
    profile: &crate::SpectralProfileF64,
    z_star: &[f64],
) -> (Result<crate::RunOutputF64>, usize) {
    let record_every = cfg
        .record_every
        .unwrap_or_else(|| default_record_every(job.algorithm, problem.as_ref()));
    let mut sc = SolverConfig::new(job.algorithm, Stepsize::Fixed(job.alpha), cfg.epochs, job.seed);
    sc.record_every = record_every;
    (run(&sc, problem.as_ref(), profile, z_star), record_every)
}

/// Runs every (algorithm, seed) pair on one network and one problem with a
/// shared reference solution, writes one trace CSV per run, a ranked
/// `summary.json` and `manifest.json`.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<CompareReport> {
    cfg.validate()?;
    let n = cfg.graph.n;
    let graph = build_graph(&cfg.graph, n)?;
    let profile = profile_of(&graph)?;
    let problem = build_problem(&cfg.problem, n)?;
    let reference = solve_reference(problem.as_ref(), DEFAULT_REFERENCE_TOL);
    let z_star = reference.z.clone();
    let smoothness = problem.smoothness();

    // Stepsizes: explicit policies resolve directly, tuned ones search the
    // grid on the first seed.
    let mut tuning = Vec::new();
    let mut alphas = Vec::new();
    for spec in &cfg.algorithms {
        let params = algorithm_params(spec.name, &profile, problem.as_ref());
        let alpha = if spec.alpha == AlphaPolicy::Tuned {
            let base = match cfg.tuning.base {
                TuneBase::AlphaBar => params.alpha_bar(),
                TuneBase::InverseSmoothness => 1.0 / params.smoothness,
            };
            let grid: Vec<f64> = cfg.tuning.multipliers.iter().map(|&c| c * base).collect();
            let gaps: Vec<Option<f64>> = grid
                .par_iter()
                .map(|&alpha| {
                    let job = Job { algorithm: spec.name, seed: cfg.seeds[0], alpha };
                    execute(&job, cfg, &problem, &profile, &z_star).0.ok().map(|o| o.final_gap)
                })
                .collect();
            let chosen = grid
                .iter()
                .zip(&gaps)
                .filter_map(|(&a, g)| g.filter(|g| g.is_finite()).map(|g| (a, g)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(a, _)| a)
                .unwrap_or(grid[0]);
            tuning.push(TuningResult {
                algorithm: spec.name,
                base,
                grid: grid.iter().zip(&gaps).map(|(&alpha, &final_gap)| TuningPoint { alpha, final_gap }).collect(),
                chosen,
            });
            chosen
        } else {
            resolve_alpha(spec.alpha, smoothness, &params)?
        };
        alphas.push((spec, alpha));
    }

    let jobs: Vec<Job> = alphas
        .iter()
        .flat_map(|&(spec, alpha)| cfg.seeds.iter().map(move |&seed| Job { algorithm: spec.name, seed, alpha }))
        .collect();
    let outcomes: Vec<_> = jobs.par_iter().map(|job| execute(job, cfg, &problem, &profile, &z_star)).collect();

    let mut out = OutputDir::create(&cfg.output_dir)?;
    let mut runs = Vec::new();
    for ((job, (outcome, record_every)), (spec, _)) in jobs
        .iter()
        .zip(outcomes)
        .zip(alphas.iter().flat_map(|a| std::iter::repeat_n(a, cfg.seeds.len())))
    {
        let name = format!("{}_seed{}.csv", job.algorithm, job.seed);
        let (trace, run) = match outcome {
            Ok(o) => {
                let run = CompareRun {
                    algorithm: job.algorithm,
                    seed: job.seed,
                    alpha: job.alpha,
                    alpha_policy: spec.alpha.label(),
                    trace_file: name.clone(),
                    epochs_run: o.epochs_run,
                    final_gap: Some(o.final_gap),
                    diverged: false,
                    error: None,
                    tracking_drift: o.tracking_drift,
                    mass_drift: o.mass_drift,
                    trace: Vec::new(),
                };
                (o.trace, run)
            }
            Err(Error::Diverged { iteration, node, reason, partial_trace }) => {
                let msg = Error::Diverged { iteration, node, reason, partial_trace: Vec::new() }.to_string();
                let epochs = partial_trace.last().map(|r| r.epoch).unwrap_or(0.0);
                let run = CompareRun {
                    algorithm: job.algorithm,
                    seed: job.seed,
                    alpha: job.alpha,
                    alpha_policy: spec.alpha.label(),
                    trace_file: name.clone(),
                    epochs_run: epochs,
                    final_gap: None,
                    diverged: true,
                    error: Some(msg),
                    tracking_drift: f64::NAN,
                    mass_drift: f64::NAN,
                    trace: Vec::new(),
                };
                (partial_trace, run)
            }
            Err(e) => return Err(e),
        };
        let hash = param_hash(&(
            job.algorithm,
            job.alpha,
            job.seed,
            cfg.epochs,
            record_every,
            &cfg.graph,
            &cfg.problem,
        ));
        out.write_bytes(&name, &trace_to_csv(&trace), artifact("trace", Some(job.algorithm.name()), Some(job.seed), hash))?;
        runs.push(CompareRun { trace, ..run });
    }

    let ranking = rank(&cfg.algorithms.iter().map(|a| a.name).collect::<Vec<_>>(), &runs);
    let report = CompareReport {
        kind: "compare",
        n,
        lambda: profile.lambda,
        psi: profile.psi,
        reference: ReferenceInfo::from(&reference),
        tuning,
        ranking,
        runs,
        artifacts: Vec::new(),
    };
    out.write_json("summary.json", &report, artifact("summary", None, None, cfg.content_hash()))?;
    let artifacts = out.finish("compare", cfg.content_hash(), cfg.seeds.clone())?;
    Ok(CompareReport { artifacts, ..report })
}

fn rank(algorithms: &[Algorithm], runs: &[CompareRun]) -> Vec<RankEntry> {
    let mut entries: Vec<RankEntry> = algorithms
        .iter()
        .map(|&algorithm| {
            let gaps: Vec<f64> = runs
                .iter()
                .filter(|r| r.algorithm == algorithm)
                .filter_map(|r| r.final_gap)
                .collect();
            let diverged_runs = runs.iter().filter(|r| r.algorithm == algorithm && r.diverged).count();
            let mean_final_gap = (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64);
            RankEntry { algorithm, mean_final_gap, diverged_runs }
        })
        .collect();
    entries.sort_by(|a, b| match (a.mean_final_gap, b.mean_final_gap) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    entries
}
