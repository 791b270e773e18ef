use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::objective::{solve_reference, DEFAULT_REFERENCE_TOL};
use crate::solvers::{algorithm_params, run, Algorithm, SolverConfig, Stepsize};

use super::build::{build_graph, build_problem, profile_of, resolve_alpha, single_node_profile};
use super::config::{ExperimentConfig, ProblemKind};
use super::output::{artifact, fmt_float, Artifact, OutputDir};

/// Iterations each side of one centralized/decentralized pair needed.
#[derive(Clone, Debug, Serialize)]
pub struct SpeedupRow {
    pub n: usize,
    /// The decentralized algorithm of the pair.
    pub algorithm: Algorithm,
    pub central: Algorithm,
    pub target: f64,
    pub alpha: f64,
    /// `None` when the target was not reached within the budget.
    pub iters_central: Option<usize>,
    pub iters_decentralized: Option<usize>,
}

impl SpeedupRow {
    pub fn ratio(&self) -> Option<f64> {
        Some(self.iters_central? as f64 / self.iters_decentralized? as f64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpeedupReport {
    pub kind: &'static str,
    pub seed: u64,
    pub total_samples: usize,
    pub rows: Vec<SpeedupRow>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl SpeedupReport {
    pub fn rows_of(&self, algorithm: Algorithm) -> impl Iterator<Item = &SpeedupRow> {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }

    /// The CSV table `n,algorithm,iters_central,iters_decentralized,ratio`.
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_else(|| "not-reached".into());
        let mut s = String::from("n,algorithm,iters_central,iters_decentralized,ratio\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                r.algorithm,
                cell(r.iters_central),
                cell(r.iters_decentralized),
                r.ratio().map(fmt_float).unwrap_or_else(|| "not-reached".into())
            ));
        }
        s
    }
}

fn central_of(algorithm: Algorithm) -> Algorithm {
    if algorithm == Algorithm::PushSaga {
        Algorithm::SagaCentral
    } else {
        Algorithm::SgdCentral
    }
}

/// For every node count, splits the same amount of data over an `n`-node
/// network and compares iterations to the target gap against the
/// centralized counterpart on the pooled data.
pub fn run_speedup(cfg: &ExperimentConfig) -> Result<SpeedupReport> {
    cfg.validate()?;
    let spec = &cfg.speedup;
    let seed = cfg.seeds[0];

    struct Case {
        n: usize,
        problem: super::build::DynProblem,
        profile: crate::SpectralProfileF64,
        z_star: Vec<f64>,
    }
    let cases: Vec<Case> = spec
        .nodes
        .par_iter()
        .map(|&n| -> Result<Case> {
            let mut pspec = cfg.problem.clone();
            match pspec.kind {
                ProblemKind::Quadratic => pspec.m = spec.total_samples / n,
                ProblemKind::Logistic => pspec.samples = spec.total_samples,
            }
            let problem = build_problem(&pspec, n)?;
            let profile = if n == 1 { single_node_profile()? } else { profile_of(&build_graph(&cfg.graph, n)?)? };
            let z_star = match problem.known_minimizer() {
                Some(z) => z.to_vec(),
                None => solve_reference(problem.as_ref(), DEFAULT_REFERENCE_TOL).z,
            };
            Ok(Case { n, problem, profile, z_star })
        })
        .collect::<Result<_>>()?;

    // Every (case, algorithm, side) triple is independent.
    let mut jobs = Vec::new();
    for (ci, case) in cases.iter().enumerate() {
        for a in &cfg.algorithms {
            let target = if a.name == Algorithm::PushSaga { spec.saga_target } else { spec.sgd_target };
            let params = algorithm_params(a.name, &case.profile, case.problem.as_ref());
            let alpha = resolve_alpha(a.alpha, case.problem.smoothness(), &params)?;
            jobs.push((ci, a.name, central_of(a.name), target, alpha));
        }
    }
    let iters: Vec<(Option<usize>, Option<usize>)> = jobs
        .par_iter()
        .map(|&(ci, alg, central, target, alpha)| -> Result<(Option<usize>, Option<usize>)> {
            let case = &cases[ci];
            let hit = |algorithm: Algorithm| -> Result<Option<usize>> {
                let mut sc = SolverConfig::new(algorithm, Stepsize::Fixed(alpha), cfg.epochs, seed);
                sc.record_every = usize::MAX;
                sc.stop_at_gap = Some(target);
                sc.track_reference_points = false;
                match run(&sc, case.problem.as_ref(), &case.profile, &case.z_star) {
                    Ok(o) => Ok(o.hit_target),
                    Err(crate::Error::Diverged { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            };
            let c = hit(central)?;
            // One node is the centralized method itself.
            let d = if case.n == 1 { c } else { hit(alg)? };
            Ok((c, d))
        })
        .collect::<Result<_>>()?;

    let rows: Vec<SpeedupRow> = jobs
        .iter()
        .zip(iters)
        .map(|(&(ci, algorithm, central, target, alpha), (c, d))| SpeedupRow {
            n: cases[ci].n,
            algorithm,
            central,
            target,
            alpha,
            iters_central: c,
            iters_decentralized: d,
        })
        .collect();

    let report = SpeedupReport {
        kind: "speedup",
        seed,
        total_samples: spec.total_samples,
        rows,
        artifacts: Vec::new(),
    };
    let mut out = OutputDir::create(&cfg.output_dir)?;
    let hash = cfg.content_hash();
    out.write_bytes("speedup.csv", report.to_csv().as_bytes(), artifact("speedup_table", None, Some(seed), hash.clone()))?;
    out.write_json("summary.json", &report, artifact("summary", None, Some(seed), hash.clone()))?;
    let artifacts = out.finish("speedup", hash, cfg.seeds.clone())?;
    Ok(SpeedupReport { artifacts, ..report })
}
