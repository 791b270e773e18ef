use std::path::PathBuf;

use clap::Args;
use pushsaga_core::harness::{ExperimentConfig, GraphGenerator, GraphSpec, ProblemKind, ProblemSpec};

fn parse_generator(s: &str) -> Result<GraphGenerator, String> {
    match s {
        "exponential" => Ok(GraphGenerator::Exponential),
        "cycle" => Ok(GraphGenerator::Cycle),
        "geometric" => Ok(GraphGenerator::Geometric),
        "file" => Ok(GraphGenerator::File),
        _ => Err(format!("expected exponential, cycle, geometric or file, got '{s}'")),
    }
}

fn parse_problem(s: &str) -> Result<ProblemKind, String> {
    match s {
        "logistic" => Ok(ProblemKind::Logistic),
        "quadratic" => Ok(ProblemKind::Quadratic),
        _ => Err(format!("expected logistic or quadratic, got '{s}'")),
    }
}

/// Flags that override `[graph]` keys.
#[derive(Args, Default)]
pub struct GraphArgs {
    /// exponential, cycle, geometric or file.
    #[arg(long = "gen", value_parser = parse_generator)]
    pub generator: Option<GraphGenerator>,
    /// Node count.
    #[arg(long)]
    pub n: Option<usize>,
    /// Random edges added to the cycle.
    #[arg(long)]
    pub extra: Option<usize>,
    /// Connection radius of the geometric generator.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Seed of the random graph generators.
    #[arg(long)]
    pub graph_seed: Option<u64>,
    /// Graph text file; implies `--gen file`.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

impl GraphArgs {
    pub fn apply(&self, spec: &mut GraphSpec) {
        if let Some(g) = self.generator {
            spec.generator = g;
        }
        if let Some(n) = self.n {
            spec.n = n;
        }
        if let Some(e) = self.extra {
            spec.extra = e;
        }
        if let Some(r) = self.radius {
            spec.radius = r;
        }
        if let Some(s) = self.graph_seed {
            spec.seed = s;
        }
        if let Some(p) = &self.graph {
            spec.generator = GraphGenerator::File;
            spec.path = Some(p.clone());
        }
    }
}

/// Flags that override `[problem]` keys.
#[derive(Args, Default)]
pub struct ProblemArgs {
    /// logistic or quadratic.
    #[arg(long, value_parser = parse_problem)]
    pub problem: Option<ProblemKind>,
    /// Components per node (quadratic).
    #[arg(long)]
    pub m: Option<usize>,
    /// Total samples (synthetic logistic).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Feature or variable dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Condition number of the quadratic.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Ridge weight of the logistic loss.
    #[arg(long)]
    pub reg: Option<f64>,
    /// CSV dataset for logistic regression.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Seed of the synthetic data.
    #[arg(long)]
    pub problem_seed: Option<u64>,
}

impl ProblemArgs {
    pub fn apply(&self, spec: &mut ProblemSpec) {
        if let Some(k) = self.problem {
            spec.kind = k;
        }
        if let Some(m) = self.m {
            spec.m = m;
        }
        if let Some(s) = self.samples {
            spec.samples = s;
        }
        if let Some(d) = self.dim {
            spec.dim = d;
        }
        if let Some(k) = self.kappa {
            spec.kappa = k;
        }
        if let Some(r) = self.reg {
            spec.reg = r;
        }
        if let Some(p) = &self.data {
            spec.kind = ProblemKind::Logistic;
            spec.csv = Some(p.clone());
        }
        if let Some(s) = self.problem_seed {
            spec.seed = s;
        }
    }
}

/// Flags that override top-level run keys.
#[derive(Args, Default)]
pub struct RunArgs {
    /// Solver seed; replaces the seed list.
    #[arg(long = "seed")]
    pub seed: Option<u64>,
    /// Run length in epochs.
    #[arg(long)]
    pub epochs: Option<f64>,
    /// Iterations between trace rows.
    #[arg(long)]
    pub record_every: Option<usize>,
}

impl RunArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.seeds = vec![s];
        }
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        if let Some(r) = self.record_every {
            cfg.record_every = Some(r);
        }
    }
}
