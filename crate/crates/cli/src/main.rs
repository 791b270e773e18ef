//! `pushsaga`: command-line access to the solvers and the rate certificate.
//!
//! Exit codes: 0 on success, 1 on runtime failures (divergence, graph
//! generation, refused algorithm/network pairs, i/o), 2 on usage and
//! configuration errors. Payloads go to stdout, diagnostics to stderr.

mod overrides;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pushsaga_core::analysis::{certify, NetworkParams};
use pushsaga_core::digraph::DirectedGraph;
use pushsaga_core::harness::{
    build_graph, build_problem, profile_of, resolve_alpha, run_campaign, AlphaPolicy, ExperimentConfig,
    ExperimentKind, OutputDir,
};
use pushsaga_core::objective::{solve_reference, DEFAULT_REFERENCE_TOL};
use pushsaga_core::solvers::{algorithm_params, run, trace_to_csv, Algorithm, RunSummary, SolverConfig, Stepsize};
use pushsaga_core::{Error, Result};

use overrides::{GraphArgs, ProblemArgs, RunArgs};

#[derive(Parser)]
#[command(name = "pushsaga", version, about = "Push-SAGA and baselines over directed graphs")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it in the text format.
    Graph(GraphCmd),
    /// Print the spectral profile of a graph file as JSON.
    Profile(ProfileCmd),
    /// Run one algorithm and write its trace.
    Solve(SolveCmd),
    /// Run a campaign described by a TOML config.
    Campaign(CampaignCmd),
    /// Check the linear-rate certificate for one stepsize.
    Certify(CertifyCmd),
}

#[derive(Args)]
struct GraphCmd {
    #[command(flatten)]
    graph: GraphArgs,
    /// Generator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Graph file to write; the graph text goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileCmd {
    /// Graph file in the text format.
    graph: PathBuf,
}

#[derive(Args)]
struct SolveCmd {
    /// TOML config supplying defaults; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    run: RunArgs,
    /// push_saga, sgp, saddopt, gp, addopt, dsgd, sgd_central or saga_central.
    #[arg(long)]
    alg: Option<Algorithm>,
    /// `theory`, a number or `c/L`.
    #[arg(long)]
    alpha: Option<String>,
    /// Directory for `trace.csv` and `summary.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CampaignCmd {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Output directory, replacing `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyCmd {
    /// Stepsize: a number or `theory`. Defaults to `alpha_bar`.
    #[arg(long, conflicts_with = "alpha_bar")]
    alpha: Option<String>,
    /// Certify at `alpha_bar`.
    #[arg(long)]
    alpha_bar: bool,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Explicit constants; when `--lambda` is given all of them are used
    /// instead of a graph and problem.
    #[arg(long, requires_all = ["smoothness", "mu", "psi"])]
    lambda: Option<f64>,
    #[arg(long)]
    smoothness: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long = "nodes", default_value_t = 2)]
    nodes: usize,
    #[arg(long = "m-min", default_value_t = 1)]
    m_min: usize,
    #[arg(long = "m-max", default_value_t = 1)]
    m_max: usize,
    /// Defaults to `1/n`.
    #[arg(long)]
    pi_max: Option<f64>,
    /// Defaults to `1/n`.
    #[arg(long)]
    pi_min: Option<f64>,
    #[arg(long = "push-sum-t", default_value_t = 0.0)]
    t: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: could not start the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::Graph(c) => cmd_graph(c),
        Command::Profile(c) => cmd_profile(c),
        Command::Solve(c) => cmd_solve(c),
        Command::Campaign(c) => cmd_campaign(c),
        Command::Certify(c) => cmd_certify(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn print_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        // A closed pipe (`| head`) is the reader's choice, not a failure.
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Error::Io { path: "<stdout>".into(), source: e })
        }
        _ => Ok(()),
    }
}

fn print_json<S: serde::Serialize>(value: &S) -> Result<()> {
    print_stdout(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn cmd_graph(c: GraphCmd) -> Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Compare);
    c.graph.apply(&mut cfg.graph);
    if let Some(s) = c.seed {
        cfg.graph.seed = s;
    }
    let g = build_graph(&cfg.graph, cfg.graph.n)?;
    let info = serde_json::json!({
        "n": g.n(),
        "edges": g.edge_count(),
        "strongly_connected": g.is_strongly_connected(),
    });
    match c.out {
        Some(path) => {
            write_file(&path, g.to_text().as_bytes())?;
            print_json(&info)
        }
        None => {
            print_stdout(&g.to_text())?;
            eprintln!("{info}");
            Ok(())
        }
    }
}

fn cmd_profile(c: ProfileCmd) -> Result<()> {
    let text = std::fs::read_to_string(&c.graph)
        .map_err(|source| Error::Io { path: c.graph.display().to_string(), source })?;
    let g = DirectedGraph::from_text(&text)?;
    print_json(&profile_of(&g)?.to_json())
}

fn load_config(path: Option<&PathBuf>, kind: ExperimentKind) -> Result<ExperimentConfig> {
    match path {
        Some(p) => {
            let mut cfg = ExperimentConfig::from_path(p)?;
            cfg.kind = kind;
            Ok(cfg)
        }
        None => Ok(ExperimentConfig::new(kind)),
    }
}

fn cmd_solve(c: SolveCmd) -> Result<()> {
    let mut cfg = load_config(c.config.as_ref(), ExperimentKind::Compare)?;
    c.graph.apply(&mut cfg.graph);
    c.problem.apply(&mut cfg.problem);
    c.run.apply(&mut cfg);
    let (algorithm, policy) = match (c.alg, cfg.algorithms.first()) {
        (Some(a), first) => (a, first.filter(|s| s.name == a).map(|s| s.alpha)),
        (None, Some(s)) => (s.name, Some(s.alpha)),
        (None, None) => return Err(Error::InvalidConfiguration("--alg is required".into())),
    };
    let policy = match c.alpha.as_deref() {
        Some(s) => AlphaPolicy::parse(s)?,
        None => match policy {
            Some(AlphaPolicy::Tuned) | None => AlphaPolicy::Theory,
            Some(p) => p,
        },
    };
    if policy == AlphaPolicy::Tuned {
        return Err(Error::InvalidConfiguration("--alpha: 'tuned' needs a compare campaign".into()));
    }

    let graph = build_graph(&cfg.graph, cfg.graph.n)?;
    let n = graph.n();
    let profile = profile_of(&graph)?;
    let problem = build_problem(&cfg.problem, n)?;
    let params = algorithm_params(algorithm, &profile, problem.as_ref());
    let alpha = resolve_alpha(policy, problem.smoothness(), &params)?;
    let z_star = match problem.known_minimizer() {
        Some(z) => z.to_vec(),
        None => solve_reference(problem.as_ref(), DEFAULT_REFERENCE_TOL).z,
    };

    let seed = cfg.seeds[0];
    let mut sc = SolverConfig::new(algorithm, Stepsize::Fixed(alpha), cfg.epochs, seed);
    if let Some(r) = cfg.record_every {
        sc.record_every = r;
    } else if algorithm.is_stochastic() {
        let counts = problem.counts();
        sc.record_every = ((counts.iter().sum::<usize>() as f64 / counts.len() as f64).round() as usize).max(1);
    }

    let (trace, summary, failure) = match run(&sc, problem.as_ref(), &profile, &z_star) {
        Ok(o) => (o.trace.clone(), o.summary(), None),
        Err(Error::Diverged { iteration, node, reason, partial_trace }) => {
            let summary = RunSummary {
                algorithm: algorithm.name().to_string(),
                alpha,
                alpha_bar: params.alpha_bar(),
                gamma: params.gamma(),
                seed,
                n,
                epochs_run: partial_trace.last().map(|r| r.epoch).unwrap_or(0.0),
                final_gap: None,
                diverged: true,
            };
            let err = Error::Diverged { iteration, node, reason, partial_trace: Vec::new() };
            (partial_trace, summary, Some(err))
        }
        Err(e) => return Err(e),
    };
    if let Some(dir) = &c.out {
        let mut out = OutputDir::create(dir)?;
        let hash = pushsaga_core::harness::param_hash(&(&summary, &cfg.graph, &cfg.problem, sc.record_every));
        let mk = |kind: &str| pushsaga_core::harness::Artifact {
            path: String::new(),
            kind: kind.into(),
            algorithm: Some(algorithm.name().into()),
            seed: Some(seed),
            params_hash: hash.clone(),
        };
        out.write_bytes("trace.csv", &trace_to_csv(&trace), mk("trace"))?;
        out.write_json("summary.json", &summary, mk("summary"))?;
        out.finish("solve", hash.clone(), vec![seed])?;
    }
    print_json(&summary)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn cmd_campaign(c: CampaignCmd) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&c.config)?;
    c.graph.apply(&mut cfg.graph);
    c.problem.apply(&mut cfg.problem);
    c.run.apply(&mut cfg);
    if let Some(out) = c.out {
        cfg.output_dir = out;
    }
    cfg.validate()?;
    let report = run_campaign(&cfg)?;
    print_json(&serde_json::json!({
        "kind": cfg.kind.name(),
        "output_dir": cfg.output_dir,
        "artifacts": report.artifacts(),
    }))
}

fn cmd_certify(c: CertifyCmd) -> Result<()> {
    let params = match c.lambda {
        Some(lambda) => {
            let uniform = 1.0 / c.nodes as f64;
            NetworkParams {
                lambda,
                smoothness: c.smoothness.unwrap_or_default(),
                strong_convexity: c.mu.unwrap_or_default(),
                n: c.nodes,
                m_min: c.m_min,
                m_max: c.m_max,
                psi: c.psi.unwrap_or_default(),
                pi_max: c.pi_max.unwrap_or(uniform),
                pi_min: c.pi_min.unwrap_or(uniform),
                t: c.t,
            }
        }
        None => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Compare);
            c.graph.apply(&mut cfg.graph);
            c.problem.apply(&mut cfg.problem);
            let g = build_graph(&cfg.graph, cfg.graph.n)?;
            let profile = profile_of(&g)?;
            let problem = build_problem(&cfg.problem, g.n())?;
            algorithm_params(Algorithm::PushSaga, &profile, problem.as_ref())
        }
    };
    params.validate()?;
    let alpha = match c.alpha.as_deref() {
        None => params.alpha_bar(),
        Some(s) => match Stepsize::<f64>::parse(s)? {
            Stepsize::Theory => params.alpha_bar(),
            Stepsize::Fixed(a) => a,
        },
    };
    print_json(&certify(alpha, &params)?.to_json())
}
