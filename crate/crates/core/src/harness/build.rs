use crate::analysis::NetworkParams;
use crate::digraph::{
    build_cycle_plus_edges, build_exponential_graph, build_geometric_digraph_with, make_column_stochastic,
    spectral_profile, DirectedGraph, Matrix, SpectralProfile,
};
use crate::error::{Error, Result};
use crate::objective::{
    load_csv_dataset, make_logistic, make_synthetic_classification, FiniteSumProblem, Partition, PartitionMode,
    QuadraticProblem,
};

use super::config::{AlphaPolicy, GraphGenerator, GraphSpec, ProblemKind, ProblemSpec};

/// Push-sum tolerance used for every profile the harness computes.
pub const PROFILE_TOL: f64 = 1e-13;

pub type DynProblem = Box<dyn FiniteSumProblem<f64>>;

/// Builds the graph of `spec` with `n` nodes.
pub fn build_graph(spec: &GraphSpec, n: usize) -> Result<DirectedGraph> {
    match spec.generator {
        GraphGenerator::Exponential => build_exponential_graph(n),
        GraphGenerator::Cycle => build_cycle_plus_edges(n, spec.extra, spec.seed),
        GraphGenerator::Geometric => build_geometric_digraph_with(n, spec.radius, spec.seed, spec.one_way_probability),
        GraphGenerator::File => {
            let path = spec
                .path
                .as_ref()
                .ok_or_else(|| Error::InvalidConfiguration("graph.path: required for file graphs".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            DirectedGraph::from_text(&text)
        }
    }
}

/// Spectral profile of `g` under uniform out-degree weights. A single node
/// gets the trivial profile.
pub fn profile_of(g: &DirectedGraph) -> Result<SpectralProfile<f64>> {
    spectral_profile(&make_column_stochastic::<f64>(g), PROFILE_TOL)
}

/// Profile of the one-node network.
pub fn single_node_profile() -> Result<SpectralProfile<f64>> {
    spectral_profile(&Matrix::from_rows(&[vec![1.0]])?, PROFILE_TOL)
}

/// Builds the problem of `spec` split over `n` nodes. For quadratics `m` is
/// the per-node count; for logistic data `samples` is the total.
pub fn build_problem(spec: &ProblemSpec, n: usize) -> Result<DynProblem> {
    match spec.kind {
        ProblemKind::Quadratic => {
            let counts = match spec.partition {
                PartitionMode::Equal => vec![spec.m; n],
                PartitionMode::RandomUneven => Partition::random_uneven(spec.m * n, n, spec.seed)?.counts().to_vec(),
            };
            Ok(Box::new(QuadraticProblem::<f64>::random(&counts, spec.dim, spec.kappa, spec.seed)?))
        }
        ProblemKind::Logistic => {
            let data = match &spec.csv {
                Some(path) => load_csv_dataset::<f64>(path, spec.scale)?,
                None => make_synthetic_classification::<f64>(spec.samples, spec.dim, spec.separation, spec.seed)?,
            };
            let partition = match spec.partition {
                PartitionMode::Equal => Partition::equal(data.len(), n)?,
                PartitionMode::RandomUneven => Partition::random_uneven(data.len(), n, spec.seed)?,
            };
            Ok(Box::new(make_logistic(data, partition, spec.reg)?))
        }
    }
}

/// Resolves a non-tuned stepsize policy.
pub fn resolve_alpha(policy: AlphaPolicy, smoothness: f64, params: &NetworkParams<f64>) -> Result<f64> {
    match policy {
        AlphaPolicy::Theory => Ok(params.alpha_bar()),
        AlphaPolicy::Fixed(a) => Ok(a),
        AlphaPolicy::OverSmoothness(c) => Ok(c / smoothness),
        AlphaPolicy::Tuned => Err(Error::InvalidConfiguration(
            "alpha: 'tuned' is only available in compare campaigns".into(),
        )),
    }
}
