//! Directed communication graphs, their column-stochastic weights and the
//! spectral and push-sum constants derived from them.

mod graph;
mod profile;
mod weights;

pub use graph::{
    build_cycle_plus_edges, build_exponential_graph, build_geometric_digraph, build_geometric_digraph_with,
    DirectedGraph, DEFAULT_ONE_WAY_PROBABILITY, GEOMETRIC_MAX_ATTEMPTS,
};
pub use profile::{pushsum_profile, spectral_profile, ProfileJson, PushSumStep, SpectralProfile, MAX_POWER_STEPS};
pub use weights::{make_column_stochastic, Matrix, MixingWeights};
