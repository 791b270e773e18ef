use serde::Serialize;

use crate::digraph::SpectralProfile;
use crate::error::{Error, Result};
use crate::scalar::{count, Real};
use crate::solvers::NetworkState;

/// The four error quantities tracked by the linear error system, for one
/// realized network state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorVector<T> {
    /// `||x - B^inf x||_pi^2`.
    pub consensus: T,
    /// `n ||x_bar - z_star||^2`.
    pub optimality: T,
    /// Mean auxiliary gap `t`; `None` unless reference points were recorded.
    pub auxiliary: Option<T>,
    /// `L^-2 ||w - B^inf w||_pi^2`.
    pub tracking: T,
}

impl<T: Real> ErrorVector<T> {
    /// The vector `u`, when every entry is available.
    pub fn to_array(&self) -> Option<[T; 4]> {
        Some([self.consensus, self.optimality, self.auxiliary?, self.tracking])
    }
}

/// Evaluates the error quantities of `state` against `z_star`.
pub fn empirical_error_vector<T: Real>(
    state: &NetworkState<T>,
    z_star: &[T],
    profile: &SpectralProfile<T>,
    smoothness: T,
) -> Result<ErrorVector<T>> {
    if profile.n() != state.n() || z_star.len() != state.dim() {
        return Err(Error::InvalidInput(format!(
            "state is {} nodes x {} dims, profile has {} nodes, z_star has {} entries",
            state.n(),
            state.dim(),
            profile.n(),
            z_star.len()
        )));
    }
    let pi = &profile.pi;
    let x_bar = state.x_bar();
    let dist: T = x_bar.iter().zip(z_star).map(|(&a, &b)| (a - b).powi(2)).sum();
    Ok(ErrorVector {
        consensus: state.disagreement(pi, true, |s| &s.x),
        optimality: count::<T>(state.n()) * dist,
        auxiliary: state.auxiliary_gap(z_star),
        tracking: state.disagreement(pi, true, |s| &s.w) / (smoothness * smoothness),
    })
}

/// First entry of the forcing vector `s`: `||x||_2^2` over all nodes.
pub fn forcing_term<T: Real>(state: &NetworkState<T>) -> T {
    state.nodes.iter().flat_map(|s| s.x.iter()).map(|&v| v * v).sum()
}
