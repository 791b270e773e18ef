use rand::Rng;
use rayon::prelude::*;

use crate::digraph::MixingWeights;
use crate::error::{Error, Result};
use crate::objective::FiniteSumProblem;
use crate::scalar::{count, lit, Real};

use super::state::{NetworkState, NodeState};
use super::{Algorithm, Estimator, Parallelism};

/// Frozen copy of the mixed quantities from the previous round.
struct Snapshot<T> {
    x: Vec<T>,
    y: Vec<T>,
    w: Vec<T>,
}

impl<T: Real> Snapshot<T> {
    fn take(state: &NetworkState<T>) -> Self {
        let p = state.dim();
        let n = state.n();
        let mut x = Vec::with_capacity(n * p);
        let mut w = Vec::with_capacity(n * p);
        let mut y = Vec::with_capacity(n);
        for s in &state.nodes {
            x.extend_from_slice(&s.x);
            w.extend_from_slice(&s.w);
            y.push(s.y);
        }
        Self { x, y, w }
    }
}

/// One synchronous round of `algorithm`. Every node reads only the previous
/// round's `x`, `y`, `w`; node updates are independent and run in parallel
/// when `parallelism` allows.
pub fn step<T: Real, P: FiniteSumProblem<T> + ?Sized>(
    algorithm: Algorithm,
    state: &mut NetworkState<T>,
    weights: &MixingWeights<T>,
    problem: &P,
    alpha: T,
    parallelism: Parallelism,
) -> Result<()> {
    if weights.n() != state.n() || problem.nodes() != state.n() {
        return Err(Error::InvalidInput(format!(
            "state has {} nodes, weights {}, problem {}",
            state.n(),
            weights.n(),
            problem.nodes()
        )));
    }
    check_weights(algorithm, weights)?;
    if algorithm.estimator() == Estimator::Saga && state.nodes.iter().any(|s| !s.has_table()) {
        return Err(Error::InvalidInput("SAGA step needs initialized gradient tables".into()));
    }
    let snap = Snapshot::take(state);
    let iteration = state.k + 1;
    let update = |(i, node): (usize, &mut NodeState<T>)| -> Result<()> {
        update_node(algorithm, i, node, &snap, weights, problem, alpha);
        if node.x.iter().chain(&node.w).chain(&node.g).any(|v| !v.is_finite()) || !node.y.is_finite() {
            return Err(Error::Diverged {
                iteration,
                node: Some(i),
                reason: "non-finite iterate".into(),
                partial_trace: Vec::new(),
            });
        }
        Ok(())
    };
    let evals = match algorithm.estimator() {
        Estimator::Full => problem.total_count(),
        _ => state.n(),
    };
    let links: usize = (0..weights.n()).map(|i| weights.row(i).len()).sum();
    if parallelism.enabled((links + evals) * state.dim()) {
        state.nodes.par_iter_mut().enumerate().try_for_each(update)?;
    } else {
        state.nodes.iter_mut().enumerate().try_for_each(update)?;
    }
    state.k = iteration;
    Ok(())
}

fn update_node<T: Real, P: FiniteSumProblem<T> + ?Sized>(
    algorithm: Algorithm,
    i: usize,
    node: &mut NodeState<T>,
    snap: &Snapshot<T>,
    weights: &MixingWeights<T>,
    problem: &P,
    alpha: T,
) {
    let p = node.dim();
    let tracks = algorithm.tracks();

    // x_i <- sum_r b_ir x_r - alpha * (w_i or g_i)
    weights.mix_into(i, &snap.x, p, &mut node.x);
    let direction = if tracks { &node.w } else { &node.g };
    for (x, &d) in node.x.iter_mut().zip(direction) {
        *x = *x - alpha * d;
    }

    if algorithm.uses_push_sum() {
        node.y = weights.mix_scalar(i, &snap.y);
        for (z, &x) in node.z.iter_mut().zip(&node.x) {
            *z = x / node.y;
        }
    } else {
        node.z.copy_from_slice(&node.x);
    }

    let m = problem.local_count(i);
    let mut g_new = std::mem::take(&mut node.scratch);
    match algorithm.estimator() {
        Estimator::Saga => {
            let s = node.rng.random_range(0..m);
            let mut fresh = vec![T::zero(); p];
            problem.component_grad(i, s, &node.z, &mut fresh);
            for k in 0..p {
                g_new[k] = fresh[k] - (node.table[s * p + k] - node.table_avg[k]);
            }
            node.set_table_row(s, &fresh);
            if let Some(v) = node.reference_points.as_mut() {
                v[s * p..(s + 1) * p].copy_from_slice(&node.z);
            }
            node.updates_since_refresh += 1;
            if node.updates_since_refresh >= m {
                node.refresh_table_avg();
            }
        }
        Estimator::Sampled => {
            let s = node.rng.random_range(0..m);
            problem.component_grad(i, s, &node.z, &mut g_new);
        }
        Estimator::Full => problem.local_grad(i, &node.z, &mut g_new),
    }

    if tracks {
        // w_i <- sum_r b_ir w_r + g_new - g_old
        let mut w = vec![T::zero(); p];
        weights.mix_into(i, &snap.w, p, &mut w);
        for k in 0..p {
            w[k] = w[k] + g_new[k] - node.g[k];
        }
        node.w = w;
    } else {
        node.w.copy_from_slice(&g_new);
    }
    node.scratch = std::mem::replace(&mut node.g, g_new);
}

/// `E_s[g_i^new]` for a SAGA draw at `z`, by enumerating every index.
pub fn saga_estimator_expectation<T: Real, P: FiniteSumProblem<T> + ?Sized>(
    state: &NodeState<T>,
    problem: &P,
    node: usize,
    z: &[T],
) -> Vec<T> {
    let p = z.len();
    let m = problem.local_count(node);
    let mut acc = vec![T::zero(); p];
    let mut fresh = vec![T::zero(); p];
    for s in 0..m {
        problem.component_grad(node, s, z, &mut fresh);
        let row = state.table_row(s);
        for k in 0..p {
            acc[k] = acc[k] + (fresh[k] - (row[k] - state.table_avg[k]));
        }
    }
    let inv = T::one() / count::<T>(m);
    acc.iter_mut().for_each(|a| *a = *a * inv);
    acc
}

/// Row-sum tolerance for accepting weights as doubly stochastic.
pub const DOUBLY_STOCHASTIC_TOL: f64 = 1e-12;

pub(crate) fn check_weights<T: Real>(algorithm: Algorithm, weights: &MixingWeights<T>) -> Result<()> {
    if algorithm == Algorithm::Dsgd && !weights.is_doubly_stochastic(lit(DOUBLY_STOCHASTIC_TOL)) {
        return Err(Error::Incompatible(
            "dsgd requires doubly stochastic weights; use sgp on directed graphs".into(),
        ));
    }
    Ok(())
}

macro_rules! named_step {
    ($(#[$doc:meta])* $name:ident, $alg:expr) => {
        $(#[$doc])*
        pub fn $name<T: Real, P: FiniteSumProblem<T> + ?Sized>(
            state: &mut NetworkState<T>,
            weights: &MixingWeights<T>,
            problem: &P,
            alpha: T,
        ) -> Result<()> {
            check_weights($alg, weights)?;
            step($alg, state, weights, problem, alpha, Parallelism::Auto)
        }
    };
}

named_step!(
    /// Push-SAGA: push-sum mixing, gradient tracking, SAGA estimator.
    step_push_saga,
    Algorithm::PushSaga
);
named_step!(
    /// SGP: push-sum mixing, sampled gradient as the descent direction.
    step_sgp,
    Algorithm::Sgp
);
named_step!(
    /// SADDOPT: push-sum mixing, gradient tracking of sampled gradients.
    step_saddopt,
    Algorithm::Saddopt
);
named_step!(
    /// GP: push-sum mixing, local batch gradient as the descent direction.
    step_gp,
    Algorithm::Gp
);
named_step!(
    /// ADDOPT: push-sum mixing, gradient tracking of local batch gradients.
    step_addopt,
    Algorithm::Addopt
);
named_step!(
    /// DSGD: doubly stochastic mixing of `x` and a sampled local gradient.
    step_dsgd,
    Algorithm::Dsgd
);
