use crate::digraph::MixingWeights;
use crate::error::{Error, Result};
use crate::objective::FiniteSumProblem;
use crate::scalar::{count, Real};

use super::state::NetworkState;
use super::step::step;
use super::{Algorithm, Parallelism};

/// A distributed problem seen as one machine holding all `N` components.
///
/// Component `(i, j)` is scaled by `N / (n m_i)` so the pooled average is
/// still `F`. With equal splits every scale is one.
pub struct PooledProblem<'a, T, P: ?Sized> {
    inner: &'a P,
    offsets: Vec<usize>,
    scales: Vec<T>,
    smoothness: T,
}

impl<'a, T: Real, P: FiniteSumProblem<T> + ?Sized> PooledProblem<'a, T, P> {
    pub fn new(inner: &'a P) -> Self {
        let counts = inner.counts();
        let total = inner.total_count();
        let n = inner.nodes();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for &c in &counts {
            offsets.push(offsets.last().copied().unwrap_or(0) + c);
        }
        let scales: Vec<T> = counts
            .iter()
            .map(|&m| if m * n == total { T::one() } else { count::<T>(total) / count::<T>(n * m) })
            .collect();
        let max_scale = scales.iter().copied().fold(T::one(), T::max);
        Self {
            smoothness: inner.smoothness() * max_scale,
            inner,
            offsets,
            scales,
        }
    }

    pub fn inner(&self) -> &P {
        self.inner
    }

    fn locate(&self, global: usize) -> (usize, usize) {
        let node = self.offsets.partition_point(|&o| o <= global) - 1;
        (node, global - self.offsets[node])
    }
}

impl<T: Real, P: FiniteSumProblem<T> + ?Sized> FiniteSumProblem<T> for PooledProblem<'_, T, P> {
    fn nodes(&self) -> usize {
        1
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn local_count(&self, _node: usize) -> usize {
        self.offsets[self.offsets.len() - 1]
    }

    fn component_grad(&self, _node: usize, j: usize, z: &[T], out: &mut [T]) {
        let (i, jj) = self.locate(j);
        self.inner.component_grad(i, jj, z, out);
        let s = self.scales[i];
        if s != T::one() {
            out.iter_mut().for_each(|o| *o = *o * s);
        }
    }

    fn component_value(&self, _node: usize, j: usize, z: &[T]) -> T {
        let (i, jj) = self.locate(j);
        self.inner.component_value(i, jj, z) * self.scales[i]
    }

    fn smoothness(&self) -> T {
        self.smoothness
    }

    fn strong_convexity(&self) -> T {
        self.inner.strong_convexity()
    }

    fn known_minimizer(&self) -> Option<&[T]> {
        self.inner.known_minimizer()
    }

    fn local_grad(&self, _node: usize, z: &[T], out: &mut [T]) {
        self.inner.full_grad(z, out);
    }

    fn local_value(&self, _node: usize, z: &[T]) -> T {
        self.inner.value(z)
    }

    fn value(&self, z: &[T]) -> T {
        self.inner.value(z)
    }

    fn full_grad(&self, z: &[T], out: &mut [T]) {
        self.inner.full_grad(z, out);
    }

    fn optimality_gap(&self, z: &[T], z_star: &[T], f_star: T) -> T {
        self.inner.optimality_gap(z, z_star, f_star)
    }
}

fn single_node<T: Real, P: FiniteSumProblem<T> + ?Sized>(state: &NetworkState<T>, problem: &P) -> Result<()> {
    if problem.nodes() != 1 || state.n() != 1 {
        return Err(Error::InvalidInput(
            "centralized steps take a single-node (pooled) problem and state".into(),
        ));
    }
    Ok(())
}

/// Centralized SAGA: one global table, one component gradient per iteration.
pub fn step_saga_central<T: Real, P: FiniteSumProblem<T> + ?Sized>(
    state: &mut NetworkState<T>,
    problem: &P,
    alpha: T,
) -> Result<()> {
    single_node(state, problem)?;
    step(
        Algorithm::SagaCentral,
        state,
        &MixingWeights::identity(1),
        problem,
        alpha,
        Parallelism::Sequential,
    )
}

/// Centralized SGD with a constant stepsize.
pub fn step_sgd_central<T: Real, P: FiniteSumProblem<T> + ?Sized>(
    state: &mut NetworkState<T>,
    problem: &P,
    alpha: T,
) -> Result<()> {
    single_node(state, problem)?;
    step(
        Algorithm::SgdCentral,
        state,
        &MixingWeights::identity(1),
        problem,
        alpha,
        Parallelism::Sequential,
    )
}
