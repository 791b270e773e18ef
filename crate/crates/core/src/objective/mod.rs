//! Finite-sum problems `F(z) = (1/n) sum_i f_i(z)`, `f_i = (1/m_i) sum_j f_ij`,
//! with per-component gradient oracles and the constants the certificate
//! needs: each `f_ij` is `L`-smooth and each `f_i` is `mu`-strongly convex.

mod data;
mod logistic;
mod partition;
mod quadratic;
mod reference;

pub use data::{load_csv_dataset, make_synthetic_classification, Dataset};
pub use logistic::{make_logistic, LogisticProblem};
pub use partition::{Partition, PartitionMode};
pub use quadratic::{make_quadratic, QuadraticProblem};
pub use reference::{solve_reference, solve_reference_default, ReferenceSolution, DEFAULT_REFERENCE_TOL, REFERENCE_MAX_ITERATIONS};

use crate::scalar::{count, Real};

/// Component-gradient oracle for a problem distributed over `nodes()` nodes.
///
/// Implementations must be pure: the same arguments always give the same
/// result, and concurrent calls from many workers are allowed.
pub trait FiniteSumProblem<T: Real>: Send + Sync {
    fn nodes(&self) -> usize;

    fn dim(&self) -> usize;

    /// `m_i`.
    fn local_count(&self, node: usize) -> usize;

    /// Writes `grad f_ij(z)` into `out`.
    fn component_grad(&self, node: usize, j: usize, z: &[T], out: &mut [T]);

    fn component_value(&self, node: usize, j: usize, z: &[T]) -> T;

    /// Smoothness constant `L` of every component.
    fn smoothness(&self) -> T;

    /// Strong-convexity constant `mu` of every local cost.
    fn strong_convexity(&self) -> T;

    fn known_minimizer(&self) -> Option<&[T]> {
        None
    }

    fn condition_number(&self) -> T {
        self.smoothness() / self.strong_convexity()
    }

    fn counts(&self) -> Vec<usize> {
        (0..self.nodes()).map(|i| self.local_count(i)).collect()
    }

    fn total_count(&self) -> usize {
        (0..self.nodes()).map(|i| self.local_count(i)).sum()
    }

    /// `m = min_i m_i`.
    fn min_count(&self) -> usize {
        (0..self.nodes()).map(|i| self.local_count(i)).min().unwrap_or(0)
    }

    /// `M = max_i m_i`.
    fn max_count(&self) -> usize {
        (0..self.nodes()).map(|i| self.local_count(i)).max().unwrap_or(0)
    }

    /// `grad f_i(z)`.
    fn local_grad(&self, node: usize, z: &[T], out: &mut [T]) {
        let m = self.local_count(node);
        let mut buf = vec![T::zero(); self.dim()];
        out.iter_mut().for_each(|o| *o = T::zero());
        for j in 0..m {
            self.component_grad(node, j, z, &mut buf);
            for (o, &g) in out.iter_mut().zip(&buf) {
                *o = *o + g;
            }
        }
        let inv = T::one() / count::<T>(m);
        out.iter_mut().for_each(|o| *o = *o * inv);
    }

    fn local_value(&self, node: usize, z: &[T]) -> T {
        let m = self.local_count(node);
        let s: T = (0..m).map(|j| self.component_value(node, j, z)).sum();
        s / count::<T>(m)
    }

    fn value(&self, z: &[T]) -> T {
        let n = self.nodes();
        let s: T = (0..n).map(|i| self.local_value(i, z)).sum();
        s / count::<T>(n)
    }

    /// `grad F(z)`.
    fn full_grad(&self, z: &[T], out: &mut [T]) {
        let n = self.nodes();
        let mut buf = vec![T::zero(); self.dim()];
        out.iter_mut().for_each(|o| *o = T::zero());
        for i in 0..n {
            self.local_grad(i, z, &mut buf);
            for (o, &g) in out.iter_mut().zip(&buf) {
                *o = *o + g;
            }
        }
        let inv = T::one() / count::<T>(n);
        out.iter_mut().for_each(|o| *o = *o * inv);
    }

    /// `F(z) - F(z_star)`. Implementations with closed forms override this to
    /// avoid cancellation.
    fn optimality_gap(&self, z: &[T], z_star: &[T], f_star: T) -> T {
        let _ = z_star;
        self.value(z) - f_star
    }
}

pub(crate) fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}
