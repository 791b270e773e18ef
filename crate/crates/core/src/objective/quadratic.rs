use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{count, lit, Real};

use super::FiniteSumProblem;

/// `f_ij(z) = 1/2 z^T diag(d_ij) z - b_ij^T z` with `mu <= d_ij <= L`.
#[derive(Clone, Debug)]
pub struct QuadraticProblem<T> {
    dim: usize,
    counts: Vec<usize>,
    offsets: Vec<usize>,
    /// Stacked diagonals, one `dim`-block per component.
    diag: Vec<T>,
    linear: Vec<T>,
    l: T,
    mu: T,
    /// Diagonal of the Hessian of `F`.
    mean_diag: Vec<T>,
    /// `grad F(0) = -mean_linear`.
    mean_linear: Vec<T>,
    z_star: Vec<T>,
}

/// `n` nodes with `m_each` components in dimension `p`, `mu = 1`,
/// `L = kappa`.
pub fn make_quadratic<T: Real>(n: usize, m_each: usize, p: usize, kappa: f64, seed: u64) -> Result<QuadraticProblem<T>> {
    QuadraticProblem::random(&vec![m_each; n], p, kappa, seed)
}

impl<T: Real> QuadraticProblem<T> {
    /// Random instance with the given per-node counts.
    ///
    /// Coordinate 0 has curvature `mu = 1` in every component and, for
    /// `p >= 2`, coordinate `p - 1` has curvature `L = kappa` in every
    /// component, so the Hessian of `F` has condition number exactly `kappa`.
    /// Remaining curvatures are uniform in `[1, kappa]`. Linear terms are a
    /// per-node shift plus standard normal noise.
    pub fn random(counts: &[usize], p: usize, kappa: f64, seed: u64) -> Result<Self> {
        if counts.is_empty() || counts.iter().any(|&m| m == 0) || p == 0 {
            return Err(Error::invalid_param("quadratic needs n, m, p >= 1"));
        }
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(Error::invalid_param(format!("kappa must be >= 1, got {kappa}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut diag = Vec::new();
        let mut linear = Vec::new();
        for &m in counts {
            let shift: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            for _ in 0..m {
                for k in 0..p {
                    let d = if k == 0 {
                        1.0
                    } else if k == p - 1 {
                        kappa
                    } else {
                        rng.random_range(1.0..=kappa)
                    };
                    diag.push(lit::<T>(d));
                    linear.push(lit::<T>(shift[k] + rng.sample::<f64, _>(StandardNormal)));
                }
            }
        }
        Ok(Self::from_parts(p, counts.to_vec(), diag, linear, lit(kappa), T::one()))
    }

    /// Builds a problem from explicit diagonals and linear terms.
    pub fn from_parts(dim: usize, counts: Vec<usize>, diag: Vec<T>, linear: Vec<T>, l: T, mu: T) -> Self {
        let offsets: Vec<usize> = counts
            .iter()
            .scan(0usize, |acc, &m| {
                let o = *acc;
                *acc += m;
                Some(o)
            })
            .collect();
        let n = counts.len();
        let mut mean_diag = vec![T::zero(); dim];
        let mut mean_linear = vec![T::zero(); dim];
        for (i, &m) in counts.iter().enumerate() {
            let w = T::one() / (count::<T>(n) * count::<T>(m));
            for j in 0..m {
                let base = (offsets[i] + j) * dim;
                for k in 0..dim {
                    mean_diag[k] = mean_diag[k] + w * diag[base + k];
                    mean_linear[k] = mean_linear[k] + w * linear[base + k];
                }
            }
        }
        let z_star = mean_linear.iter().zip(&mean_diag).map(|(&b, &d)| b / d).collect();
        Self { dim, counts, offsets, diag, linear, l, mu, mean_diag, mean_linear, z_star }
    }

    fn block(&self, node: usize, j: usize) -> usize {
        (self.offsets[node] + j) * self.dim
    }

    pub fn hessian_diagonal(&self) -> &[T] {
        &self.mean_diag
    }
}

impl<T: Real> FiniteSumProblem<T> for QuadraticProblem<T> {
    fn nodes(&self) -> usize {
        self.counts.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn local_count(&self, node: usize) -> usize {
        self.counts[node]
    }

    fn component_grad(&self, node: usize, j: usize, z: &[T], out: &mut [T]) {
        let b = self.block(node, j);
        for k in 0..self.dim {
            out[k] = self.diag[b + k] * z[k] - self.linear[b + k];
        }
    }

    fn component_value(&self, node: usize, j: usize, z: &[T]) -> T {
        let b = self.block(node, j);
        let half = lit::<T>(0.5);
        (0..self.dim).map(|k| half * self.diag[b + k] * z[k] * z[k] - self.linear[b + k] * z[k]).sum()
    }

    fn smoothness(&self) -> T {
        self.l
    }

    fn strong_convexity(&self) -> T {
        self.mu
    }

    fn known_minimizer(&self) -> Option<&[T]> {
        Some(&self.z_star)
    }

    fn value(&self, z: &[T]) -> T {
        let half = lit::<T>(0.5);
        (0..self.dim).map(|k| half * self.mean_diag[k] * z[k] * z[k] - self.mean_linear[k] * z[k]).sum()
    }

    fn full_grad(&self, z: &[T], out: &mut [T]) {
        for k in 0..self.dim {
            out[k] = self.mean_diag[k] * z[k] - self.mean_linear[k];
        }
    }

    /// Exact second-order expansion around `z_star`, free of cancellation.
    fn optimality_gap(&self, z: &[T], z_star: &[T], _f_star: T) -> T {
        let half = lit::<T>(0.5);
        (0..self.dim)
            .map(|k| {
                let d = z[k] - z_star[k];
                let g = self.mean_diag[k] * z_star[k] - self.mean_linear[k];
                g * d + half * self.mean_diag[k] * d * d
            })
            .sum()
    }
}
