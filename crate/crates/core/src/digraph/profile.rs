use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{count, lit, to_f64, Real};

use super::Matrix;

/// Iteration cap for the push-sum / power iteration.
pub const MAX_POWER_STEPS: usize = 1_000_000;

/// Spectral and push-sum constants of a primitive column-stochastic matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProfile<T> {
    pub weights: Matrix<T>,
    /// Perron vector, positive, summing to one.
    pub pi: Vec<T>,
    /// `|||B - pi 1^T|||_pi`.
    pub lambda: T,
    /// `max(pi) / min(pi)`.
    pub h: T,
    /// `sqrt(h) * ||1 - n pi||_2`.
    pub t: T,
    /// Running supremum of `max_i y_i^k`.
    pub y_sup: T,
    /// Running supremum of `max_i 1 / y_i^k`.
    pub y_inv_sup: T,
    /// Directivity constant `y * y_inv^2 * (1 + T) * h`.
    pub psi: T,
    /// Tolerance the push-sum recursion was run to.
    pub tol: T,
    /// Push-sum steps taken before the tolerance was met.
    pub iterations: usize,
}

impl<T: Real> SpectralProfile<T> {
    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn pi_max(&self) -> T {
        self.pi.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn pi_min(&self) -> T {
        self.pi.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn to_json(&self) -> ProfileJson {
        ProfileJson {
            n: self.n(),
            lambda: to_f64(self.lambda),
            h: to_f64(self.h),
            t: to_f64(self.t),
            y: to_f64(self.y_sup),
            y_inv: to_f64(self.y_inv_sup),
            psi: to_f64(self.psi),
            pi: self.pi.iter().map(|&p| to_f64(p)).collect(),
            tol: to_f64(self.tol),
            iterations: self.iterations,
        }
    }
}

/// JSON form of a [`SpectralProfile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileJson {
    pub n: usize,
    pub lambda: f64,
    pub h: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub y: f64,
    pub y_inv: f64,
    pub psi: f64,
    pub pi: Vec<f64>,
    pub tol: f64,
    pub iterations: usize,
}

/// Computes the Perron vector, the pi-weighted contraction factor and the
/// push-sum constants of `b`.
///
/// The Perron vector comes from the push-sum recursion `y <- B y`, `y^0 = 1`,
/// run until successive iterates differ by less than `tol` in max-norm. The
/// suprema of `||Y_k||` and `||Y_k^-1||` are tracked along the same run.
pub fn spectral_profile<T: Real>(b: &Matrix<T>, tol: T) -> Result<SpectralProfile<T>> {
    let n = b.n();
    if n == 0 {
        return Err(Error::invalid_param("empty weight matrix"));
    }
    if !(tol > T::zero()) {
        return Err(Error::invalid_param("tolerance must be positive"));
    }
    if !b.is_column_stochastic(lit(1e-10)) {
        return Err(Error::InvalidInput("weight matrix is not column stochastic".into()));
    }

    let nt = count::<T>(n);
    let mut y = vec![T::one(); n];
    let mut y_sup = T::one();
    let mut y_inv_sup = T::one();
    let mut iterations = 0;
    loop {
        if iterations >= MAX_POWER_STEPS {
            return Err(Error::NumericalFailure(format!(
                "push-sum did not reach tolerance {tol:e} within {MAX_POWER_STEPS} steps"
            )));
        }
        let next = b.mul_vec(&y);
        iterations += 1;
        let mut diff = T::zero();
        for (a, c) in next.iter().zip(&y) {
            diff = diff.max((*a - *c).abs());
        }
        for &v in &next {
            if !(v > T::zero()) {
                return Err(Error::NumericalFailure("push-sum weight became non-positive; B is not primitive".into()));
            }
            y_sup = y_sup.max(v);
            y_inv_sup = y_inv_sup.max(T::one() / v);
        }
        y = next;
        if diff < tol {
            break;
        }
    }

    let total: T = y.iter().copied().sum();
    let pi: Vec<T> = y.iter().map(|&v| v / total).collect();
    let pi_max = pi.iter().copied().fold(T::neg_infinity(), T::max);
    let pi_min = pi.iter().copied().fold(T::infinity(), T::min);
    let h = pi_max / pi_min;
    let dev: T = pi.iter().map(|&p| (T::one() - nt * p).powi(2)).sum::<T>().sqrt();
    let t = h.sqrt() * dev;
    let lambda = from_f64(pi_weighted_contraction(b, &pi));
    let psi = y_sup * y_inv_sup * y_inv_sup * (T::one() + t) * h;

    Ok(SpectralProfile {
        weights: b.clone(),
        pi,
        lambda,
        h,
        t,
        y_sup,
        y_inv_sup,
        psi,
        tol,
        iterations,
    })
}

fn from_f64<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap_or_else(T::nan)
}

/// Largest singular value of `diag(sqrt pi)^-1 (B - pi 1^T) diag(sqrt pi)`.
fn pi_weighted_contraction<T: Real>(b: &Matrix<T>, pi: &[T]) -> f64 {
    let n = b.n();
    let pi: Vec<f64> = pi.iter().map(|&p| to_f64(p)).collect();
    let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| (to_f64(b.get(i, j)) - pi[i]) * sqrt_pi[j] / sqrt_pi[i]);
    s.singular_values().max()
}

/// One step of the push-sum recursion next to its geometric deviation bound.
#[derive(Clone, Copy, Debug)]
pub struct PushSumStep<T> {
    pub k: usize,
    /// `||Y_k - Y^inf||_2 = max_i |y_i^k - n pi_i|`.
    pub deviation: T,
    /// `sum_i y_i^k`.
    pub mass: T,
    /// `T * lambda^k`.
    pub bound: T,
}

/// Runs `y^{k+1} = B y^k` from `y^0 = 1` for `steps` steps and reports the
/// deviation from the limit `n pi` next to the geometric bound `T lambda^k`.
pub fn pushsum_profile<T: Real>(profile: &SpectralProfile<T>, steps: usize) -> Vec<PushSumStep<T>> {
    let n = profile.n();
    let nt = count::<T>(n);
    let limit: Vec<T> = profile.pi.iter().map(|&p| nt * p).collect();
    let mut y = vec![T::one(); n];
    let mut out = Vec::with_capacity(steps + 1);
    let mut lambda_k = T::one();
    for k in 0..=steps {
        let deviation = y.iter().zip(&limit).map(|(&a, &b)| (a - b).abs()).fold(T::zero(), T::max);
        out.push(PushSumStep { k, deviation, mass: y.iter().copied().sum(), bound: profile.t * lambda_k });
        y = profile.weights.mul_vec(&y);
        lambda_k = lambda_k * profile.lambda;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{build_cycle_plus_edges, build_exponential_graph, make_column_stochastic};

    #[test]
    fn doubly_stochastic_profile() {
        let g = build_exponential_graph(8).unwrap();
        let b: Matrix<f64> = make_column_stochastic(&g);
        let p = spectral_profile(&b, 1e-13).unwrap();
        for &x in &p.pi {
            assert!((x - 1.0 / 8.0).abs() < 1e-12);
        }
        assert!(p.t < 1e-10);
        assert!((p.h - 1.0).abs() < 1e-10);
        assert!((p.psi - 1.0).abs() < 1e-10);
        assert!((p.y_sup - 1.0).abs() < 1e-12 && (p.y_inv_sup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_has_zero_lambda() {
        let g = build_cycle_plus_edges(5, 15, 0).unwrap();
        let p = spectral_profile(&make_column_stochastic::<f64>(&g), 1e-13).unwrap();
        assert!(p.lambda.abs() < 1e-12, "lambda = {}", p.lambda);
    }

    #[test]
    fn five_cycle_matches_circulant_eigenvalue() {
        // Circulant with symbol (1 + w)/2: the subdominant modulus is
        // |1 + e^{2 pi i / 5}| / 2 = cos(pi / 5). B is normal so the
        // pi-weighted norm equals this spectral radius.
        let g = build_cycle_plus_edges(5, 0, 0).unwrap();
        let p = spectral_profile(&make_column_stochastic::<f64>(&g), 1e-14).unwrap();
        let expected = (std::f64::consts::PI / 5.0).cos();
        assert!((p.lambda - expected).abs() < 1e-12, "{} vs {}", p.lambda, expected);
    }

    #[test]
    fn directed_profile_constants() {
        let g = build_cycle_plus_edges(9, 11, 3).unwrap();
        let p = spectral_profile(&make_column_stochastic::<f64>(&g), 1e-13).unwrap();
        let bpi = p.weights.mul_vec(&p.pi);
        for (a, b) in bpi.iter().zip(&p.pi) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(p.pi.iter().all(|&x| x > 0.0));
        assert!((p.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.lambda >= 0.0 && p.lambda < 1.0);
        assert!(p.psi >= 1.0 && p.h >= 1.0 && p.t > 0.0);
        let again = spectral_profile(&make_column_stochastic::<f64>(&g), 1e-13).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn push_sum_deviation_bound_and_mass() {
        let g = build_cycle_plus_edges(12, 7, 21).unwrap();
        let p = spectral_profile(&make_column_stochastic::<f64>(&g), 1e-13).unwrap();
        for step in pushsum_profile(&p, 300) {
            assert!(step.deviation <= step.bound + 1e-9, "k = {}", step.k);
            assert!((step.mass - 12.0).abs() <= 1e-10 * 12.0);
        }
    }

    #[test]
    fn rejects_non_stochastic() {
        let b = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.6, 0.5]]).unwrap();
        assert!(spectral_profile(&b, 1e-12).is_err());
    }

    #[test]
    fn single_precision_profile() {
        let g = build_exponential_graph(6).unwrap();
        let p = spectral_profile(&make_column_stochastic::<f32>(&g), 1e-6).unwrap();
        assert!((p.psi - 1.0).abs() < 1e-4);
    }
}
