use crate::scalar::{lit, Real};

use super::{norm2, FiniteSumProblem};

pub const DEFAULT_REFERENCE_TOL: f64 = 1e-13;
pub const REFERENCE_MAX_ITERATIONS: usize = 10_000_000;

/// High-accuracy minimizer estimate used as the optimality-gap baseline.
#[derive(Clone, Debug)]
pub struct ReferenceSolution<T> {
    pub z: Vec<T>,
    pub value: T,
    pub grad_norm: T,
    pub iterations: usize,
    /// False when the iteration cap was hit first; `z` is then the iterate
    /// with the smallest gradient norm seen.
    pub converged: bool,
}

/// Full-batch gradient descent with stepsize `1/L` from the origin until
/// `||grad F|| <= tol`.
pub fn solve_reference<T: Real, P: FiniteSumProblem<T> + ?Sized>(problem: &P, tol: T) -> ReferenceSolution<T> {
    let d = problem.dim();
    let step = T::one() / problem.smoothness();
    let mut z = vec![T::zero(); d];
    let mut g = vec![T::zero(); d];
    let mut best = (T::infinity(), z.clone());
    for it in 0..=REFERENCE_MAX_ITERATIONS {
        problem.full_grad(&z, &mut g);
        let gn = norm2(&g);
        if gn < best.0 {
            best = (gn, z.clone());
        }
        if gn <= tol {
            let value = problem.value(&z);
            return ReferenceSolution { z, value, grad_norm: gn, iterations: it, converged: true };
        }
        if !gn.is_finite() {
            break;
        }
        for (zk, &gk) in z.iter_mut().zip(&g) {
            *zk = *zk - step * gk;
        }
    }
    let (grad_norm, z) = best;
    let value = problem.value(&z);
    ReferenceSolution { z, value, grad_norm, iterations: REFERENCE_MAX_ITERATIONS, converged: false }
}

/// Reference solve at the default tolerance.
pub fn solve_reference_default<T: Real, P: FiniteSumProblem<T> + ?Sized>(problem: &P) -> ReferenceSolution<T> {
    solve_reference(problem, lit(DEFAULT_REFERENCE_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{make_logistic, make_quadratic, make_synthetic_classification, Partition};

    #[test]
    fn quadratic_matches_closed_form() {
        let q = make_quadratic::<f64>(3, 5, 4, 5.0, 2).unwrap();
        let sol = solve_reference(&q, 1e-13);
        assert!(sol.converged);
        for (a, b) in sol.z.iter().zip(q.known_minimizer().unwrap()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn logistic_reaches_tolerance_and_values_agree() {
        let data = make_synthetic_classification::<f64>(240, 4, 1.0, 1).unwrap();
        let p = make_logistic(data.clone(), Partition::equal(240, 4).unwrap(), 1e-2).unwrap();
        let fine = solve_reference_default(&p);
        assert!(fine.converged);
        assert!(fine.grad_norm <= 1e-13);
        // Strong convexity bounds the value error of an iterate with
        // gradient norm g by g^2 / (2 mu).
        let coarse = solve_reference(&p, 1e-3);
        let bound = coarse.grad_norm.powi(2) / (2.0 * p.strong_convexity());
        assert!(coarse.value - fine.value <= bound + 1e-15);
        assert!(coarse.value >= fine.value - 1e-15);

        // With mu = 1 the same tolerance already pins six significant digits.
        let p = make_logistic(data, Partition::equal(240, 4).unwrap(), 1.0).unwrap();
        let fine = solve_reference_default(&p);
        let coarse = solve_reference(&p, 1e-3);
        let rel = ((coarse.value - fine.value) / fine.value).abs();
        assert!(rel < 1e-6, "relative disagreement {rel}");
    }
}
