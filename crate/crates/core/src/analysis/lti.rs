//! Closed forms of the error system `u^{k+1} <= G_alpha u^k + H_k s^k`, the
//! stepsize bound and the contraction factor.
//!
//! Everything here only uses field operations, so it evaluates exactly over
//! rationals as well as in floating point.

use crate::error::{Error, Result};
use crate::scalar::{count, lit, max, min, Field};

pub type Mat4<T> = [[T; 4]; 4];

/// Constants of a network/problem pair that enter the certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams<T> {
    /// `lambda = |||B - B^inf|||_pi`, in `[0, 1)`.
    pub lambda: T,
    /// Component smoothness `L`.
    pub smoothness: T,
    /// Local strong convexity `mu`.
    pub strong_convexity: T,
    pub n: usize,
    /// `m = min_i m_i`.
    pub m_min: usize,
    /// `M = max_i m_i`.
    pub m_max: usize,
    /// Directivity constant.
    pub psi: T,
    pub pi_max: T,
    pub pi_min: T,
    /// Push-sum constant `T = sqrt(h) ||1 - n pi||`.
    pub t: T,
}

impl<T: Field> NetworkParams<T> {
    pub fn kappa(&self) -> T {
        self.smoothness.clone() / self.strong_convexity.clone()
    }

    /// `h = pi_max / pi_min`.
    pub fn h(&self) -> T {
        self.pi_max.clone() / self.pi_min.clone()
    }

    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        if !(self.lambda >= zero && self.lambda < T::one()) {
            return Err(Error::invalid_param(format!("lambda must lie in [0, 1), got {:?}", self.lambda)));
        }
        if !(self.strong_convexity > zero) || self.smoothness < self.strong_convexity {
            return Err(Error::invalid_param("need L >= mu > 0"));
        }
        if self.n == 0 || self.m_min == 0 || self.m_max < self.m_min {
            return Err(Error::invalid_param("need n >= 1 and M >= m >= 1"));
        }
        if !(self.psi > zero && self.pi_min > zero && self.pi_max >= self.pi_min) || self.t < zero {
            return Err(Error::invalid_param("need psi > 0, pi_max >= pi_min > 0, T >= 0"));
        }
        Ok(())
    }

    pub fn alpha_bar(&self) -> T {
        alpha_bar(
            self.smoothness.clone(),
            self.strong_convexity.clone(),
            self.lambda.clone(),
            self.m_min,
            self.m_max,
            self.psi.clone(),
        )
    }

    pub fn gamma(&self) -> T {
        gamma(self.m_max, self.m_min, self.kappa(), self.lambda.clone(), self.psi.clone())
    }

    /// Maps the parameters into another scalar type.
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> NetworkParams<U> {
        NetworkParams {
            lambda: f(&self.lambda),
            smoothness: f(&self.smoothness),
            strong_convexity: f(&self.strong_convexity),
            n: self.n,
            m_min: self.m_min,
            m_max: self.m_max,
            psi: f(&self.psi),
            pi_max: f(&self.pi_max),
            pi_min: f(&self.pi_min),
            t: f(&self.t),
        }
    }
}

fn sq<T: Field>(x: T) -> T {
    x.clone() * x
}

/// The 4x4 nonnegative system matrix `G_alpha`.
pub fn build_g<T: Field>(alpha: &T, p: &NetworkParams<T>) -> Result<Mat4<T>> {
    p.validate()?;
    let one = T::one();
    let two: T = lit(2.0);
    let a = alpha.clone();
    let l2 = sq(p.smoothness.clone());
    let mu = p.strong_convexity.clone();
    let lam2 = sq(p.lambda.clone());
    let gap2 = one.clone() - lam2.clone();
    let m: T = count(p.m_min);
    let big_m: T = count(p.m_max);
    let n: T = count(p.n);
    let psi = p.psi.clone();
    let pi_max = p.pi_max.clone();
    let inv_pi_min = one.clone() / p.pi_min.clone();
    let a2l2 = two.clone() * sq(a.clone()) * l2.clone();

    Ok([
        [
            (one.clone() + lam2.clone()) / two.clone(),
            T::zero(),
            T::zero(),
            a2l2.clone() / gap2.clone(),
        ],
        [
            two.clone() * a.clone() * l2 * psi.clone() * pi_max.clone() / mu.clone(),
            one.clone() - a * mu / two.clone(),
            a2l2 / n,
            T::zero(),
        ],
        [
            two.clone() * psi.clone() * pi_max / m.clone(),
            two / m,
            one.clone() - one / big_m,
            T::zero(),
        ],
        [
            lit::<T>(188.0) * psi / gap2.clone(),
            lit::<T>(169.0) * inv_pi_min.clone() / gap2.clone(),
            lit::<T>(38.0) * inv_pi_min / gap2,
            (lit::<T>(3.0) + lam2) / lit(4.0),
        ],
    ])
}

/// First column of `H_k / lambda^k`: `(0, 2 alpha L^2 psi / mu, 2 psi / m,
/// 188 psi^2 / (1 - lambda^2)) * T`. The caller multiplies by `lambda^k`.
pub fn build_h_scale<T: Field>(alpha: &T, p: &NetworkParams<T>) -> Result<[T; 4]> {
    p.validate()?;
    let two: T = lit(2.0);
    let t = p.t.clone();
    let psi = p.psi.clone();
    let gap2 = T::one() - sq(p.lambda.clone());
    Ok([
        T::zero(),
        two.clone() * alpha.clone() * sq(p.smoothness.clone()) * psi.clone() / p.strong_convexity.clone() * t.clone(),
        two * psi.clone() / count::<T>(p.m_min) * t.clone(),
        lit::<T>(188.0) * sq(psi) / gap2 * t,
    ])
}

/// `min{ 1/(5 M mu), (m/M) (1-lambda)^2 / (400 L kappa psi) }`.
pub fn alpha_bar<T: Field>(l: T, mu: T, lambda: T, m: usize, big_m: usize, psi: T) -> T {
    let m_t: T = count(m);
    let big_m_t: T = count(big_m);
    let kappa = l.clone() / mu.clone();
    let first = T::one() / (lit::<T>(5.0) * big_m_t.clone() * mu);
    let second = m_t / big_m_t * sq(T::one() - lambda) / (lit::<T>(400.0) * l * kappa * psi);
    min(first, second)
}

/// `1 - min{ 1/(20 M), (m / (1600 M)) (1-lambda)^2 / (kappa^2 psi) }`.
pub fn gamma<T: Field>(big_m: usize, m: usize, kappa: T, lambda: T, psi: T) -> T {
    let m_t: T = count(m);
    let big_m_t: T = count(big_m);
    let first = T::one() / (lit::<T>(20.0) * big_m_t.clone());
    let second = m_t / (lit::<T>(1600.0) * big_m_t) * sq(T::one() - lambda) / (sq(kappa) * psi);
    T::one() - min(first, second)
}

/// `1 - alpha mu / 4`, the contraction factor the weighted max-norm argument
/// certifies for a given stepsize.
pub fn gamma_working<T: Field>(alpha: &T, p: &NetworkParams<T>) -> T {
    T::one() - alpha.clone() * p.strong_convexity.clone() / lit(4.0)
}

/// The fixed positive weight vector of the weighted max-norm argument:
/// `delta = (1, 8.5 kappa^2 psi pi_max, 20 M kappa^2 psi pi_max / m,
/// 19076 M kappa^2 psi h / (m (1 - lambda^2)^2))`.
pub fn certificate_delta<T: Field>(p: &NetworkParams<T>) -> [T; 4] {
    let k2 = sq(p.kappa());
    let psi = p.psi.clone();
    let m: T = count(p.m_min);
    let big_m: T = count(p.m_max);
    let gap2 = T::one() - sq(p.lambda.clone());
    [
        T::one(),
        lit::<T>(8.5) * k2.clone() * psi.clone() * p.pi_max.clone(),
        lit::<T>(20.0) * big_m.clone() * k2.clone() * psi.clone() * p.pi_max.clone() / m.clone(),
        lit::<T>(19076.0) * big_m * k2 * psi * p.h() / (m * sq(gap2)),
    ]
}

/// The four scalar inequalities equivalent to `G_alpha delta <= (1 - alpha
/// mu / 4) delta`, each as `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport<T> {
    pub lhs: [T; 4],
    pub rhs: [T; 4],
    pub holds: [bool; 4],
}

impl<T> InequalityReport<T> {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&b| b)
    }
}

/// Evaluates the four inequalities at `alpha` with the fixed `delta`.
///
/// An inequality holds when `lhs <= rhs + rel_slack * max(|lhs|, |rhs|)`;
/// pass `rel_slack = 0` for exact arithmetic.
pub fn stepsize_inequalities<T: Field>(alpha: &T, p: &NetworkParams<T>, rel_slack: &T) -> Result<InequalityReport<T>> {
    p.validate()?;
    let d = certificate_delta(p);
    let one = T::one();
    let two: T = lit(2.0);
    let four: T = lit(4.0);
    let a = alpha.clone();
    let l2 = sq(p.smoothness.clone());
    let mu = p.strong_convexity.clone();
    let gap2 = one.clone() - sq(p.lambda.clone());
    let m: T = count(p.m_min);
    let big_m: T = count(p.m_max);
    let n: T = count(p.n);
    let psi = p.psi.clone();
    let inv_pi_min = one.clone() / p.pi_min.clone();
    let amu4 = a.clone() * mu.clone() / four.clone();

    let lhs = [
        amu4.clone() + two.clone() * sq(a.clone()) * l2.clone() / gap2.clone() * d[3].clone() / d[0].clone(),
        two.clone() * a * l2.clone() / n * d[2].clone(),
        amu4.clone(),
        amu4,
    ];
    let rhs = [
        gap2.clone() / two.clone(),
        mu.clone() / four.clone() * d[1].clone() - two.clone() * l2 * psi.clone() * p.pi_max.clone() / mu * d[0].clone(),
        one / big_m
            - two.clone() * psi.clone() * p.pi_max.clone() / m.clone() * d[0].clone() / d[2].clone()
            - two / m * d[1].clone() / d[2].clone(),
        gap2.clone() / four
            - lit::<T>(188.0) * psi / gap2.clone() * d[0].clone() / d[3].clone()
            - lit::<T>(169.0) * inv_pi_min.clone() / gap2.clone() * d[1].clone() / d[3].clone()
            - lit::<T>(38.0) * inv_pi_min / gap2 * d[2].clone() / d[3].clone(),
    ];
    let holds = std::array::from_fn(|i| {
        let scale = max(abs(lhs[i].clone()), abs(rhs[i].clone()));
        lhs[i] <= rhs[i].clone() + rel_slack.clone() * scale
    });
    Ok(InequalityReport { lhs, rhs, holds })
}

fn abs<T: Field>(x: T) -> T {
    if x < T::zero() {
        T::zero() - x
    } else {
        x
    }
}

/// Checks `(G delta)_i <= gamma delta_i (1 + rel_slack)` row by row.
pub fn g_delta_rows<T: Field>(g: &Mat4<T>, delta: &[T; 4], gamma: &T, rel_slack: &T) -> [bool; 4] {
    std::array::from_fn(|i| {
        let row: T = (0..4).fold(T::zero(), |acc, j| acc + g[i][j].clone() * delta[j].clone());
        let bound = gamma.clone() * delta[i].clone();
        row <= bound.clone() + rel_slack.clone() * abs(bound)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::{One, ToPrimitive};

    fn params(lambda: f64, l: f64, mu: f64, n: usize, m: usize, big_m: usize, psi: f64) -> NetworkParams<f64> {
        NetworkParams {
            lambda,
            smoothness: l,
            strong_convexity: mu,
            n,
            m_min: m,
            m_max: big_m,
            psi,
            pi_max: 1.0 / n as f64,
            pi_min: 1.0 / n as f64,
            t: 0.0,
        }
    }

    #[test]
    fn g_limits_at_zero_stepsize() {
        let p = params(0.0, 2.0, 1.0, 4, 3, 5, 1.0);
        let g = build_g(&0.0, &p).unwrap();
        assert_eq!([g[0][0], g[1][1], g[2][2], g[3][3]], [0.5, 1.0, 1.0 - 1.0 / 5.0, 0.75]);
        assert_eq!(g[0][3], 0.0);
        let p = params(0.7, 2.0, 1.0, 4, 3, 5, 1.0);
        let g = build_g(&0.01, &p).unwrap();
        assert_eq!(g[0][0], (1.0 + 0.49) / 2.0);
    }

    #[test]
    fn g_entries_against_hand_evaluation() {
        let p = NetworkParams {
            lambda: 0.5,
            smoothness: 3.0,
            strong_convexity: 0.5,
            n: 4,
            m_min: 2,
            m_max: 6,
            psi: 1.5,
            pi_max: 0.4,
            pi_min: 0.1,
            t: 0.25,
        };
        let a: f64 = 0.01;
        let g = build_g(&a, &p).unwrap();
        let expected: [[f64; 4]; 4] = [
            [0.625, 0.0, 0.0, 2.0 * 1e-4 * 9.0 / 0.75],
            [2.0 * 0.01 * 9.0 * 1.5 * 0.4 / 0.5, 1.0 - 0.0025, 2.0 * 1e-4 * 9.0 / 4.0, 0.0],
            [2.0 * 1.5 * 0.4 / 2.0, 1.0, 1.0 - 1.0 / 6.0, 0.0],
            [188.0 * 1.5 / 0.75, 169.0 * 10.0 / 0.75, 38.0 * 10.0 / 0.75, 3.25 / 4.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((g[i][j] - expected[i][j]).abs() <= 1e-12 * expected[i][j].abs().max(1.0), "({i},{j})");
            }
        }
        assert!(build_g(&a, &NetworkParams { lambda: 1.0, ..p.clone() }).is_err());
    }

    #[test]
    fn h_scale_cases() {
        let p = params(0.3, 1.0, 1.0, 4, 1, 1, 1.0);
        assert_eq!(build_h_scale(&0.1, &p).unwrap(), [0.0; 4]);
        let p = NetworkParams { lambda: 0.0, t: 1.0, ..params(0.0, 1.0, 1.0, 1, 1, 1, 1.0) };
        assert_eq!(build_h_scale(&1.0, &p).unwrap(), [0.0, 2.0, 2.0, 188.0]);
    }

    #[test]
    fn alpha_bar_and_gamma_by_substitution() {
        assert_eq!(alpha_bar(1.0, 1.0, 0.0, 1, 1, 1.0), 1.0 / 400.0);
        assert!((gamma(1, 1, 1.0, 0.0, 1.0) - 0.999375f64).abs() < 1e-15);
        // First branch active: doubling M halves the bound.
        let a = alpha_bar(1.0, 1.0, 0.0, 100, 100, 1.0);
        let b = alpha_bar(1.0, 1.0, 0.0, 200, 200, 1.0);
        assert_eq!(a, 1.0 / 500.0);
        assert_eq!(b, a / 2.0);
        assert!(alpha_bar(1.0, 1.0, 1.0 - 1e-9, 1, 1, 1.0) < 1e-19);
        let big = 100_000;
        assert_eq!(gamma(big, big, 1.0, 0.0, 1.0), 1.0 - 1.0 / (20.0 * big as f64));
    }

    #[test]
    fn gamma_equals_working_value_at_alpha_bar() {
        let p = params(0.4, 5.0, 0.5, 8, 10, 30, 2.0);
        let ab = p.alpha_bar();
        assert!((gamma_working(&ab, &p) - p.gamma()).abs() < 1e-15);
    }

    #[test]
    fn doubly_stochastic_delta() {
        let p = params(0.6, 4.0, 2.0, 5, 3, 9, 1.0);
        let d = certificate_delta(&p);
        let expected = 19076.0 * 9.0 * 4.0 / (3.0 * (1.0f64 - 0.36).powi(2));
        assert!((d[3] - expected).abs() < 1e-9 * expected);
    }

    fn exact(p: &NetworkParams<f64>) -> NetworkParams<Rational> {
        p.map(|&x| Rational::from_float(x).unwrap())
    }

    #[test]
    fn rational_and_float_evaluations_agree() {
        let p = NetworkParams {
            lambda: 0.83,
            smoothness: 7.0,
            strong_convexity: 0.3,
            n: 12,
            m_min: 5,
            m_max: 40,
            psi: 3.2,
            pi_max: 0.15,
            pi_min: 0.05,
            t: 1.7,
        };
        let q = exact(&p);
        let ab_f = p.alpha_bar();
        let ab_q = q.alpha_bar();
        assert!(((ab_q.to_f64().unwrap() - ab_f) / ab_f).abs() < 1e-10);
        let gf = build_g(&ab_f, &p).unwrap();
        let gq = build_g(&ab_q, &q).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e = gq[i][j].to_f64().unwrap();
                assert!((gf[i][j] - e).abs() <= 1e-10 * e.abs().max(1e-300), "({i},{j})");
            }
        }
        let rep = stepsize_inequalities(&ab_q, &q, &Rational::from_integer(0.into())).unwrap();
        assert!(rep.all_hold(), "{rep:?}");
    }

    #[test]
    fn exact_tie_in_third_inequality() {
        // kappa = 1 with the 1/(5 M mu) branch active makes the third
        // inequality an equality; it must still hold exactly.
        let p = exact(&params(0.0, 1.0, 1.0, 4, 100, 100, 1.0));
        let ab = p.alpha_bar();
        assert_eq!(ab, Rational::one() / Rational::from_integer(500.into()));
        let rep = stepsize_inequalities(&ab, &p, &Rational::from_integer(0.into())).unwrap();
        assert_eq!(rep.lhs[2], rep.rhs[2]);
        assert!(rep.all_hold());
    }
}
