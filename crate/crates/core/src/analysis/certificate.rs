use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

use super::lti::{
    certificate_delta, stepsize_inequalities, build_g, build_h_scale, g_delta_rows, gamma_working, Mat4,
    NetworkParams,
};

/// Relative slack allowed in the floating-point certificate checks.
pub const CERTIFICATE_SLACK: f64 = 1e-9;

/// Residual target of the spectral-radius power iteration.
pub const RHO_RESIDUAL: f64 = 1e-12;

/// Machine-checkable linear-rate certificate for one stepsize.
#[derive(Clone, Debug)]
pub struct RateCertificate<T> {
    pub alpha: T,
    pub alpha_bar: T,
    /// Closed-form contraction factor at `alpha_bar`.
    pub gamma_closed_form: T,
    /// `1 - alpha mu / 4` at the certified `alpha`.
    pub gamma_working: T,
    pub g: Mat4<T>,
    pub rho: T,
    pub delta: [T; 4],
    /// Multiply by `lambda^k` to get the first column of `H_k`.
    pub h_scale: [T; 4],
    pub params: NetworkParams<T>,
    /// Scalar inequalities e1..e4.
    pub inequalities: [bool; 4],
    /// Row-wise `G delta <= gamma_working delta`.
    pub g_delta_rows: [bool; 4],
    /// `0 < alpha < alpha_bar`: inside the stepsize range the rate is proven for.
    pub guaranteed: bool,
}

impl<T: Real> RateCertificate<T> {
    /// All inequalities hold and `rho <= gamma_working` up to the slack.
    pub fn passes(&self) -> bool {
        self.inequalities.iter().all(|&b| b)
            && self.g_delta_rows.iter().all(|&b| b)
            && self.rho <= self.gamma_working + lit(CERTIFICATE_SLACK)
    }

    pub fn to_json(&self) -> CertificateJson {
        let [e1, e2, e3, e4] = self.inequalities;
        CertificateJson {
            alpha: to_f64(self.alpha),
            alpha_bar: to_f64(self.alpha_bar),
            gamma_closed_form: to_f64(self.gamma_closed_form),
            gamma_working: to_f64(self.gamma_working),
            rho: to_f64(self.rho),
            delta: self.delta.map(to_f64),
            inequalities: Inequalities { e1, e2, e3, e4 },
            guaranteed: self.guaranteed,
            pass: self.passes(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequalities {
    pub e1: bool,
    pub e2: bool,
    pub e3: bool,
    pub e4: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub alpha: f64,
    pub alpha_bar: f64,
    pub gamma_closed_form: f64,
    pub gamma_working: f64,
    pub rho: f64,
    pub delta: [f64; 4],
    pub inequalities: Inequalities,
    pub guaranteed: bool,
    pub pass: bool,
}

/// Builds `G_alpha`, the fixed `delta`, checks the weighted max-norm
/// inequalities and computes `rho(G_alpha)` numerically.
pub fn certify<T: Real>(alpha: T, params: &NetworkParams<T>) -> Result<RateCertificate<T>> {
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(Error::invalid_param(format!("stepsize must be a nonnegative number, got {alpha}")));
    }
    let g = build_g(&alpha, params)?;
    let h_scale = build_h_scale(&alpha, params)?;
    let delta = certificate_delta(params);
    let alpha_bar = params.alpha_bar();
    let gw = gamma_working(&alpha, params);
    let slack: T = lit(CERTIFICATE_SLACK);
    let report = stepsize_inequalities(&alpha, params, &slack)?;
    let rows = g_delta_rows(&g, &delta, &gw, &slack);
    let rho = spectral_radius(&g)?;
    Ok(RateCertificate {
        alpha,
        alpha_bar,
        gamma_closed_form: params.gamma(),
        gamma_working: gw,
        g,
        rho,
        delta,
        h_scale,
        params: params.clone(),
        inequalities: report.holds,
        g_delta_rows: rows,
        guaranteed: alpha > T::zero() && alpha < alpha_bar,
    })
}

fn matmul<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

fn matvec<T: Real>(a: &Mat4<T>, v: &[T; 4]) -> [T; 4] {
    std::array::from_fn(|i| (0..4).map(|k| a[i][k] * v[k]).sum())
}

fn max_abs<T: Real>(v: impl IntoIterator<Item = T>) -> T {
    v.into_iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Spectral radius of a nonnegative 4x4 matrix by power iteration.
///
/// The iteration is started from the columns of `G^(2^40)` (computed by
/// repeated normalized squaring) so clustered eigenvalues near one do not
/// stall it, then refined with plain power steps until
/// `||G v - rho v||_inf <= 1e-12 max(rho, 1)` for `||v||_inf = 1`.
pub fn spectral_radius<T: Real>(g: &Mat4<T>) -> Result<T> {
    if g.iter().flatten().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
        return Err(Error::InvalidInput("spectral_radius expects a finite nonnegative matrix".into()));
    }
    let mut p = *g;
    for _ in 0..40 {
        p = matmul(&p, &p);
        let s = max_abs(p.iter().flatten().copied());
        if s == T::zero() {
            return Ok(T::zero());
        }
        p.iter_mut().flatten().for_each(|x| *x = *x / s);
    }
    let mut v: [T; 4] = std::array::from_fn(|i| p[i].iter().copied().sum());
    let s = max_abs(v);
    if s == T::zero() {
        v = [T::one(); 4];
    } else {
        v.iter_mut().for_each(|x| *x = *x / s);
    }
    let tol: T = lit(RHO_RESIDUAL);
    let mut rho = T::zero();
    for _ in 0..100_000 {
        let w = matvec(g, &v);
        rho = max_abs(w);
        if rho == T::zero() {
            return Ok(T::zero());
        }
        let residual = max_abs((0..4).map(|i| w[i] - rho * v[i]));
        v = w.map(|x| x / rho);
        if residual <= tol * rho.max(T::one()) {
            return Ok(rho);
        }
    }
    Err(Error::NumericalFailure(format!("power iteration for rho(G) stalled near {rho}")))
}

/// Iterations per node to reach accuracy `epsilon`:
/// `ceil(max{20 M, 1600 (M/m) kappa^2 psi / (1 - lambda)^2} ln(1/epsilon))`.
///
/// The proof constant in front of `epsilon` is absorbed into `epsilon`.
pub fn iteration_complexity(epsilon: f64, big_m: usize, m: usize, kappa: f64, lambda: f64, psi: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid_param(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if m == 0 || big_m < m || !(0.0..1.0).contains(&lambda) || kappa < 1.0 || psi <= 0.0 {
        return Err(Error::invalid_param("need M >= m >= 1, lambda in [0, 1), kappa >= 1, psi > 0"));
    }
    let first = 20.0 * big_m as f64;
    let second = 1600.0 * (big_m as f64 / m as f64) * kappa * kappa * psi / (1.0 - lambda).powi(2);
    Ok((first.max(second) * (1.0 / epsilon).ln()).ceil() as u64)
}
