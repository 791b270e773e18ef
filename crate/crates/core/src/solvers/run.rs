use serde::{Deserialize, Serialize};

use crate::analysis::NetworkParams;
use crate::digraph::{MixingWeights, SpectralProfile};
use crate::error::{Error, Result};
use crate::objective::FiniteSumProblem;
use crate::scalar::{count, to_f64, Real};

use super::central::PooledProblem;
use super::state::NetworkState;
use super::step::{check_weights, step};
use super::trace::TraceRow;
use super::{Algorithm, Estimator, SolverConfig, Stepsize};

/// A run is declared divergent once its gap exceeds this multiple of
/// `max(initial gap, 1)`.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// Result of [`run`].
#[derive(Clone, Debug)]
pub struct RunOutput<T> {
    pub algorithm: Algorithm,
    pub trace: Vec<TraceRow>,
    /// Stepsize actually used.
    pub alpha: T,
    pub alpha_bar: T,
    /// Closed-form contraction factor for the run's network and problem.
    pub gamma: T,
    pub seed: u64,
    pub n: usize,
    /// Rounds executed.
    pub iterations: usize,
    pub epochs_run: f64,
    pub final_gap: f64,
    /// `max_k |w_bar - g_bar|_inf / max(1, max_k |g_bar|_inf)`.
    pub tracking_drift: f64,
    /// `max_k |sum_i y_i - n| / n`.
    pub mass_drift: f64,
    /// First iteration whose gap reached `stop_at_gap`.
    pub hit_target: Option<usize>,
    pub state: NetworkState<T>,
}

impl<T: Real> RunOutput<T> {
    pub fn hit_target_epoch(&self) -> Option<f64> {
        self.hit_target.and_then(|k| self.trace.iter().find(|r| r.k == k).map(|r| r.epoch))
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            algorithm: self.algorithm.name().to_string(),
            alpha: to_f64(self.alpha),
            alpha_bar: to_f64(self.alpha_bar),
            gamma: to_f64(self.gamma),
            seed: self.seed,
            n: self.n,
            epochs_run: self.epochs_run,
            final_gap: Some(self.final_gap),
            diverged: false,
        }
    }
}

/// JSON summary of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub alpha: f64,
    pub alpha_bar: f64,
    pub gamma: f64,
    pub seed: u64,
    pub n: usize,
    pub epochs_run: f64,
    /// `None` when the run diverged.
    pub final_gap: Option<f64>,
    pub diverged: bool,
}

/// Certificate constants of `problem` on the network described by `profile`.
pub fn network_params<T: Real, P: FiniteSumProblem<T> + ?Sized>(
    profile: &SpectralProfile<T>,
    problem: &P,
) -> NetworkParams<T> {
    NetworkParams {
        lambda: profile.lambda,
        smoothness: problem.smoothness(),
        strong_convexity: problem.strong_convexity(),
        n: problem.nodes(),
        m_min: problem.min_count(),
        m_max: problem.max_count(),
        psi: profile.psi,
        pi_max: profile.pi_max(),
        pi_min: profile.pi_min(),
        t: profile.t,
    }
}

/// Certificate constants that govern `algorithm`: the network's for
/// decentralized methods, a single machine over the pooled data otherwise.
pub fn algorithm_params<T: Real, P: FiniteSumProblem<T> + ?Sized>(
    algorithm: Algorithm,
    profile: &SpectralProfile<T>,
    problem: &P,
) -> NetworkParams<T> {
    if algorithm.is_central() {
        central_params(&PooledProblem::new(problem))
    } else {
        network_params(profile, problem)
    }
}

/// Constants of a single machine: no network error at all.
fn central_params<T: Real, P: FiniteSumProblem<T> + ?Sized>(problem: &P) -> NetworkParams<T> {
    NetworkParams {
        lambda: T::zero(),
        smoothness: problem.smoothness(),
        strong_convexity: problem.strong_convexity(),
        n: 1,
        m_min: problem.total_count(),
        m_max: problem.total_count(),
        psi: T::one(),
        pi_max: T::one(),
        pi_min: T::one(),
        t: T::zero(),
    }
}

/// Runs `config` on `problem` over the network of `profile`, measuring gaps
/// against `z_star`. Centralized algorithms ignore the network and run on
/// the pooled data.
pub fn run<T: Real, P: FiniteSumProblem<T> + ?Sized>(
    config: &SolverConfig<T>,
    problem: &P,
    profile: &SpectralProfile<T>,
    z_star: &[T],
) -> Result<RunOutput<T>> {
    if config.algorithm.is_central() {
        let pooled = PooledProblem::new(problem);
        let params = central_params(&pooled);
        let mut out = run_with_weights(config, &pooled, &MixingWeights::identity(1), &[T::one()], &params, z_star)?;
        out.n = problem.nodes();
        return Ok(out);
    }
    if profile.n() != problem.nodes() {
        return Err(Error::InvalidInput(format!(
            "network has {} nodes but the problem is split over {}",
            profile.n(),
            problem.nodes()
        )));
    }
    let weights = MixingWeights::from_matrix(&profile.weights);
    let params = network_params(profile, problem);
    run_with_weights(config, problem, &weights, &profile.pi, &params, z_star)
}

/// [`run`] with explicit mixing weights, Perron vector and certificate
/// constants.
pub fn run_with_weights<T: Real, P: FiniteSumProblem<T> + ?Sized>(
    config: &SolverConfig<T>,
    problem: &P,
    weights: &MixingWeights<T>,
    pi: &[T],
    params: &NetworkParams<T>,
    z_star: &[T],
) -> Result<RunOutput<T>> {
    config.validate()?;
    check_weights(config.algorithm, weights)?;
    if z_star.len() != problem.dim() || pi.len() != weights.n() {
        return Err(Error::InvalidInput("reference point or Perron vector has the wrong length".into()));
    }
    let alpha_bar = params.alpha_bar();
    let gamma = params.gamma();
    let alpha = match config.alpha {
        Stepsize::Theory => alpha_bar,
        Stepsize::Fixed(a) => a,
    };

    let algorithm = config.algorithm;
    let with_table = algorithm.estimator() == Estimator::Saga;
    let mut state = NetworkState::init(
        problem,
        config.initial.as_deref(),
        config.seed,
        with_table,
        with_table && config.track_reference_points,
    )?;

    let n = problem.nodes();
    let total = problem.total_count();
    let stochastic = algorithm.is_stochastic();
    let epoch_of = |k: usize| -> f64 {
        if stochastic {
            (k * n) as f64 / total as f64
        } else {
            k as f64
        }
    };
    let budget = if stochastic {
        (config.max_epochs * total as f64 / n as f64).ceil() as usize
    } else {
        config.max_epochs.ceil() as usize
    };

    let f_star = problem.value(z_star);
    let gap_at = |state: &NetworkState<T>| -> f64 { to_f64(problem.optimality_gap(&state.z_bar(), z_star, f_star)) };
    let row_at = |state: &NetworkState<T>, gap: f64| -> TraceRow {
        let z_bar = state.z_bar();
        let mut grad = vec![T::zero(); z_bar.len()];
        problem.full_grad(&z_bar, &mut grad);
        TraceRow {
            k: state.k,
            epoch: epoch_of(state.k),
            gap,
            consensus: to_f64(state.disagreement(pi, false, |s| &s.x)),
            tracking: to_f64(state.disagreement(pi, false, |s| &s.w)),
            t: state.auxiliary_gap(z_star).map(to_f64),
            grad_norm: to_f64(grad.iter().map(|&g| g * g).sum::<T>().sqrt()),
        }
    };

    let gap0 = gap_at(&state);
    let blowup = DIVERGENCE_FACTOR * gap0.max(1.0);
    let mut trace = vec![row_at(&state, gap0)];
    let n_t: T = count(n);
    let mut mass_drift = 0.0f64;
    let mut tracking_drift = 0.0f64;
    let mut g_scale = 1.0f64;
    let mut hit_target = config.stop_at_gap.filter(|&t| gap0 <= t).map(|_| 0);
    let mut last_gap = gap0;

    let diverged = |iteration: usize, reason: String, trace: Vec<TraceRow>| Error::Diverged {
        iteration,
        node: None,
        reason,
        partial_trace: trace,
    };

    while state.k < budget && hit_target.is_none() {
        if let Err(e) = step(algorithm, &mut state, weights, problem, alpha, config.parallelism) {
            return Err(match e {
                Error::Diverged { iteration, node, reason, .. } => Error::Diverged {
                    iteration,
                    node,
                    reason,
                    partial_trace: trace,
                },
                other => other,
            });
        }
        let k = state.k;

        let mass = to_f64(((state.y_sum() - n_t) / n_t).abs());
        mass_drift = mass_drift.max(mass);
        if algorithm.tracks() {
            let (w_bar, g_bar) = (state.w_bar(), state.g_bar());
            let g_inf = g_bar.iter().map(|&v| to_f64(v.abs())).fold(0.0, f64::max);
            g_scale = g_scale.max(g_inf);
            let diff = w_bar.iter().zip(&g_bar).map(|(&a, &b)| to_f64((a - b).abs())).fold(0.0, f64::max);
            tracking_drift = tracking_drift.max(diff / g_scale);
        }

        let record = k % config.record_every == 0 || k == budget;
        if record || config.stop_at_gap.is_some() {
            let gap = gap_at(&state);
            if !gap.is_finite() || gap > blowup {
                return Err(diverged(k, format!("optimality gap {gap:e} exceeds {blowup:e}"), trace));
            }
            last_gap = gap;
            let reached = config.stop_at_gap.is_some_and(|t| gap <= t);
            if reached {
                hit_target = Some(k);
            }
            if record || reached {
                trace.push(row_at(&state, gap));
            }
        }
    }
    if trace.last().map(|r| r.k) != Some(state.k) {
        let gap = gap_at(&state);
        last_gap = gap;
        trace.push(row_at(&state, gap));
    }

    Ok(RunOutput {
        algorithm,
        trace,
        alpha,
        alpha_bar,
        gamma,
        seed: config.seed,
        n,
        iterations: state.k,
        epochs_run: epoch_of(state.k),
        final_gap: last_gap,
        tracking_drift,
        mass_drift,
        hit_target,
        state,
    })
}
