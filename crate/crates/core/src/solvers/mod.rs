//! Synchronous-round simulation of Push-SAGA and its baselines.
//!
//! Every algorithm here is one point in a small grid: which local gradient
//! estimate a node uses ([`Estimator`]), whether it runs gradient tracking,
//! and whether mixing is push-sum corrected. [`step`] implements the grid;
//! the `step_*` functions name the published combinations.

mod central;
mod run;
mod state;
mod step;
mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use central::PooledProblem;
pub use run::{algorithm_params, network_params, run, run_with_weights, RunOutput, RunSummary, DIVERGENCE_FACTOR};
pub use state::{node_rng, NetworkState, NodeState};
pub use step::{
    saga_estimator_expectation, step, step_addopt, step_dsgd, step_gp, step_push_saga, step_saddopt, step_sgp,
    DOUBLY_STOCHASTIC_TOL,
};
pub use central::{step_saga_central, step_sgd_central};
pub use trace::{read_trace_csv, trace_to_csv, write_trace_csv, TraceRow, TRACE_HEADER};

/// The algorithms of the lab.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    PushSaga,
    Sgp,
    Saddopt,
    Gp,
    Addopt,
    Dsgd,
    SgdCentral,
    SagaCentral,
}

/// How a node forms its local gradient estimate each round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// SAGA: fresh component gradient corrected by the stored table.
    Saga,
    /// One uniformly sampled component gradient.
    Sampled,
    /// The full local gradient `grad f_i`.
    Full,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::PushSaga,
        Algorithm::Sgp,
        Algorithm::Saddopt,
        Algorithm::Gp,
        Algorithm::Addopt,
        Algorithm::Dsgd,
        Algorithm::SgdCentral,
        Algorithm::SagaCentral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::PushSaga => "push_saga",
            Algorithm::Sgp => "sgp",
            Algorithm::Saddopt => "saddopt",
            Algorithm::Gp => "gp",
            Algorithm::Addopt => "addopt",
            Algorithm::Dsgd => "dsgd",
            Algorithm::SgdCentral => "sgd_central",
            Algorithm::SagaCentral => "saga_central",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidParameter(format!("unknown algorithm '{s}', expected one of {}", names.join(", ")))
            })
    }

    pub fn estimator(self) -> Estimator {
        match self {
            Algorithm::PushSaga | Algorithm::SagaCentral => Estimator::Saga,
            Algorithm::Sgp | Algorithm::Saddopt | Algorithm::Dsgd | Algorithm::SgdCentral => Estimator::Sampled,
            Algorithm::Gp | Algorithm::Addopt => Estimator::Full,
        }
    }

    /// Whether the descent direction is the tracker `w` (otherwise `g`).
    pub fn tracks(self) -> bool {
        matches!(
            self,
            Algorithm::PushSaga | Algorithm::Saddopt | Algorithm::Addopt | Algorithm::SagaCentral
        )
    }

    pub fn uses_push_sum(self) -> bool {
        self != Algorithm::Dsgd
    }

    /// Single-machine algorithms run on the pooled data.
    pub fn is_central(self) -> bool {
        matches!(self, Algorithm::SgdCentral | Algorithm::SagaCentral)
    }

    /// Component-gradient evaluations per node per round.
    pub fn is_stochastic(self) -> bool {
        self.estimator() != Estimator::Full
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Stepsize choice: the certified bound `alpha_bar` or an explicit value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stepsize<T> {
    Theory,
    Fixed(T),
}

impl<T: Real> Stepsize<T> {
    /// Parses `theory` or a positive number.
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim() == "theory" {
            return Ok(Stepsize::Theory);
        }
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("stepsize must be 'theory' or a number, got '{s}'")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("stepsize must be positive, got {v}")));
        }
        Ok(Stepsize::Fixed(crate::scalar::lit(v)))
    }
}

/// When node updates inside a round go to the rayon pool.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    /// Parallel only when a round carries enough work to pay for it.
    #[default]
    Auto,
    Sequential,
    Parallel,
}

/// Scalar operations per round above which `Auto` goes parallel.
const PARALLEL_WORK_THRESHOLD: usize = 1 << 15;

impl Parallelism {
    pub(crate) fn enabled(self, work: usize) -> bool {
        match self {
            Parallelism::Auto => work >= PARALLEL_WORK_THRESHOLD && rayon::current_num_threads() > 1,
            Parallelism::Sequential => false,
            Parallelism::Parallel => true,
        }
    }
}

/// Everything a run needs besides the problem and the network.
#[derive(Clone, Debug)]
pub struct SolverConfig<T> {
    pub algorithm: Algorithm,
    pub alpha: Stepsize<T>,
    /// Budget in epochs; one epoch is `m_i` component gradients per node.
    pub max_epochs: f64,
    pub seed: u64,
    /// Trace stride in iterations. Iteration 0 and the last iteration are
    /// always recorded.
    pub record_every: usize,
    /// Per-node starting points; the origin when `None`.
    pub initial: Option<Vec<Vec<T>>>,
    /// Record table reference points so the trace carries `t`. Only
    /// meaningful for SAGA-type estimators; costs `m_i x p` per node.
    pub track_reference_points: bool,
    /// Stop at the first iteration whose gap is at or below this value. The
    /// gap is then evaluated every iteration.
    pub stop_at_gap: Option<f64>,
    pub parallelism: Parallelism,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(algorithm: Algorithm, alpha: Stepsize<T>, max_epochs: f64, seed: u64) -> Self {
        Self {
            algorithm,
            alpha,
            max_epochs,
            seed,
            record_every: 1,
            initial: None,
            track_reference_points: true,
            stop_at_gap: None,
            parallelism: Parallelism::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Stepsize::Fixed(a) = self.alpha {
            if !(a > T::zero()) || !a.is_finite() {
                return Err(Error::InvalidConfiguration(format!("alpha must be positive, got {a}")));
            }
        }
        if !(self.max_epochs >= 1.0) || !self.max_epochs.is_finite() {
            return Err(Error::InvalidConfiguration(format!(
                "max_epochs must be at least 1, got {}",
                self.max_epochs
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfiguration("record_every must be at least 1".into()));
        }
        if let Some(t) = self.stop_at_gap {
            if !(t > 0.0) {
                return Err(Error::InvalidConfiguration(format!("stop_at_gap must be positive, got {t}")));
            }
        }
        Ok(())
    }
}
