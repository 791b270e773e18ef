//! Decentralized stochastic optimization over directed graphs.
//!
//! The crate simulates Push-SAGA, a push-sum method with gradient tracking and
//! SAGA variance reduction, next to its baseline family in synchronous rounds.
//! It also evaluates the linear-rate certificate of the method and drives
//! seeded experiment campaigns that write CSV traces.
//!
//! Numerical code is generic over the scalar type. Closed-form certificate
//! quantities accept any ordered [`scalar::Field`], including the exact
//! [`Rational`]; iterative code accepts any [`scalar::Real`] (`f32`, `f64`).
//! The aliases below fix the scalar for the common cases.

pub mod analysis;
pub mod digraph;
pub mod error;
pub mod harness;
pub mod objective;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};

/// Arbitrary-precision rational used for exact certificate evaluation.
pub type Rational = num_rational::BigRational;

pub type WeightMatrix = digraph::Matrix<f64>;
pub type WeightMatrixF32 = digraph::Matrix<f32>;
pub type SpectralProfileF64 = digraph::SpectralProfile<f64>;
pub type SpectralProfileF32 = digraph::SpectralProfile<f32>;

pub type QuadraticProblemF64 = objective::QuadraticProblem<f64>;
pub type QuadraticProblemF32 = objective::QuadraticProblem<f32>;
pub type LogisticProblemF64 = objective::LogisticProblem<f64>;
pub type LogisticProblemF32 = objective::LogisticProblem<f32>;
pub type DatasetF64 = objective::Dataset<f64>;

pub type NodeStateF64 = solvers::NodeState<f64>;
pub type NetworkStateF64 = solvers::NetworkState<f64>;
pub type SolverConfigF64 = solvers::SolverConfig<f64>;
pub type RunOutputF64 = solvers::RunOutput<f64>;

pub type NetworkParamsF64 = analysis::NetworkParams<f64>;
pub type NetworkParamsExact = analysis::NetworkParams<Rational>;
pub type RateCertificateF64 = analysis::RateCertificate<f64>;
