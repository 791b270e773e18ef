//! Linear-rate certificate of Push-SAGA, plus the empirical error vector used
//! to check it against simulated runs.

mod certificate;
mod error_vector;
mod lti;

pub use certificate::{
    certify, iteration_complexity, spectral_radius, CertificateJson, Inequalities, RateCertificate,
    CERTIFICATE_SLACK, RHO_RESIDUAL,
};
pub use error_vector::{empirical_error_vector, forcing_term, ErrorVector};
pub use lti::{
    alpha_bar, certificate_delta, stepsize_inequalities, build_g, build_h_scale, g_delta_rows, gamma, gamma_working,
    InequalityReport, Mat4, NetworkParams,
};
