use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("exponential integral has a pole at z = 0")]
    Pole,

    #[error("argument out of representable range: {0}")]
    Range(String),

    #[error("quadrature did not converge: estimated error {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    NonConvergence { estimate: f64, tolerance: f64 },

    #[error("unphysical state: purity {purity} exceeds 1")]
    Unphysical { purity: f64 },

    #[error("negative mean occupation {0}")]
    NegativeOccupation(f64),

    #[error("singular covariance matrix")]
    SingularCovariance,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid driving protocol: {0}")]
    InvalidProtocol(String),

    #[error("Fock space of dimension {dim} too small at tau = {tau}: top-level population {population:.3e}")]
    TruncationTooSmall { dim: usize, tau: f64, population: f64 },

    #[error("Fock integration lost positivity or trace at tau = {tau}: {detail}")]
    FockMonitor { tau: f64, detail: String },

    #[error("thermal ansatz left its validity region at tau = {tau} (z = {z})")]
    AnsatzInvalid { tau: f64, z: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
