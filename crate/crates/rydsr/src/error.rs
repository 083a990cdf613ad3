//! Crate error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid physical input (non-downward transition, zero separation, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Bad or inconsistent configuration (missing defect entry, bad paths, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical failure (non-finite intermediate, grid underflow, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The collective-rate equation could not be bracketed.
    #[error("rate solver error: no sign change on [0, {gamma_max:.3e}] (residuals {res_lo:.3e}, {res_hi:.3e})")]
    Solver {
        gamma_max: f64,
        res_lo: f64,
        res_hi: f64,
    },

    /// Adaptive step size collapsed.
    #[error("stiffness error: step underflow at t = {t:.6e}")]
    Stiffness { t: f64 },

    /// A threshold was not reached within the integration window.
    #[error("truncation error: threshold not reached by t_end = {t_end:.6e} (last value {last:.6e})")]
    Truncated { t_end: f64, last: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code contract: 2 for configuration problems, 3 for numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Io(_) => 2,
            _ => 3,
        }
    }
}
