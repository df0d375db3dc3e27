//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Position outside the modeled path extent.
    #[error("position {position:.6e} m outside path extent [{min:.6e}, {max:.6e}] m")]
    OutsideExtent { position: f64, min: f64, max: f64 },

    /// The control quadratic cannot produce the requested well curvature.
    #[error(
        "infeasible well at {position_um:.3} um: required total curvature {required:.4e} J/m^2 \
         does not exceed the pseudopotential curvature {pseudo:.4e} J/m^2"
    )]
    InfeasibleWell {
        position_um: f64,
        required: f64,
        pseudo: f64,
    },

    /// Noise synthesis sampling constraints violated.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// Fock distribution truncation leaves too much tail mass.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// A least-squares fit did not converge.
    #[error("fit failed: {0}")]
    FitFailure(String),

    /// A non-finite value was about to be written to disk.
    #[error("non-finite value in output: {0}")]
    NonFinite(String),

    /// A configuration key that no parameter group recognizes.
    #[error("unknown config key: {0}")]
    UnknownKey(String),

    /// A configuration value that violates a module invariant.
    #[error("config constraint violated for {key}: {message}")]
    Constraint { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
