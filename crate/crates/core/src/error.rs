//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a documented invariant. The message
    /// names the violated inequality or bound.
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    /// Chart arithmetic left the injectivity domain (displacement >= 1/2).
    #[error("chart overflow: {0}")]
    ChartOverflow(String),

    /// log of two nearly antipodal points has no unique minimal lift.
    #[error("antipodal ambiguity: d(x,y) = {0} too close to 1/2")]
    AntipodalAmbiguity(f64),

    /// Newton iteration for a map inverse failed to converge.
    #[error("Newton inverse did not converge after {steps} steps (residual {residual:.3e})")]
    NewtonDivergence { steps: usize, residual: f64 },

    /// A map or frame that must be invertible is numerically singular.
    #[error("non-invertible: {0}")]
    NonInvertible(String),

    /// The operator series fails its geometric-decay precheck.
    #[error("series non-decay: {0}")]
    SeriesNonDecay(String),

    /// The contraction solver diverged; carries the ratio trace.
    #[error("solver divergence: {message}")]
    SolverDivergence { message: String, ratio_trace: Vec<f64> },

    /// A degenerate (constant) field has no defined Hoelder exponent.
    #[error("exponent undefined: field is constant")]
    ExponentUndefined,

    /// Input file could not be parsed.
    #[error("input parse error: {0}")]
    InputParse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
