use thiserror::Error;

/// Errors raised by the solvers and diagnostics.
///
/// Numeric payloads are widened to `f64` so the type does not depend on the
/// scalar parameter.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Maxwellians are not monotone on [{lo}, {hi}]: margin {margin:e}")]
    MonotonicityViolation { lo: f64, hi: f64, margin: f64 },

    #[error("initial datum is not resolved: spectral tail fraction {tail:e}")]
    Unresolved { tail: f64 },

    #[error("density left the certified range at t = {time}: max |u| = {max_abs} > {limit}")]
    RangeEscape { time: f64, max_abs: f64, limit: f64 },

    #[error("non-finite values at t = {time}")]
    NonFinite { time: f64 },

    #[error("xi = {xi} lies outside the entropy table [{lo}, {hi}]")]
    OutOfTable { xi: f64, lo: f64, hi: f64 },

    #[error("cannot invert Maxwellian at xi = {xi}: {reason}")]
    Inversion { xi: f64, reason: String },

    #[error("operation requires a linear flux (h = 0)")]
    NonlinearFlux,

    #[error("degenerate symmetrizer: lambda^2 - a^2 eps^2 = {det:e}")]
    DegenerateSymmetrizer { det: f64 },

    #[error("invalid Sobolev exponents s = {s}, s' = {s_prime}")]
    InvalidExponent { s: f64, s_prime: f64 },

    #[error("rate fit needs at least two strictly positive points: {0}")]
    InvalidRateInput(String),

    #[error("empty epsilon ladder")]
    EmptyLadder,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
