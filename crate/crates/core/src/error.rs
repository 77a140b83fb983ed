use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("{what} did not converge (index {index}) after {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        index: usize,
        iterations: usize,
    },

    #[error("zeros {first} and {second} coincide within {separation:e} (n = {n})")]
    DuplicateZero {
        n: usize,
        first: usize,
        second: usize,
        separation: f64,
    },

    #[error("precision loss: {digits_lost:.1} of {available:.1} digits cancel (n = {n}, r = {r})")]
    PrecisionLoss {
        n: usize,
        r: f64,
        digits_lost: f64,
        available: f64,
    },

    #[error("evaluation point is within {distance:e} of a pole (n = {n})")]
    Pole { n: usize, distance: f64 },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("plan/signal mismatch: {0}")]
    Mismatch(String),

    #[error("quadrature did not converge for pole {pole} at moment {moment}")]
    Quadrature { pole: usize, moment: usize },

    #[error("integrator failure after {steps} accepted / {rejected} rejected steps at t = {t}")]
    Integrator {
        steps: usize,
        rejected: usize,
        t: f64,
    },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("cache format: {0}")]
    CacheFormat(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("mode ({n}, {m}): {source}")]
    Mode {
        n: usize,
        m: i64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
