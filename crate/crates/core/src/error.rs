//! Error type shared by every module in the crate.

use thiserror::Error;

/// Everything that can go wrong while running an experiment.
#[derive(Debug, Error)]
pub enum Error {
    /// A digit (or some other certified quantity) could not be produced at
    /// the working precision, and raising precision is either impossible
    /// (decimal literals carry a hard certification budget) or capped.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// A continued fraction expansion terminated: the input is rational.
    /// Carries the digits produced before termination.
    #[error("input is rational; expansion terminated after digits {digits:?}")]
    RationalInput { digits: Vec<u64> },

    /// Digit steering could not satisfy the requested congruence class
    /// within the search radius.
    #[error("digit construction failed: {0}")]
    ConstructionFailed(String),

    /// A jump function with no jumps was where a normal form was required.
    #[error("function has no jump discontinuities")]
    NoJump,

    /// An orbit point landed within 2^-64 of a jump discontinuity and the
    /// caller asked for strict certification.
    #[error("orbit point {index} lies within 2^-64 of jump discontinuity {gamma}")]
    JumpCollision { index: u64, gamma: String },

    /// Input size above the documented limit of an exact algorithm.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// A subsequence of `{q_n x}` values did not settle into a cluster.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// The limit function g degenerated (constant, or zero interquartile
    /// range), so no two-scale comparison can be made.
    #[error("degenerate limit function: {0}")]
    DegenerateG(String),

    /// Malformed input (manifest fields, digit values, surd coefficients…).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionExhausted(_) => 3,
            Error::InvalidInput(_) | Error::RationalInput { .. } => 2,
            _ => 1,
        }
    }
}
