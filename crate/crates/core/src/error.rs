//! Error classes shared across the toolkit.
//!
//! The split mirrors the exit-code contract of the CLI: input errors are
//! caller mistakes, capacity/regime errors mean a request is outside what
//! exact computation can do, verification errors mean a built or loaded
//! object failed its structural checks.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (bad indices, asymmetric matrix, …).
    #[error("input error: {0}")]
    Input(String),

    /// The request is exact but infeasible at this size (enumeration caps,
    /// tower heights, dense-storage limits).
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Parameters fall outside the regime where the planned formulas apply.
    #[error("regime error: {0}")]
    Regime(String),

    /// An iterative numerical routine failed to converge; carries the best
    /// bracket [lower, upper] established so far.
    #[error("numerical error: {msg} (bracket [{lower}, {upper}])")]
    Numerical { msg: String, lower: f64, upper: f64 },

    /// Rejection sampling exhausted its attempt budget while enforcing the
    /// separation properties of a construction.
    #[error(
        "construction infeasible: step {step}, side {side}, part {part}: property {property} \
         still violated after {attempts} attempts (best margin {best_margin})"
    )]
    ConstructionInfeasible {
        step: usize,
        side: char,
        part: usize,
        property: u8,
        attempts: u32,
        best_margin: f64,
    },

    /// A structural verification found a violation.
    #[error("verification failure: {0}")]
    Verification(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }

    pub fn verification(msg: impl Into<String>) -> Self {
        Error::Verification(msg.into())
    }
}
