//! Error types shared across the library.

use thiserror::Error;

/// Unified error type for every fallible operation in the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An iterative procedure (quadrature subdivision, series summation)
    /// exhausted its budget before meeting its tolerance.
    #[error("failed to converge: {0}")]
    NonConvergence(String),

    /// An integrand or series term evaluated to NaN or infinity.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// Gamma-family evaluation requested at a nonpositive integer.
    #[error("pole at nonpositive integer argument {0}")]
    PoleAtNonpositiveInteger(f64),

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    DomainError(String),

    /// A lower hypergeometric parameter hit a nonpositive integer while the
    /// series still had live terms.
    #[error("lower parameter pole: {0}")]
    LowerParamPole(String),

    /// The input configuration violates the convergence domain of a series.
    #[error("outside convergence domain: {0}")]
    ConvergenceDomain(String),

    /// Evaluation requested at a singular point (vanishing vector sum with a
    /// positive exponent).
    #[error("singular point: {0}")]
    SingularPoint(String),

    /// Structured input could not be parsed.
    #[error("parse error: {0}")]
    ParseError(String),

    /// Parsed input failed semantic validation.
    #[error("validation error: {0}")]
    ValidationError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
