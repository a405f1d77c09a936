//! Error type shared across the crate.
//!
//! Every fallible operation returns [`CofxError`] so that callers (the CLI in
//! particular) can map failures onto a small set of outcomes: malformed input,
//! an unstable model, or a violated numerical precondition.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CofxError>;

/// Errors produced by model parsing, validation and analysis routines.
#[derive(Debug, Error)]
pub enum CofxError {
    /// Input document does not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// Structurally valid input that violates a model invariant
    /// (index out of range, duplicate edge, non-positive noise variance, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Window specification violates its own invariants.
    #[error("invalid window spec: {0}")]
    InvalidWindow(String),

    /// The companion matrix has spectral radius >= 1.
    #[error("unstable model: companion spectral radius {rho} >= 1")]
    Unstable { rho: f64 },

    /// Operands have incompatible shapes.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A signal used in a filtered quantity must have unit Euclidean norm.
    #[error("signal is not unit norm: |norm - 1| = {deviation:e} exceeds 1e-9")]
    NotUnitNorm { deviation: f64 },

    /// A signal was used in a role it was not constructed for.
    #[error("signal role mismatch: expected {expected} signal, got {got}")]
    RoleMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// The causal response vanished, leaving the discrepancy undefined.
    #[error("causal response is zero: causal discrepancy is undefined")]
    ZeroCausalResponse,

    /// A projection basis must have orthonormal columns.
    #[error("basis columns are not orthonormal: max deviation {deviation:e} exceeds {tolerance:e}")]
    NotOrthonormal { deviation: f64, tolerance: f64 },

    /// The transfer-function matrix could not be inverted at a frequency.
    #[error("transfer matrix is singular at omega = {omega}: condition number {condition:e}")]
    SingularTransfer { omega: f64, condition: f64 },

    /// Exhaustive path enumeration was asked for a problem beyond its bounds.
    #[error("path enumeration bound exceeded: {0}")]
    BoundExceeded(String),

    /// Too few samples for the number of parameters being estimated.
    #[error("insufficient samples: {available} available, {required} required")]
    InsufficientSamples { available: usize, required: usize },

    /// The regressor matrix for a fit does not have full column rank.
    #[error("rank-deficient regressor matrix for process {target}")]
    RankDeficient { target: usize },

    /// Unknown wavelet filter name.
    #[error("unknown wavelet filter `{0}` (expected `haar` or `d4`)")]
    UnknownFilter(String),

    /// A parameter was outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
