//! Causal orthogonal functions for linear vector-autoregressive processes.
//!
//! The crate turns a sparse VAR model into time-windowed causal effect
//! matrices — the linear response of one process's observation window to unit
//! interventions on another's — and decomposes them into orthogonal
//! impulse/response signal pairs ("causal orthogonal functions", COFs).
//! Around that core it provides:
//!
//! - [`var_model`]: model schema, stability analysis, seeded simulation;
//! - [`effects`]: effect matrices, total-effect accumulants, filtered
//!   causal-effect quantities;
//! - [`cof`]: SVD-based signal pairs, with subspace- and wavelet-constrained
//!   variants;
//! - [`spectral`]: Fourier representation of effect matrices, frequency-domain
//!   Granger comparison, orthogonal wavelet bases;
//! - [`mssa`]: multivariate singular spectrum analysis and a mode-by-mode
//!   comparison report against the COFs;
//! - [`estimation`]: least-squares model fitting on a known graph;
//! - [`oracle`]: independent ground-truth computations (exhaustive path
//!   enumeration, interventional Monte-Carlo) used for validation;
//! - [`models`]: the bundled reference processes used by examples and CLI
//!   presets.
//!
//! Everything is deterministic: random draws always flow from caller-supplied
//! seeds through a ChaCha8 stream, and repeated runs produce byte-identical
//! output.

pub mod cof;
pub mod effects;
pub mod error;
pub mod estimation;
pub mod fmt;
pub mod models;
pub mod mssa;
pub mod oracle;
pub mod spectral;
pub mod var_model;

mod ordering;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{CofxError, Result};
pub use var_model::{Edge, SamplePaths, VarModel};
