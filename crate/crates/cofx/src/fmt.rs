//! Numeric output formatting.
//!
//! All text output (CSV columns, report fields) goes through [`sig15`], which
//! prints scientific decimal notation with 17 significant digits. That meets
//! the "at least 15 significant digits" output contract and is enough for
//! every `f64` to round-trip exactly, so emitted documents are lossless and
//! byte-identical across repeated runs.

/// Formats a float with 17 significant digits in scientific notation.
pub fn sig15(x: f64) -> String {
    format!("{x:.16e}")
}
