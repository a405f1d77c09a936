//! Deterministic sign and ordering conventions shared by the decomposition
//! modules. Singular vectors and eigenvectors are only defined up to sign (and
//! up to rotation inside degenerate blocks); these helpers pin a unique
//! representative so that repeated runs and different backends agree.

use nalgebra::DVector;
use std::cmp::Ordering;

/// Returns the sign (`1.0` or `-1.0`) that makes the first largest-magnitude
/// entry of `v` non-negative. Zero vectors get `1.0`.
pub(crate) fn canonical_sign(v: &DVector<f64>) -> f64 {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (idx, &x) in v.iter().enumerate() {
        if x.abs() > best_mag {
            best_mag = x.abs();
            best = idx;
        }
    }
    if v[best] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Entry-wise lexicographic comparison, used to break exact ties between
/// equal singular values or eigenvalues.
pub(crate) fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}
