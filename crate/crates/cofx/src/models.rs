//! Bundled example models.
//!
//! These are the fixed reference processes used by the worked examples, the
//! validation suite and the `figures` CLI presets. Each builder mirrors a JSON
//! document shipped in the repository `models/` directory; a test keeps the
//! two in sync.
//!
//! Two bivariate documents (`b2`, and the `c1`/`c2` pair) carry
//! `interpreted: true`: their published parameter lists were ambiguous
//! (missing or duplicated subscripts), and the builders encode the reading
//! that keeps each pair's intended symmetry — see the per-builder notes.

use crate::error::Result;
use crate::var_model::{Edge, VarModel};

fn edge(source: usize, target: usize, lag: usize, coeff: f64) -> Edge {
    Edge {
        source,
        target,
        lag,
        coeff,
    }
}

fn build(
    name: &str,
    interpreted: bool,
    n: usize,
    max_lag: usize,
    edges: Vec<Edge>,
) -> VarModel {
    let mut m = VarModel::new(n, max_lag, None, edges).expect("bundled model is valid");
    m.name = Some(name.to_string());
    m.interpreted = interpreted;
    m
}

/// Two-process chain `X1 -> X2` with feedback-free triangular dynamics:
/// `Phi(1) = [[0.5, 0], [0.7, 0.8]]`. Small enough to check by hand.
pub fn chain() -> VarModel {
    build(
        "chain",
        false,
        2,
        1,
        vec![
            edge(1, 1, 1, 0.5),
            edge(1, 2, 1, 0.7),
            edge(2, 2, 1, 0.8),
        ],
    )
}

/// Three-process model A: a slow confounder `X2` drives `X1` and `X3`, with a
/// direct `X1 -> X3` link at lag 5 and lag-5 auto-regressions on `X1`, `X3`.
pub fn process_a() -> VarModel {
    build(
        "A",
        false,
        3,
        6,
        vec![
            edge(1, 1, 5, 0.8),
            edge(1, 3, 5, -0.3),
            edge(2, 1, 1, 0.7),
            edge(2, 2, 1, 0.8),
            edge(2, 3, 6, 0.7),
            edge(3, 3, 5, 0.8),
        ],
    )
}

/// Three-process model B: low-frequency cause/effect (`X1`, `X3`, lag-1
/// autos) confounded by a fast `X2` with a lag-6 auto-regression.
pub fn process_b() -> VarModel {
    build(
        "B",
        false,
        3,
        6,
        vec![
            edge(1, 1, 1, 0.8),
            edge(1, 3, 1, -0.3),
            edge(2, 1, 1, 0.7),
            edge(2, 2, 6, 0.8),
            edge(2, 3, 2, 0.7),
            edge(3, 3, 1, 0.8),
        ],
    )
}

/// Bivariate pair A.1/A.2: identical cause dynamics and coupling, effect
/// auto-regression at lag 2 (A.1) versus lag 3 (A.2).
pub fn a1() -> VarModel {
    build(
        "A.1",
        false,
        2,
        2,
        vec![
            edge(1, 1, 1, 0.5),
            edge(1, 1, 2, -0.8),
            edge(1, 2, 1, 0.25),
            edge(2, 2, 2, -0.8),
        ],
    )
}

/// See [`a1`].
pub fn a2() -> VarModel {
    build(
        "A.2",
        false,
        2,
        3,
        vec![
            edge(1, 1, 1, 0.5),
            edge(1, 1, 2, -0.8),
            edge(1, 2, 1, 0.25),
            edge(2, 2, 3, -0.8),
        ],
    )
}

/// Bivariate pair B.1/B.2: identical coupling and effect dynamics, cause
/// auto-regression at lag 2 (B.1) versus lag 3 (B.2).
pub fn b1() -> VarModel {
    build(
        "B.1",
        false,
        2,
        2,
        vec![
            edge(1, 1, 2, -0.8),
            edge(1, 2, 1, 0.25),
            edge(2, 2, 1, 0.55),
            edge(2, 2, 2, -0.8),
        ],
    )
}

/// See [`b1`]. Interpreted: the published effect-side lag-1 coefficient was
/// printed without its subscript; it is assigned to `(2,2)` by symmetry with
/// B.1.
pub fn b2() -> VarModel {
    build(
        "B.2",
        true,
        2,
        3,
        vec![
            edge(1, 1, 3, -0.8),
            edge(1, 2, 1, 0.25),
            edge(2, 2, 1, 0.55),
            edge(2, 2, 2, -0.8),
        ],
    )
}

/// Bivariate pair C.1/C.2: within each model the cause and the effect carry
/// the same auto-regression (lag-2 `-0.8` for C.1, lag-1 `0.55` for C.2), so
/// neither side of the pair carries structure the other lacks.
///
/// Interpreted: the published list misprints two model subscripts; this
/// reading restores the stated design ("cause and effect have the same
/// dynamics") that the other two rows deliberately break.
pub fn c1() -> VarModel {
    build(
        "C.1",
        true,
        2,
        2,
        vec![
            edge(1, 1, 2, -0.8),
            edge(1, 2, 1, 0.25),
            edge(2, 2, 2, -0.8),
        ],
    )
}

/// See [`c1`].
pub fn c2() -> VarModel {
    build(
        "C.2",
        true,
        2,
        1,
        vec![
            edge(1, 1, 1, 0.55),
            edge(1, 2, 1, 0.25),
            edge(2, 2, 1, 0.55),
        ],
    )
}

/// All bundled models keyed by the names used in CLI presets and file names.
pub fn bundled() -> Vec<(&'static str, VarModel)> {
    vec![
        ("chain", chain()),
        ("A", process_a()),
        ("B", process_b()),
        ("A1", a1()),
        ("A2", a2()),
        ("B1", b1()),
        ("B2", b2()),
        ("C1", c1()),
        ("C2", c2()),
    ]
}

/// Looks a bundled model up by preset name.
pub fn by_name(name: &str) -> Result<VarModel> {
    bundled()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, m)| m)
        .ok_or_else(|| {
            crate::error::CofxError::InvalidArgument(format!("unknown bundled model `{name}`"))
        })
}
