//! Helpers shared by the crate's test modules (compiled only under `cfg(test)`).

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::var_model::{Edge, VarModel};

/// Draws a sparse random model and rescales its coefficients so the companion
/// spectral radius stays below 0.95. Scaling `Phi(p)` by `s^p` scales every
/// companion eigenvalue by `s`, so the rescale is exact, not iterative.
pub(crate) fn random_stable_model(
    rng: &mut ChaCha8Rng,
    n_max: usize,
    lag_max: usize,
) -> VarModel {
    let n = rng.gen_range(2..=n_max.max(2));
    let max_lag = rng.gen_range(1..=lag_max);
    let mut edges = Vec::new();
    for source in 1..=n {
        for target in 1..=n {
            for lag in 1..=max_lag {
                if rng.gen_bool(0.3) {
                    edges.push(Edge {
                        source,
                        target,
                        lag,
                        coeff: rng.gen_range(-0.9..0.9),
                    });
                }
            }
        }
    }
    let model = VarModel::new(n, max_lag, None, edges).unwrap();
    let rho = model.companion_spectral_radius();
    if rho < 0.95 {
        return model;
    }
    let s = 0.9 / rho;
    let edges = model
        .edges
        .iter()
        .map(|e| Edge {
            coeff: e.coeff * s.powi(e.lag as i32),
            ..*e
        })
        .collect();
    VarModel::new(n, max_lag, None, edges).unwrap()
}

/// Random `d x m` matrix with orthonormal columns (thin QR of a Gaussian
/// draw), for building projection bases in tests.
pub(crate) fn random_orthonormal(rng: &mut ChaCha8Rng, d: usize, m: usize) -> DMatrix<f64> {
    assert!(m <= d);
    let raw = DMatrix::from_fn(d, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = raw.qr();
    qr.q().columns(0, m).into_owned()
}

/// Random ordered process pair (cause, effect) with cause != effect.
pub(crate) fn random_process_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let cause = rng.gen_range(1..=n);
    let mut effect = rng.gen_range(1..=n);
    if effect == cause {
        effect = if cause == n { 1 } else { cause + 1 };
    }
    (cause, effect)
}
