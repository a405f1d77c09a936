//! Multivariate singular spectrum analysis (mSSA).
//!
//! The stacked lagged covariance of an `N`-process series over a window of
//! length `T` is an `NT x NT` symmetric matrix whose block `(i, j)` holds
//! `Cov(X_i(t-T+r), X_j(t-T+s))`. Its eigendecomposition yields combined
//! temporal modes: column `k` stacks one length-`T` sub-pattern per process.
//!
//! [`mssa_cof_report`] runs the comparison experiment: how well do the
//! covariance-derived mode pairs (cause-side sub-pattern as impulse,
//! effect-side as response) capture the causal structure that the effect
//! matrix's own singular pairs represent exactly? Reported per mode: the
//! causal effect `mu_k` of the mSSA impulse, the filtered effect `lambda_k`
//! onto the mSSA response, the causal discrepancy `cd_k`, and the singular
//! value `sigma_k` of the matching decomposition pair.
//!
//! Estimator: trajectory-matrix (Broomhead-King) averaging of windowed outer
//! products on mean-centered series — guaranteed positive semidefinite —
//! with exact symmetrization. Modes are sorted by descending eigenvalue with
//! the same sign and tie-break conventions as the decomposition pairs.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cof::{compute_cofs, BasisSide, ProjectionBasis};
use crate::effects::{causal_discrepancy, twce, SignalVector, WindowSpec};
use crate::error::{CofxError, Result};
use crate::fmt::sig15;
use crate::ordering::{canonical_sign, lex_cmp};
use crate::var_model::{SamplePaths, VarModel};

/// Stacked lagged covariance estimate from windowed trajectories.
///
/// Entry `((i-1)T + r-1, (j-1)T + s-1)` estimates
/// `Cov(X_i(t-T+r), X_j(t-T+s))` by averaging over all `L - T + 1` complete
/// windows of the mean-centered series, then symmetrizing exactly with the
/// transpose. Requires `length >= 2 * window`.
pub fn lagged_covariance(data: &SamplePaths, window: usize) -> Result<DMatrix<f64>> {
    if window == 0 {
        return Err(CofxError::InvalidArgument(
            "window length must be positive".into(),
        ));
    }
    if data.length < 2 * window {
        return Err(CofxError::InsufficientSamples {
            available: data.length,
            required: 2 * window,
        });
    }
    let n = data.n_processes;
    let t = window;
    let l = data.length;
    let windows = (l - t + 1) as f64;

    // Mean-center each series once.
    let mut centered = data.values.clone();
    for i in 0..n {
        let mean = centered.row(i).sum() / l as f64;
        for u in 0..l {
            centered[(i, u)] -= mean;
        }
    }

    // Every entry with offset d = s - r is a contiguous-range sum of the
    // product series u -> x_i(u) * x_j(u + d), so one prefix-sum pass per
    // (i, j, d) covers all T - |d| entries of that diagonal.
    let mut cov = DMatrix::zeros(n * t, n * t);
    let mut prefix = vec![0.0; l + 1];
    for i in 0..n {
        for j in 0..n {
            for d in -(t as i64 - 1)..=(t as i64 - 1) {
                // Valid u (0-based): u and u + d inside 0..l.
                let u_min = 0.max(-d) as usize;
                let u_max = (l as i64 - 1).min(l as i64 - 1 - d) as usize;
                prefix[u_min] = 0.0;
                for u in u_min..=u_max {
                    prefix[u + 1] =
                        prefix[u] + centered[(i, u)] * centered[(j, (u as i64 + d) as usize)];
                }
                // Entry (r, s = r + d), 1-based, sums u over [r-1, l-t+r-1].
                for r in 1..=t {
                    let s = r as i64 + d;
                    if s < 1 || s > t as i64 {
                        continue;
                    }
                    let lo = r - 1;
                    let hi = l - t + r - 1;
                    let sum = prefix[hi + 1] - prefix[lo];
                    cov[(i * t + r - 1, (j as i64 * t as i64 + s - 1) as usize)] =
                        sum / windows;
                }
            }
        }
    }
    let symmetric = (&cov + cov.transpose()) * 0.5;
    Ok(symmetric)
}

/// Eigendecomposition of a stacked lagged covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MssaDecomposition {
    /// Window length `T` of each per-process sub-pattern.
    pub window: usize,
    pub n_processes: usize,
    /// Orthogonal `NT x NT` matrix; column `k` stacks the per-process
    /// sub-patterns of combined mode `k`.
    pub modes: DMatrix<f64>,
    /// Non-increasing eigenvalues, one per mode.
    pub eigenvalues: Vec<f64>,
}

impl MssaDecomposition {
    /// Raw (not renormalized) sub-pattern of `process` in mode `k`, both
    /// 1-based.
    pub fn pattern(&self, process: usize, k: usize) -> DVector<f64> {
        assert!(process >= 1 && process <= self.n_processes, "process index");
        assert!(k >= 1 && k <= self.modes.ncols(), "mode index");
        self.modes
            .view(((process - 1) * self.window, k - 1), (self.window, 1))
            .column(0)
            .into_owned()
    }
}

/// Diagonalizes a symmetric covariance matrix into combined temporal modes,
/// sorted by descending eigenvalue (ties broken lexicographically, each
/// column's first largest-magnitude entry made nonnegative).
pub fn mssa_decompose(
    cov: &DMatrix<f64>,
    n_processes: usize,
    window: usize,
) -> Result<MssaDecomposition> {
    let dim = n_processes * window;
    if cov.nrows() != dim || cov.ncols() != dim {
        return Err(CofxError::DimensionMismatch {
            context: "covariance side vs n_processes * window",
            expected: dim,
            got: cov.nrows(),
        });
    }
    let scale = cov.abs().max();
    let asymmetry = (cov - cov.transpose()).abs().max();
    if asymmetry > 1e-10 * scale.max(1.0) {
        return Err(CofxError::InvalidArgument(format!(
            "covariance must be symmetric (deviation {asymmetry:e})"
        )));
    }
    let eigen = nalgebra::SymmetricEigen::try_new(cov.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| {
            CofxError::InvalidArgument("symmetric eigensolver did not converge".into())
        })?;
    let mut order: Vec<(f64, DVector<f64>)> = (0..dim)
        .map(|c| {
            let mut v = eigen.eigenvectors.column(c).into_owned();
            v *= canonical_sign(&v);
            (eigen.eigenvalues[c], v)
        })
        .collect();
    order.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("eigenvalues are finite")
            .then_with(|| lex_cmp(&a.1, &b.1))
    });
    let mut modes = DMatrix::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    for (c, (value, vector)) in order.iter().enumerate() {
        modes.set_column(c, vector);
        eigenvalues.push(*value);
    }
    Ok(MssaDecomposition {
        window,
        n_processes,
        modes,
        eigenvalues,
    })
}

/// Single-series SSA basis: the `count` leading temporal modes of `process`'s
/// own lagged covariance, wrapped as a projection basis for `side`.
pub fn ssa_basis(
    data: &SamplePaths,
    process: usize,
    window: usize,
    count: usize,
    side: BasisSide,
) -> Result<ProjectionBasis> {
    if process == 0 || process > data.n_processes {
        return Err(CofxError::InvalidArgument(format!(
            "process {process} out of range for {} series",
            data.n_processes
        )));
    }
    if count == 0 || count > window {
        return Err(CofxError::InvalidArgument(format!(
            "basis size must be in 1..={window}, got {count}"
        )));
    }
    let single = SamplePaths {
        n_processes: 1,
        length: data.length,
        values: DMatrix::from_fn(1, data.length, |_, u| data.values[(process - 1, u)]),
        seed: data.seed,
        burn_in: data.burn_in,
    };
    let cov = lagged_covariance(&single, window)?;
    let dec = mssa_decompose(&cov, 1, window)?;
    ProjectionBasis::new(dec.modes.columns(0, count).into_owned(), side)
}

/// One row of the comparison experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    /// Mode index, 1-based.
    pub k: usize,
    /// Causal effect of the unit-renormalized cause-side mSSA sub-pattern.
    pub mu: f64,
    /// Filtered causal effect onto the effect-side sub-pattern.
    pub lambda: f64,
    /// Causal discrepancy of the mSSA pair.
    pub cd: f64,
    /// Singular value of decomposition pair `k` of the same effect matrix.
    pub sigma: f64,
    /// Unit-renormalized cause-side mSSA sub-pattern.
    pub cause_pattern: Vec<f64>,
    /// Unit-renormalized effect-side mSSA sub-pattern.
    pub effect_pattern: Vec<f64>,
    /// Impulse signal of decomposition pair `k`.
    pub cof_impulse: Vec<f64>,
    /// Response signal of decomposition pair `k`.
    pub cof_response: Vec<f64>,
}

/// Output of [`mssa_cof_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MssaCofReport {
    pub spec: WindowSpec,
    pub samples: usize,
    pub seed: u64,
    pub entries: Vec<ModeComparison>,
}

impl MssaCofReport {
    /// CSV rows `k,mu_k,lambda_k,cd_k,sigma_k` (with header).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,mu_k,lambda_k,cd_k,sigma_k\n");
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.k,
                sig15(e.mu),
                sig15(e.lambda),
                sig15(e.cd),
                sig15(e.sigma)
            )
            .expect("string writes cannot fail");
        }
        out
    }

    /// JSON document including the full mode vectors.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Parses the JSON form produced by [`MssaCofReport::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CofxError::Schema(e.to_string()))
    }
}

/// Runs the mSSA-vs-decomposition comparison for the first `n_modes`
/// combined modes.
///
/// Simulates `samples` points from the model (deterministic per `seed`),
/// estimates the stacked lagged covariance over the window spec's length,
/// and scores each mode pair against the analytic effect matrix. Requires
/// equal cause/effect window lengths and `n_modes <= T`.
pub fn mssa_cof_report(
    model: &VarModel,
    spec: &WindowSpec,
    n_modes: usize,
    samples: usize,
    seed: u64,
) -> Result<MssaCofReport> {
    if spec.t_cause != spec.t_effect {
        return Err(CofxError::InvalidWindow(format!(
            "comparison needs equal window lengths, got cause {} vs effect {}",
            spec.t_cause, spec.t_effect
        )));
    }
    let t = spec.t_cause;
    if n_modes > t {
        return Err(CofxError::InvalidArgument(format!(
            "n_modes must be at most the window length {t}, got {n_modes}"
        )));
    }
    let eff = twce(model, spec)?;
    let mut entries = Vec::with_capacity(n_modes);
    if n_modes > 0 {
        let cofs = compute_cofs(&eff, None)?;
        let data = model.simulate(samples, seed)?;
        let cov = lagged_covariance(&data, t)?;
        let dec = mssa_decompose(&cov, model.n_processes, t)?;
        for k in 1..=n_modes {
            let raw_cause = dec.pattern(spec.cause, k);
            let raw_effect = dec.pattern(spec.effect, k);
            let (cn, en) = (raw_cause.norm(), raw_effect.norm());
            if cn <= 0.0 || en <= 0.0 {
                return Err(CofxError::InvalidArgument(format!(
                    "mode {k} has a vanishing sub-pattern and cannot be renormalized"
                )));
            }
            let impulse = SignalVector::impulse((raw_cause / cn).iter().copied().collect());
            let response = SignalVector::response((raw_effect / en).iter().copied().collect());
            let causal_response = &eff.values * &impulse.values;
            let mu = causal_response.norm();
            let lambda = causal_response.dot(&response.values);
            let cd = causal_discrepancy(&eff, &impulse, &response)?;
            entries.push(ModeComparison {
                k,
                mu,
                lambda,
                cd,
                sigma: cofs.sigmas[k - 1],
                cause_pattern: impulse.values.iter().copied().collect(),
                effect_pattern: response.values.iter().copied().collect(),
                cof_impulse: cofs.impulse(k).values.iter().copied().collect(),
                cof_response: cofs.response(k).values.iter().copied().collect(),
            });
        }
    }
    Ok(MssaCofReport {
        spec: *spec,
        samples,
        seed,
        entries,
    })
}
