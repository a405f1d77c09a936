//! Independent ground-truth computations for validating effect matrices.
//!
//! Two routes, deliberately unrelated to the propagation algorithm in
//! [`crate::effects`]:
//!
//! 1. **Exhaustive path enumeration** — walks every weighted causal path
//!    between two window nodes, discarding improper paths (those that
//!    re-enter the intervened cause window), using backward-memoized suffix
//!    sums keyed by `(process, time)`. Exact up to float rounding, but only
//!    viable for small problems, hence the hard bounds.
//! 2. **Interventional Monte-Carlo** — simulates the process twice per
//!    replicate with common innovations, once with the cause window clamped
//!    to zero and once with a step `h` on a single slot, and differences the
//!    effect window. For linear models the noise cancels exactly, so the
//!    paired standard error collapses to rounding noise.
//!
//! [`validate_effect_matrix`] packages both comparisons into a report.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::effects::{twce, WindowSpec};
use crate::error::{CofxError, Result};
use crate::var_model::VarModel;

/// Problem-size limits for exhaustive enumeration.
const MAX_ENUM_SPAN: usize = 32; // tau + T_i + T_j
const MAX_ENUM_PROCESSES: usize = 4;
/// Cap on explicitly listed paths (the sums do not need it).
const MAX_LISTED_PATHS: usize = 100_000;

/// Floor applied to Monte-Carlo standard errors before forming z-scores, so
/// that exact agreement on linear models does not divide by zero.
pub const SE_FLOOR: f64 = 1e-10;

/// One weighted causal path between two window nodes. Times are relative to
/// the source node (which sits at time 0).
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    /// Visited `(process, time)` nodes, strictly increasing in time.
    pub nodes: Vec<(usize, i64)>,
    /// Product of the traversed edge coefficients.
    pub weight: f64,
}

fn check_bounds(model: &VarModel, spec: &WindowSpec) -> Result<()> {
    spec.check_against(model)?;
    let span = spec.tau + spec.t_cause + spec.t_effect;
    if span > MAX_ENUM_SPAN {
        return Err(CofxError::BoundExceeded(format!(
            "tau + t_cause + t_effect = {span} exceeds {MAX_ENUM_SPAN}"
        )));
    }
    if model.n_processes > MAX_ENUM_PROCESSES {
        return Err(CofxError::BoundExceeded(format!(
            "{} processes exceed {MAX_ENUM_PROCESSES}",
            model.n_processes
        )));
    }
    Ok(())
}

fn check_slot(spec: &WindowSpec, k: usize, l: usize) -> Result<()> {
    if k == 0 || k > spec.t_cause || l == 0 || l > spec.t_effect {
        return Err(CofxError::InvalidArgument(format!(
            "window slots (l={l}, k={k}) outside ({}, {})",
            spec.t_effect, spec.t_cause
        )));
    }
    Ok(())
}

/// Backward suffix-sum table: `f[m][t]` = weighted sum of causal paths from
/// `(m, t)` to the target node, with window nodes zeroed when `proper`.
fn path_sum(model: &VarModel, spec: &WindowSpec, k: usize, l: usize, proper: bool) -> f64 {
    let delta = spec.entry_lag(k, l);
    if delta <= 0 {
        return 0.0;
    }
    let delta = delta as usize;
    let n = model.n_processes;
    let i = spec.cause - 1;
    let j = spec.effect - 1;
    let horizon = spec.t_cause - k; // window slots strictly after the source

    let mut f = vec![vec![0.0f64; delta + 1]; n];
    f[j][delta] = 1.0;
    for t in (0..delta).rev() {
        // A path passing through an intervened window node contributes 0;
        // the source itself (t = 0) is exempt, being where paths start.
        for m in 0..n {
            if proper && m == i && t >= 1 && t <= horizon {
                continue;
            }
            let mut acc = 0.0;
            for e in &model.edges {
                if e.source - 1 == m && t + e.lag <= delta {
                    acc += e.coeff * f[e.target - 1][t + e.lag];
                }
            }
            f[m][t] = acc;
        }
    }
    f[i][0]
}

/// Sum over all *proper* weighted causal paths from cause-window slot `k` to
/// effect-window slot `l` — the ground truth for one effect-matrix entry.
pub fn enumerate_proper_path_sum(
    model: &VarModel,
    spec: &WindowSpec,
    k: usize,
    l: usize,
) -> Result<f64> {
    check_bounds(model, spec)?;
    check_slot(spec, k, l)?;
    Ok(path_sum(model, spec, k, l, true))
}

/// Same sum without the properness filter: every causal path counts. This is
/// the unwindowed total effect between the two nodes.
pub fn enumerate_total_path_sum(
    model: &VarModel,
    spec: &WindowSpec,
    k: usize,
    l: usize,
) -> Result<f64> {
    check_bounds(model, spec)?;
    check_slot(spec, k, l)?;
    Ok(path_sum(model, spec, k, l, false))
}

/// Assembles the full effect matrix entry by entry from proper path sums.
pub fn path_sum_matrix(model: &VarModel, spec: &WindowSpec) -> Result<DMatrix<f64>> {
    check_bounds(model, spec)?;
    let mut m = DMatrix::zeros(spec.t_effect, spec.t_cause);
    for l in 1..=spec.t_effect {
        for k in 1..=spec.t_cause {
            m[(l - 1, k - 1)] = path_sum(model, spec, k, l, true);
        }
    }
    Ok(m)
}

/// Lists the surviving proper paths explicitly (inspection aid). Refuses to
/// materialize more than a fixed number of paths.
pub fn list_proper_paths(
    model: &VarModel,
    spec: &WindowSpec,
    k: usize,
    l: usize,
) -> Result<Vec<PathRecord>> {
    check_bounds(model, spec)?;
    check_slot(spec, k, l)?;
    let delta = spec.entry_lag(k, l);
    let mut out = Vec::new();
    if delta <= 0 {
        return Ok(out);
    }
    let horizon = (spec.t_cause - k) as i64;
    let mut nodes = vec![(spec.cause, 0i64)];
    dfs(
        model,
        spec,
        delta,
        horizon,
        1.0,
        &mut nodes,
        &mut out,
    )?;
    Ok(out)
}

fn dfs(
    model: &VarModel,
    spec: &WindowSpec,
    delta: i64,
    horizon: i64,
    weight: f64,
    nodes: &mut Vec<(usize, i64)>,
    out: &mut Vec<PathRecord>,
) -> Result<()> {
    let &(process, t) = nodes.last().expect("path never empty");
    if process == spec.effect && t == delta {
        if out.len() >= MAX_LISTED_PATHS {
            return Err(CofxError::BoundExceeded(format!(
                "more than {MAX_LISTED_PATHS} proper paths"
            )));
        }
        out.push(PathRecord {
            nodes: nodes.clone(),
            weight,
        });
        return Ok(());
    }
    for e in &model.edges {
        if e.source != process {
            continue;
        }
        let t_next = t + e.lag as i64;
        if t_next > delta {
            continue;
        }
        // Improper: stepping back into the intervened cause window.
        if e.target == spec.cause && t_next >= 1 && t_next <= horizon {
            continue;
        }
        nodes.push((e.target, t_next));
        dfs(model, spec, delta, horizon, weight * e.coeff, nodes, out)?;
        nodes.pop();
    }
    Ok(())
}

/// Monte-Carlo estimate of an effect matrix with per-entry standard errors.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub spec: WindowSpec,
    pub step: f64,
    pub replicates: usize,
    /// Mean finite-difference response per entry.
    pub mean: DMatrix<f64>,
    /// Standard error of the mean per entry.
    pub se: DMatrix<f64>,
}

/// Estimates the effect matrix by paired interventional simulation.
///
/// For each cause-window slot `k` and each replicate, the model is simulated
/// twice on a common innovation stream: once with the whole cause window
/// clamped to zero and once with slot `k` stepped to `h`. The difference of
/// the effect windows, divided by `h`, estimates column `k`. Replicate seeds
/// derive deterministically from `seed`.
pub fn mc_interventional_twce(
    model: &VarModel,
    spec: &WindowSpec,
    step: f64,
    replicates: usize,
    seed: u64,
) -> Result<McEstimate> {
    spec.check_against(model)?;
    model.require_stable()?;
    if !(step.is_finite() && step != 0.0) {
        return Err(CofxError::InvalidArgument(
            "finite non-zero intervention step required".into(),
        ));
    }
    if replicates < 2 {
        return Err(CofxError::InvalidArgument(
            "at least 2 replicates required for a standard error".into(),
        ));
    }
    let burn = model.default_burn_in();
    let (ti, tj) = (spec.t_cause, spec.t_effect);
    let total = burn + ti + spec.tau + 1;

    // Pre-derived replicate seeds: column-major so the stream is independent
    // of any parallel scheduling below.
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<Vec<u64>> = (0..ti)
        .map(|_| (0..replicates).map(|_| master.gen()).collect())
        .collect();

    let columns: Vec<(DVector<f64>, DVector<f64>)> = (1..=ti)
        .into_par_iter()
        .map(|k| {
            let mut diffs: Vec<DVector<f64>> = Vec::with_capacity(replicates);
            for &replicate_seed in &seeds[k - 1] {
                let noise = draw_noise(model, total, replicate_seed);
                let base = run_intervened(model, &noise, burn, spec, None);
                let stepped = run_intervened(model, &noise, burn, spec, Some((k, step)));
                let mut d = DVector::zeros(tj);
                for l in 1..=tj {
                    let col = (burn + ti + spec.tau) as i64 - tj as i64 + l as i64;
                    if col >= 0 {
                        let c = col as usize;
                        d[l - 1] = (stepped[(spec.effect - 1, c)] - base[(spec.effect - 1, c)])
                            / step;
                    }
                }
                diffs.push(d);
            }
            let mean = diffs.iter().sum::<DVector<f64>>() / replicates as f64;
            let var = diffs
                .iter()
                .map(|d| (d - &mean).component_mul(&(d - &mean)))
                .sum::<DVector<f64>>()
                / (replicates - 1) as f64;
            let se = var.map(|v| (v / replicates as f64).sqrt());
            (mean, se)
        })
        .collect();

    let mut mean = DMatrix::zeros(tj, ti);
    let mut se = DMatrix::zeros(tj, ti);
    for (k, (m, s)) in columns.into_iter().enumerate() {
        mean.set_column(k, &m);
        se.set_column(k, &s);
    }
    Ok(McEstimate {
        spec: *spec,
        step,
        replicates,
        mean,
        se,
    })
}

fn draw_noise(model: &VarModel, total: usize, seed: u64) -> DMatrix<f64> {
    let n = model.n_processes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normals: Vec<Normal<f64>> = (1..=n)
        .map(|m| Normal::new(0.0, model.noise_variance_of(m).sqrt()).expect("variance > 0"))
        .collect();
    // Explicit time-major draw order, identical to VarModel::simulate.
    let mut x = DMatrix::zeros(n, total);
    for t in 0..total {
        for m in 0..n {
            x[(m, t)] = normals[m].sample(&mut rng);
        }
    }
    x
}

/// Runs the recursion on a fixed innovation matrix, pinning the cause window
/// to zero except for an optional stepped slot.
fn run_intervened(
    model: &VarModel,
    noise: &DMatrix<f64>,
    burn: usize,
    spec: &WindowSpec,
    stepped_slot: Option<(usize, f64)>,
) -> DMatrix<f64> {
    let mut x = noise.clone();
    let cause = spec.cause - 1;
    let total = x.ncols();
    for t in 0..total {
        for e in &model.edges {
            if t >= e.lag {
                x[(e.target - 1, t)] += e.coeff * x[(e.source - 1, t - e.lag)];
            }
        }
        if t >= burn && t < burn + spec.t_cause {
            let slot = t - burn + 1;
            x[(cause, t)] = match stepped_slot {
                Some((k, h)) if k == slot => h,
                _ => 0.0,
            };
        }
    }
    x
}

/// Per-entry comparison row inside a validation report.
#[derive(Debug, Clone, Serialize)]
pub struct McEntry {
    pub l: usize,
    pub k: usize,
    pub analytic: f64,
    pub oracle: f64,
    pub se: f64,
    pub z: f64,
}

/// Path-oracle section of a validation report.
#[derive(Debug, Clone, Serialize)]
pub struct PathOracleCheck {
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Monte-Carlo section of a validation report.
#[derive(Debug, Clone, Serialize)]
pub struct McCheck {
    pub replicates: usize,
    pub step: f64,
    pub se_floor: f64,
    pub max_abs_z: f64,
    pub z_threshold: f64,
    pub entries: Vec<McEntry>,
    pub passed: bool,
}

/// Outcome of validating an analytic effect matrix against the oracles.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub spec: WindowSpec,
    /// Absent when the problem exceeds the enumeration bounds.
    pub path_oracle: Option<PathOracleCheck>,
    pub monte_carlo: McCheck,
    pub passed: bool,
}

/// Options for [`validate_effect_matrix`].
#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    pub step: f64,
    pub replicates: usize,
    pub seed: u64,
    pub z_threshold: f64,
    pub path_tolerance: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            step: 1.0,
            replicates: 1000,
            seed: 0,
            z_threshold: 3.0,
            path_tolerance: 1e-12,
        }
    }
}

/// Computes the analytic effect matrix and cross-checks it against the path
/// oracle (when within bounds) and the Monte-Carlo oracle.
pub fn validate_effect_matrix(
    model: &VarModel,
    spec: &WindowSpec,
    opts: &ValidationOptions,
) -> Result<ValidationReport> {
    let analytic = twce(model, spec)?;

    let path_oracle = match path_sum_matrix(model, spec) {
        Ok(matrix) => {
            let max_abs_diff = (&matrix - &analytic.values).abs().max();
            Some(PathOracleCheck {
                max_abs_diff,
                tolerance: opts.path_tolerance,
                passed: max_abs_diff <= opts.path_tolerance,
            })
        }
        Err(CofxError::BoundExceeded(_)) => None,
        Err(e) => return Err(e),
    };

    let mc = mc_interventional_twce(model, spec, opts.step, opts.replicates, opts.seed)?;
    let mut entries = Vec::with_capacity(spec.t_effect * spec.t_cause);
    let mut max_abs_z = 0.0f64;
    for l in 1..=spec.t_effect {
        for k in 1..=spec.t_cause {
            let a = analytic.entry(l, k);
            let o = mc.mean[(l - 1, k - 1)];
            let se = mc.se[(l - 1, k - 1)];
            let z = (a - o).abs() / se.max(SE_FLOOR);
            max_abs_z = max_abs_z.max(z);
            entries.push(McEntry {
                l,
                k,
                analytic: a,
                oracle: o,
                se,
                z,
            });
        }
    }
    let mc_passed = max_abs_z <= opts.z_threshold;
    let monte_carlo = McCheck {
        replicates: mc.replicates,
        step: mc.step,
        se_floor: SE_FLOOR,
        max_abs_z,
        z_threshold: opts.z_threshold,
        entries,
        passed: mc_passed,
    };
    let passed = monte_carlo.passed && path_oracle.as_ref().is_none_or(|p| p.passed);
    Ok(ValidationReport {
        spec: analytic.spec,
        path_oracle,
        monte_carlo,
        passed,
    })
}
