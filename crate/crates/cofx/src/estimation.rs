//! Model fitting from observed sample paths.
//!
//! The time-series graph (which lagged edges exist) is a required input;
//! only the edge coefficients and noise variances are estimated, by
//! per-target least squares on each process's graph parents. Regressions
//! have no intercept (processes are zero-mean by construction), and the
//! fitted model carries the input graph's sparsity exactly.
//!
//! [`estimated_cofs`] chains fitting, the analytic effect matrix of the
//! fitted model, and the singular decomposition — the estimation pipeline
//! for causal impulse/response pairs — and scores the estimated pairs
//! against a caller-supplied ground-truth effect matrix when available.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cof::{compute_cofs, CofSet};
use crate::effects::{causal_discrepancy, twce, EffectMatrix, WindowSpec};
use crate::error::{CofxError, Result};
use crate::var_model::{Edge, SamplePaths, VarModel};

/// Minimum ratio of effective samples to total parameter count.
pub const SAMPLES_PER_PARAMETER: usize = 10;
/// Relative eigenvalue cutoff below which a regressor Gram matrix is
/// considered rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A lagged edge without a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphEdge {
    /// Parent process, 1-based.
    pub source: usize,
    /// Child process, 1-based.
    pub target: usize,
    /// Positive lag in steps.
    pub lag: usize,
}

/// The known time-series graph handed to the fitting step: the model schema
/// minus coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub n_processes: usize,
    pub max_lag: usize,
    pub edges: Vec<GraphEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl GraphSpec {
    pub fn new(n_processes: usize, max_lag: usize, edges: Vec<GraphEdge>) -> Result<Self> {
        let mut graph = GraphSpec {
            n_processes,
            max_lag,
            edges,
            name: None,
        };
        graph.validate()?;
        Ok(graph)
    }

    /// The edge structure of an existing model, coefficients dropped.
    pub fn from_model(model: &VarModel) -> Self {
        GraphSpec {
            n_processes: model.n_processes,
            max_lag: model.max_lag,
            edges: model
                .edges
                .iter()
                .map(|e| GraphEdge {
                    source: e.source,
                    target: e.target,
                    lag: e.lag,
                })
                .collect(),
            name: model.name.clone(),
        }
    }

    fn validate(&mut self) -> Result<()> {
        if self.n_processes == 0 {
            return Err(CofxError::InvalidModel(
                "graph needs at least one process".into(),
            ));
        }
        if self.max_lag == 0 {
            return Err(CofxError::InvalidModel("max_lag must be positive".into()));
        }
        for e in &self.edges {
            if e.source == 0 || e.source > self.n_processes || e.target == 0
                || e.target > self.n_processes
            {
                return Err(CofxError::InvalidModel(format!(
                    "edge {}->{} out of range for {} processes",
                    e.source, e.target, self.n_processes
                )));
            }
            if e.lag == 0 || e.lag > self.max_lag {
                return Err(CofxError::InvalidModel(format!(
                    "edge {}->{} lag {} outside 1..={}",
                    e.source, e.target, e.lag, self.max_lag
                )));
            }
        }
        self.edges
            .sort_by_key(|e| (e.source, e.target, e.lag));
        if self.edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(CofxError::InvalidModel("duplicate graph edge".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut graph: GraphSpec =
            serde_json::from_str(text).map_err(|e| CofxError::Schema(e.to_string()))?;
        graph.validate()?;
        Ok(graph)
    }
}

/// Fits edge coefficients and noise variances by per-target least squares.
///
/// For each target process, its value at time `t` is regressed on its graph
/// parents' lagged values over all `t` with a full lag history
/// (`length - max_lag` effective rows). The noise variance is the residual
/// sum of squares divided by (rows - parameters). Fails when the effective
/// rows fall short of [`SAMPLES_PER_PARAMETER`] times the total edge count
/// or when a target's regressors are collinear.
pub fn fit_var(data: &SamplePaths, graph: &GraphSpec) -> Result<VarModel> {
    let mut graph = graph.clone();
    graph.validate()?;
    if data.n_processes != graph.n_processes {
        return Err(CofxError::DimensionMismatch {
            context: "data series vs graph processes",
            expected: graph.n_processes,
            got: data.n_processes,
        });
    }
    if data.length <= graph.max_lag {
        return Err(CofxError::InsufficientSamples {
            available: data.length.saturating_sub(graph.max_lag),
            required: 1,
        });
    }
    let rows = data.length - graph.max_lag;
    let required = (SAMPLES_PER_PARAMETER * graph.edges.len()).max(1);
    if rows < required {
        return Err(CofxError::InsufficientSamples {
            available: rows,
            required,
        });
    }

    let mut fitted_edges = Vec::with_capacity(graph.edges.len());
    let mut noise = Vec::with_capacity(graph.n_processes);
    for target in 1..=graph.n_processes {
        // Parents in canonical (source, lag) order.
        let parents: Vec<&GraphEdge> =
            graph.edges.iter().filter(|e| e.target == target).collect();
        let p = parents.len();
        let value = |process: usize, t: usize| data.values[(process - 1, t)];

        // Accumulate the normal equations X^T X and X^T y directly.
        let mut gram: DMatrix<f64> = DMatrix::zeros(p, p);
        let mut rhs: DVector<f64> = DVector::zeros(p);
        let mut yy = 0.0_f64;
        for t in graph.max_lag..data.length {
            let y = value(target, t);
            yy += y * y;
            for (a, ea) in parents.iter().enumerate() {
                let xa = value(ea.source, t - ea.lag);
                rhs[a] += xa * y;
                for (b, eb) in parents.iter().enumerate().skip(a) {
                    gram[(a, b)] += xa * value(eb.source, t - eb.lag);
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)];
            }
        }

        let beta = if p > 0 {
            let eigen = SymmetricEigen::new(gram.clone());
            let (emax, emin): (f64, f64) = (eigen.eigenvalues.max(), eigen.eigenvalues.min());
            if emin <= RANK_TOLERANCE * emax.max(0.0) || rows < p {
                return Err(CofxError::RankDeficient { target });
            }
            Cholesky::new(gram)
                .ok_or(CofxError::RankDeficient { target })?
                .solve(&rhs)
        } else {
            DVector::zeros(0)
        };

        // RSS = y^T y - 2 beta^T X^T y + beta^T X^T X beta, but the solved
        // normal equations reduce it to y^T y - beta^T X^T y.
        let rss = (yy - beta.dot(&rhs)).max(0.0);
        let dof = rows - p;
        if dof == 0 {
            return Err(CofxError::RankDeficient { target });
        }
        noise.push(rss / dof as f64);
        for (a, e) in parents.iter().enumerate() {
            fitted_edges.push(Edge {
                source: e.source,
                target: e.target,
                lag: e.lag,
                coeff: beta[a],
            });
        }
    }

    let mut model = VarModel::new(graph.n_processes, graph.max_lag, Some(noise), fitted_edges)?;
    model.name = graph.name.clone();
    Ok(model)
}

/// Per-pair scores of estimated impulse/response signals against a
/// ground-truth effect matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationDiagnostics {
    /// The fitted model the decomposition came from.
    pub fitted: VarModel,
    /// Causal discrepancy of each estimated pair evaluated on the true
    /// effect matrix; `None` for pairs whose estimated magnitude is zero or
    /// whose impulse draws no response from the true matrix.
    pub cd_vs_truth: Option<Vec<Option<f64>>>,
}

/// The estimation pipeline: fit the model, compute its analytic effect
/// matrix for `spec`, and decompose it into impulse/response pairs.
///
/// When `truth` (the effect matrix of the generating model, same spec) is
/// supplied, each estimated pair is scored by its causal discrepancy on it.
pub fn estimated_cofs(
    data: &SamplePaths,
    graph: &GraphSpec,
    spec: &WindowSpec,
    truth: Option<&EffectMatrix>,
) -> Result<(CofSet, EstimationDiagnostics)> {
    if let Some(t) = truth {
        if t.spec != *spec {
            return Err(CofxError::InvalidArgument(
                "truth effect matrix was computed for a different window spec".into(),
            ));
        }
    }
    let fitted = fit_var(data, graph)?;
    let eff = twce(&fitted, spec)?;
    let cofs = compute_cofs(&eff, None)?;
    let cd_vs_truth = truth.map(|true_eff| {
        (1..=cofs.len())
            .map(|l| {
                if cofs.sigmas[l - 1] <= 0.0 {
                    return None;
                }
                causal_discrepancy(true_eff, &cofs.impulse(l), &cofs.response(l)).ok()
            })
            .collect()
    });
    Ok((
        cofs,
        EstimationDiagnostics {
            fitted,
            cd_vs_truth,
        },
    ))
}
