//! Frequency- and scale-domain views of effect matrices.
//!
//! - [`ftwc`] conjugates a square, lag-free effect matrix by the unitary DFT;
//!   its diagonal magnitudes ([`frequency_causal_effects`]) say how strongly
//!   an intervention at frequency `omega_k` on the cause window amplifies the
//!   same frequency in the effect window.
//! - [`frequency_granger`] evaluates the classical log-ratio causality
//!   measure from the model's transfer function, in two normalizations (see
//!   [`GrangerMode`]).
//! - [`wavelet_matrix`] builds an orthonormal periodic discrete wavelet
//!   basis (Haar or Daubechies-4) partitioned into scale blocks, and
//!   [`scale_effects`] restricts an effect matrix to a chosen pair of
//!   time scales.
//!
//! DFT convention: forward kernel `exp(-2*pi*i*k*n/T)`, unitary scaling
//! `1/sqrt(T)` applied symmetrically.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::cof::{constrained_with_tag, BasisSide, CofSet, ProjectionBasis};
use crate::effects::EffectMatrix;
use crate::error::{CofxError, Result};
use crate::fmt::sig15;
use crate::var_model::VarModel;

type CMatrix = DMatrix<Complex<f64>>;

/// What a [`SpectralCurve`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    FrequencyCausalEffect,
    FrequencyGranger,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::FrequencyCausalEffect => "frequency-causal-effect",
            CurveKind::FrequencyGranger => "frequency-granger",
        }
    }
}

/// Normalization of the Granger log-ratio.
///
/// `Standard` divides the effect process's spectral power by its own
/// noise-weighted direct term `v_j |H_jj|^2` (Geweke convention: no coupling
/// implies an identically zero curve). `CauseNormalized` divides by the
/// cause-side term `v_i |H_ii|^2` instead; it highlights the cause process's
/// dynamics but does not vanish for decoupled processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrangerMode {
    Standard,
    CauseNormalized,
}

impl GrangerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GrangerMode::Standard => "standard",
            GrangerMode::CauseNormalized => "cause-normalized",
        }
    }
}

impl FromStr for GrangerMode {
    type Err = CofxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(GrangerMode::Standard),
            "cause-normalized" => Ok(GrangerMode::CauseNormalized),
            other => Err(CofxError::InvalidArgument(format!(
                "unknown Granger mode {other:?} (expected standard or cause-normalized)"
            ))),
        }
    }
}

/// A frequency-indexed curve of nonnegative (or log-ratio) values.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCurve {
    /// Frequencies in radians per step.
    pub frequencies: Vec<f64>,
    /// One value per frequency, always finite.
    pub values: Vec<f64>,
    pub kind: CurveKind,
}

impl SpectralCurve {
    /// CSV rows `omega,value,kind,model,mode` (with header), one row per
    /// grid point, numbers at full precision.
    pub fn csv(&self, model: &str, mode: &str) -> String {
        let mut out = String::from("omega,value,kind,model,mode\n");
        for (w, v) in self.frequencies.iter().zip(&self.values) {
            writeln!(
                out,
                "{},{},{},{model},{mode}",
                sig15(*w),
                sig15(*v),
                self.kind.as_str()
            )
            .expect("string writes cannot fail");
        }
        out
    }

    /// Index of the largest value (first occurrence on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        best
    }
}

/// Half-spectrum cutoff `T' = T/2` (even `T`) or `(T-1)/2` (odd `T`).
pub fn half_spectrum_length(t: usize) -> usize {
    if t.is_multiple_of(2) {
        t / 2
    } else {
        (t - 1) / 2
    }
}

/// The frequencies `omega_k = 2*pi*k/T` for `k = 0..=T'`.
pub fn fourier_grid(t: usize) -> Vec<f64> {
    (0..=half_spectrum_length(t))
        .map(|k| 2.0 * PI * k as f64 / t as f64)
        .collect()
}

fn require_square_lag_free(eff: &EffectMatrix) -> Result<usize> {
    if eff.spec.t_cause != eff.spec.t_effect {
        return Err(CofxError::InvalidWindow(format!(
            "frequency analysis needs equal window lengths, got cause {} vs effect {}",
            eff.spec.t_cause, eff.spec.t_effect
        )));
    }
    if eff.spec.tau != 0 {
        return Err(CofxError::InvalidWindow(format!(
            "frequency analysis needs tau = 0, got {}",
            eff.spec.tau
        )));
    }
    Ok(eff.spec.t_cause)
}

/// Forward DFT matrix `F[k, n] = exp(-2*pi*i*k*n/T)` (unnormalized).
fn dft_matrix(t: usize) -> CMatrix {
    CMatrix::from_fn(t, t, |k, n| {
        // Reduce k*n modulo T before forming the angle so large windows do
        // not lose precision to huge arguments.
        let kn = (k * n) % t;
        Complex::from_polar(1.0, -2.0 * PI * kn as f64 / t as f64)
    })
}

/// Conjugates the effect matrix by the unitary DFT: `(1/T) F Lambda F^H`.
///
/// Requires a square window pair with `tau = 0`. The result's Frobenius norm
/// equals the effect matrix's.
pub fn ftwc(eff: &EffectMatrix) -> Result<CMatrix> {
    let t = require_square_lag_free(eff)?;
    let f = dft_matrix(t);
    let lambda = eff.values.map(|x| Complex::new(x, 0.0));
    Ok(&f * lambda * f.adjoint() / Complex::new(t as f64, 0.0))
}

/// The curve `k -> |FTWC[k, k]|` for `k = 0..=T'`.
pub fn frequency_causal_effects(eff: &EffectMatrix) -> Result<SpectralCurve> {
    let t = require_square_lag_free(eff)?;
    let m = ftwc(eff)?;
    let frequencies = fourier_grid(t);
    let values = (0..frequencies.len()).map(|k| m[(k, k)].norm()).collect();
    Ok(SpectralCurve {
        frequencies,
        values,
        kind: CurveKind::FrequencyCausalEffect,
    })
}

/// The transfer function `H(omega) = (I - sum_p exp(-i*omega*p) Phi(p))^-1`.
///
/// Fails with the condition number if the lag polynomial is singular at
/// `omega` (cannot happen for stable models).
pub fn transfer_function(model: &VarModel, omega: f64) -> Result<CMatrix> {
    let n = model.n_processes;
    let mut phi = CMatrix::identity(n, n);
    for p in 1..=model.max_lag {
        let w = Complex::from_polar(1.0, -omega * p as f64);
        let block = model.phi(p);
        for r in 0..n {
            for c in 0..n {
                phi[(r, c)] -= w * block[(r, c)];
            }
        }
    }
    let singular = |phi: &CMatrix| {
        // Condition number via the real embedding [[Re,-Im],[Im,Re]], whose
        // singular values duplicate the complex ones.
        let m = 2 * n;
        let mut real = DMatrix::zeros(m, m);
        for r in 0..n {
            for c in 0..n {
                real[(r, c)] = phi[(r, c)].re;
                real[(r, c + n)] = -phi[(r, c)].im;
                real[(r + n, c)] = phi[(r, c)].im;
                real[(r + n, c + n)] = phi[(r, c)].re;
            }
        }
        let sv = real.svd(false, false).singular_values;
        let (smax, smin) = (sv.max(), sv.min());
        CofxError::SingularTransfer {
            omega,
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        }
    };
    match phi.clone().try_inverse() {
        Some(h) => {
            let residual = (&phi * &h - CMatrix::identity(n, n)).map(|z| z.norm()).max();
            if residual <= 1e-8 {
                Ok(h)
            } else {
                Err(singular(&phi))
            }
        }
        None => Err(singular(&phi)),
    }
}

/// Granger causality from `cause` to `effect` over a frequency grid.
///
/// Uses the cross-spectral density `S = H diag(v) H^H` built from the
/// model's noise variances `v`. See [`GrangerMode`] for the two supported
/// denominators.
pub fn frequency_granger(
    model: &VarModel,
    cause: usize,
    effect: usize,
    omegas: &[f64],
    mode: GrangerMode,
) -> Result<SpectralCurve> {
    if cause == 0 || cause > model.n_processes || effect == 0 || effect > model.n_processes {
        return Err(CofxError::InvalidArgument(format!(
            "cause {cause} / effect {effect} out of range for {} processes",
            model.n_processes
        )));
    }
    if cause == effect {
        return Err(CofxError::InvalidArgument(
            "cause and effect must differ".into(),
        ));
    }
    let (i, j) = (cause - 1, effect - 1);
    let mut values = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let h = transfer_function(model, omega)?;
        let spectral_jj: f64 = (0..model.n_processes)
            .map(|m| model.noise_variance_of(m + 1) * h[(j, m)].norm_sqr())
            .sum();
        let denom = match mode {
            GrangerMode::Standard => model.noise_variance_of(effect) * h[(j, j)].norm_sqr(),
            GrangerMode::CauseNormalized => model.noise_variance_of(cause) * h[(i, i)].norm_sqr(),
        };
        if denom <= 0.0 || !denom.is_finite() {
            return Err(CofxError::SingularTransfer {
                omega,
                condition: f64::INFINITY,
            });
        }
        let value = (spectral_jj / denom).ln();
        if !value.is_finite() {
            return Err(CofxError::SingularTransfer {
                omega,
                condition: f64::INFINITY,
            });
        }
        values.push(value);
    }
    Ok(SpectralCurve {
        frequencies: omegas.to_vec(),
        values,
        kind: CurveKind::FrequencyGranger,
    })
}

/// An orthonormal periodic wavelet basis partitioned into scale blocks.
///
/// `scale_blocks[0..levels]` are the detail scales `1..=J` (block `j` has
/// `T / 2^j` columns); `scale_blocks[levels]` is the smooth block with
/// `T / 2^J` columns. Concatenated, the blocks form a `T x T` orthogonal
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBasis {
    pub total_length: usize,
    pub levels: usize,
    pub filter_name: String,
    pub scale_blocks: Vec<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaveletBasisDoc {
    total_length: usize,
    levels: usize,
    filter_name: String,
    scale_blocks: Vec<Vec<Vec<f64>>>,
}

impl WaveletBasis {
    /// Number of scale identifiers: `levels` detail scales plus the smooth
    /// block addressed as scale `levels + 1`.
    pub fn n_scales(&self) -> usize {
        self.levels + 1
    }

    /// Block of scale `s` (1-based; `levels + 1` selects the smooth block).
    pub fn block(&self, s: usize) -> Result<&DMatrix<f64>> {
        if s == 0 || s > self.n_scales() {
            return Err(CofxError::InvalidArgument(format!(
                "scale must be in 1..={} (with {} = smooth block), got {s}",
                self.n_scales(),
                self.n_scales()
            )));
        }
        Ok(&self.scale_blocks[s - 1])
    }

    /// The full `T x T` orthogonal matrix (blocks concatenated in order).
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let t = self.total_length;
        let mut full = DMatrix::zeros(t, t);
        let mut at = 0;
        for block in &self.scale_blocks {
            full.view_mut((0, at), (t, block.ncols()))
                .copy_from(block);
            at += block.ncols();
        }
        full
    }

    /// Serializes blocks column-major (one array per basis signal).
    pub fn to_json(&self) -> String {
        let doc = WaveletBasisDoc {
            total_length: self.total_length,
            levels: self.levels,
            filter_name: self.filter_name.clone(),
            scale_blocks: self
                .scale_blocks
                .iter()
                .map(|b| {
                    (0..b.ncols())
                        .map(|c| b.column(c).iter().copied().collect())
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("basis serialization cannot fail")
    }

    /// Parses the JSON form produced by [`WaveletBasis::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: WaveletBasisDoc =
            serde_json::from_str(text).map_err(|e| CofxError::Schema(e.to_string()))?;
        let mut scale_blocks = Vec::with_capacity(doc.scale_blocks.len());
        for cols in &doc.scale_blocks {
            if cols.is_empty() || cols.iter().any(|c| c.len() != doc.total_length) {
                return Err(CofxError::Schema(
                    "every scale block column must have total_length entries".into(),
                ));
            }
            scale_blocks.push(DMatrix::from_fn(doc.total_length, cols.len(), |r, c| {
                cols[c][r]
            }));
        }
        if scale_blocks.len() != doc.levels + 1 {
            return Err(CofxError::Schema(format!(
                "expected {} scale blocks, got {}",
                doc.levels + 1,
                scale_blocks.len()
            )));
        }
        Ok(WaveletBasis {
            total_length: doc.total_length,
            levels: doc.levels,
            filter_name: doc.filter_name,
            scale_blocks,
        })
    }
}

/// Lowpass/highpass filter pair of an orthonormal wavelet family.
fn filter_pair(name: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    match name {
        "haar" => {
            let s = 1.0 / 2.0_f64.sqrt();
            Ok((vec![s, s], vec![s, -s]))
        }
        "d4" => {
            let s3 = 3.0_f64.sqrt();
            let c = 1.0 / (4.0 * 2.0_f64.sqrt());
            let g = vec![(1.0 + s3) * c, (3.0 + s3) * c, (3.0 - s3) * c, (1.0 - s3) * c];
            // Quadrature mirror: h[l] = (-1)^l g[L-1-l].
            let h = vec![g[3], -g[2], g[1], -g[0]];
            Ok((g, h))
        }
        other => Err(CofxError::UnknownFilter(other.to_string())),
    }
}

/// Adjoint of one periodic filter-and-downsample step: maps `coeffs`
/// (length `M`) to a signal of length `2M` via
/// `out[(2m + l) mod 2M] += filter[l] * coeffs[m]`.
fn synthesis_step(filter: &[f64], coeffs: &[f64]) -> Vec<f64> {
    let out_len = 2 * coeffs.len();
    let mut out = vec![0.0; out_len];
    for (m, w) in coeffs.iter().enumerate() {
        for (l, f) in filter.iter().enumerate() {
            out[(2 * m + l) % out_len] += f * w;
        }
    }
    out
}

/// Builds the orthonormal periodic wavelet basis for signals of length `t`
/// with `j` decomposition levels. `filter` is `"haar"` or `"d4"`; `t` must
/// be a positive multiple of `2^j`.
pub fn wavelet_matrix(t: usize, j: usize, filter: &str) -> Result<WaveletBasis> {
    let (g, h) = filter_pair(filter)?;
    if j == 0 {
        return Err(CofxError::InvalidArgument(
            "at least one decomposition level required".into(),
        ));
    }
    if j >= usize::BITS as usize || t == 0 || !t.is_multiple_of(1 << j) {
        return Err(CofxError::InvalidArgument(format!(
            "signal length {t} is not a positive multiple of 2^{j}"
        )));
    }
    // Column for scale `s`, shift `q`: push the unit coefficient through the
    // highpass adjoint at level `s` (lowpass for the smooth block), then
    // through the lowpass adjoints of all coarser-to-finer levels above.
    let column = |s: usize, q: usize, first: &[f64]| -> Vec<f64> {
        let mut coeffs = vec![0.0; t >> s];
        coeffs[q] = 1.0;
        let mut x = synthesis_step(first, &coeffs);
        for _level in (1..s).rev() {
            x = synthesis_step(&g, &x);
        }
        x
    };
    let mut scale_blocks = Vec::with_capacity(j + 1);
    for s in 1..=j {
        let cols = t >> s;
        let mut block = DMatrix::zeros(t, cols);
        for q in 0..cols {
            block.set_column(q, &DMatrix::from_vec(t, 1, column(s, q, &h)).column(0));
        }
        scale_blocks.push(block);
    }
    let smooth_cols = t >> j;
    let mut smooth = DMatrix::zeros(t, smooth_cols);
    for q in 0..smooth_cols {
        smooth.set_column(q, &DMatrix::from_vec(t, 1, column(j, q, &g)).column(0));
    }
    scale_blocks.push(smooth);
    Ok(WaveletBasis {
        total_length: t,
        levels: j,
        filter_name: filter.to_string(),
        scale_blocks,
    })
}

/// Restricts an effect matrix to a pair of time scales.
///
/// Returns the block matrix `Omega = W_out^T Lambda W_in` (how impulses at
/// scale `s_in` of the cause window drive responses at scale `s_out` of the
/// effect window) together with the scale-restricted COFs mapped back to
/// full-length signals.
pub fn scale_effects(
    eff: &EffectMatrix,
    basis: &WaveletBasis,
    s_in: usize,
    s_out: usize,
) -> Result<(DMatrix<f64>, CofSet)> {
    if eff.spec.t_cause != basis.total_length || eff.spec.t_effect != basis.total_length {
        return Err(CofxError::DimensionMismatch {
            context: "wavelet basis length vs window length",
            expected: basis.total_length,
            got: if eff.spec.t_cause != basis.total_length {
                eff.spec.t_cause
            } else {
                eff.spec.t_effect
            },
        });
    }
    let p = ProjectionBasis::new(basis.block(s_in)?.clone(), BasisSide::Impulse)?;
    let q = ProjectionBasis::new(basis.block(s_out)?.clone(), BasisSide::Response)?;
    let omega = q.columns.transpose() * &eff.values * &p.columns;
    let cofs = constrained_with_tag(eff, &p, &q, "wavelet-scale")?;
    Ok((omega, cofs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::{twce, WindowSpec};
    use crate::models;
    use crate::testutil::random_stable_model;
    use crate::var_model::{Edge, VarModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plain_matrix(t: usize, values: DMatrix<f64>) -> EffectMatrix {
        EffectMatrix::new(WindowSpec::new(1, 2, 0, t, t).unwrap(), values).unwrap()
    }

    #[test]
    fn identity_and_zero_are_fixed_points() {
        let t = 12;
        let id = ftwc(&plain_matrix(t, DMatrix::identity(t, t))).unwrap();
        let zero = ftwc(&plain_matrix(t, DMatrix::zeros(t, t))).unwrap();
        let eye = CMatrix::identity(t, t);
        assert!((id - eye).map(|z| z.norm()).max() <= 1e-10);
        assert!(zero.map(|z| z.norm()).max() <= 1e-15);
    }

    #[test]
    fn circulant_shift_becomes_unit_modulus_diagonal() {
        let t = 8;
        let shift = DMatrix::from_fn(t, t, |r, c| if r == (c + 1) % t { 1.0 } else { 0.0 });
        let m = ftwc(&plain_matrix(t, shift)).unwrap();
        for k in 0..t {
            for n in 0..t {
                if k == n {
                    let expected = Complex::from_polar(1.0, -2.0 * PI * k as f64 / t as f64);
                    assert!((m[(k, k)] - expected).norm() <= 1e-10);
                } else {
                    assert!(m[(k, n)].norm() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn unitary_conjugation_preserves_frobenius_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..10 {
            let model = random_stable_model(&mut rng, 3, 3);
            let spec = WindowSpec::new(1, 2, 0, 16, 16).unwrap();
            let eff = twce(&model, &spec).unwrap();
            let m = ftwc(&eff).unwrap();
            let norm_f: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm_f - eff.values.norm()).abs() <= 1e-10 * eff.values.norm().max(1.0));
        }
    }

    #[test]
    fn diagonal_magnitudes_are_conjugate_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let model = random_stable_model(&mut rng, 2, 2);
        let eff = twce(&model, &WindowSpec::new(1, 2, 0, 11, 11).unwrap()).unwrap();
        let m = ftwc(&eff).unwrap();
        for k in 1..11 {
            assert!((m[(k, k)].norm() - m[(11 - k, 11 - k)].norm()).abs() <= 1e-10);
        }
        // The reported curve covers k = 0..=T' only.
        let curve = frequency_causal_effects(&eff).unwrap();
        assert_eq!(curve.frequencies.len(), 6);
        assert_eq!(curve.kind, CurveKind::FrequencyCausalEffect);
    }

    #[test]
    fn frequency_ops_reject_bad_windows() {
        let rect = EffectMatrix::new(
            WindowSpec::new(1, 2, 0, 3, 4).unwrap(),
            DMatrix::zeros(4, 3),
        )
        .unwrap();
        assert!(matches!(ftwc(&rect), Err(CofxError::InvalidWindow(_))));
        let lagged = EffectMatrix::new(
            WindowSpec::new(1, 2, 2, 4, 4).unwrap(),
            DMatrix::zeros(4, 4),
        )
        .unwrap();
        assert!(matches!(
            frequency_causal_effects(&lagged),
            Err(CofxError::InvalidWindow(_))
        ));
    }

    #[test]
    fn transfer_function_matches_scalar_geometric_form() {
        let zero = VarModel::new(1, 1, None, vec![]).unwrap();
        for omega in [0.0, 1.0, PI] {
            let h = transfer_function(&zero, omega).unwrap();
            assert!((h[(0, 0)] - Complex::new(1.0, 0.0)).norm() <= 1e-15);
        }
        let a = 0.6;
        let ar1 = VarModel::new(
            1,
            1,
            None,
            vec![Edge {
                source: 1,
                target: 1,
                lag: 1,
                coeff: a,
            }],
        )
        .unwrap();
        for omega in [0.0, 0.7, 2.0] {
            let h = transfer_function(&ar1, omega).unwrap();
            let expected = Complex::new(1.0, 0.0)
                / (Complex::new(1.0, 0.0) - Complex::from_polar(a, -omega));
            assert!((h[(0, 0)] - expected).norm() <= 1e-12);
        }
        let h0 = transfer_function(&ar1, 0.0).unwrap();
        assert!((h0[(0, 0)].norm() - 1.0 / (1.0 - a)).abs() <= 1e-12);
    }

    #[test]
    fn unit_root_polynomial_reports_singularity() {
        // x(t) = x(t-1) has a lag polynomial that vanishes at omega = 0.
        let unit_root = VarModel::new(
            1,
            1,
            None,
            vec![Edge {
                source: 1,
                target: 1,
                lag: 1,
                coeff: 1.0,
            }],
        )
        .unwrap();
        match transfer_function(&unit_root, 0.0) {
            Err(CofxError::SingularTransfer { omega, condition }) => {
                assert_eq!(omega, 0.0);
                assert!(condition > 1e8 || condition.is_infinite());
            }
            other => panic!("expected singular transfer, got {other:?}"),
        }
    }

    #[test]
    fn transfer_function_inverse_residual_is_tiny() {
        let model = models::process_a();
        let omega = PI / 2.0;
        let h = transfer_function(&model, omega).unwrap();
        let n = model.n_processes;
        let mut phi = CMatrix::identity(n, n);
        for p in 1..=model.max_lag {
            let w = Complex::from_polar(1.0, -omega * p as f64);
            let block = model.phi(p);
            for r in 0..n {
                for c in 0..n {
                    phi[(r, c)] -= w * block[(r, c)];
                }
            }
        }
        let residual = (&phi * &h - CMatrix::identity(n, n))
            .map(|z| z.norm())
            .max();
        assert!(residual <= 1e-12, "residual {residual}");
    }

    #[test]
    fn decoupled_processes_have_zero_standard_granger() {
        let decoupled = VarModel::new(
            2,
            2,
            None,
            vec![
                Edge { source: 1, target: 1, lag: 2, coeff: -0.8 },
                Edge { source: 2, target: 2, lag: 1, coeff: 0.55 },
            ],
        )
        .unwrap();
        let grid = fourier_grid(200);
        let gc = frequency_granger(&decoupled, 1, 2, &grid, GrangerMode::Standard).unwrap();
        assert!(gc.values.iter().all(|v| v.abs() <= 1e-12));
        // The cause-normalized ratio keeps the cause dynamics instead.
        let cn =
            frequency_granger(&decoupled, 1, 2, &grid, GrangerMode::CauseNormalized).unwrap();
        assert!(cn.values.iter().any(|v| v.abs() > 0.1));
    }

    #[test]
    fn standard_granger_is_nonnegative_for_coupled_bivariate_models() {
        let grid = fourier_grid(200);
        for model in [models::b1(), models::b2(), models::a1(), models::c2()] {
            let gc = frequency_granger(&model, 1, 2, &grid, GrangerMode::Standard).unwrap();
            assert!(gc.values.iter().all(|v| *v >= -1e-12));
            assert_eq!(gc.kind, CurveKind::FrequencyGranger);
        }
    }

    #[test]
    fn granger_peak_tracks_cause_spectrum() {
        // For a lower-triangular bivariate model with a single lag-1 coupling,
        // standard-mode causality is log(1 + |c|^2 v1 / (|d1|^2 v2)) with
        // constant |c|, so its argmax must coincide with the argmax of the
        // cause process's power spectrum 1/|d1(omega)|^2, evaluated here
        // directly from the lag polynomial.
        let grid = fourier_grid(200);
        for (model, auto_lag) in [(models::b1(), 2), (models::b2(), 3)] {
            let gc = frequency_granger(&model, 1, 2, &grid, GrangerMode::Standard).unwrap();
            let psd_argmax = grid
                .iter()
                .enumerate()
                .map(|(k, &w)| {
                    let d1 = Complex::new(1.0, 0.0)
                        - Complex::from_polar(-0.8, -w * auto_lag as f64);
                    (k, 1.0 / d1.norm_sqr())
                })
                .fold((0, f64::MIN), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc })
                .0;
            let diff = gc.argmax().abs_diff(psd_argmax);
            assert!(diff <= 1, "argmax {} vs psd {}", gc.argmax(), psd_argmax);
        }
    }

    #[test]
    fn haar_basis_matches_reference_columns() {
        let basis = wavelet_matrix(4, 2, "haar").unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        let w1 = basis.block(1).unwrap();
        let w2 = basis.block(2).unwrap();
        let v2 = basis.block(3).unwrap();
        let expected_w1 = DMatrix::from_column_slice(4, 2, &[s, -s, 0.0, 0.0, 0.0, 0.0, s, -s]);
        let expected_w2 = DMatrix::from_column_slice(4, 1, &[0.5, 0.5, -0.5, -0.5]);
        let expected_v2 = DMatrix::from_column_slice(4, 1, &[0.5, 0.5, 0.5, 0.5]);
        assert!((w1 - expected_w1).abs().max() <= 1e-15);
        assert!((w2 - expected_w2).abs().max() <= 1e-15);
        assert!((v2 - expected_v2).abs().max() <= 1e-15);
    }

    #[test]
    fn wavelet_bases_are_orthogonal() {
        for (t, j, filter) in [(32, 3, "haar"), (32, 3, "d4"), (16, 4, "haar"), (64, 2, "d4")] {
            let basis = wavelet_matrix(t, j, filter).unwrap();
            assert_eq!(basis.scale_blocks.len(), j + 1);
            for (s, block) in basis.scale_blocks.iter().enumerate() {
                let expected_cols = if s < j { t >> (s + 1) } else { t >> j };
                assert_eq!(block.ncols(), expected_cols);
            }
            let w = basis.full_matrix();
            let dev = (w.transpose() * &w - DMatrix::identity(t, t)).abs().max();
            assert!(dev <= 1e-12, "{filter} T={t} J={j}: deviation {dev}");
        }
    }

    #[test]
    fn wavelet_matrix_validates_inputs() {
        assert!(matches!(
            wavelet_matrix(6, 2, "haar"),
            Err(CofxError::InvalidArgument(_))
        ));
        assert!(matches!(
            wavelet_matrix(8, 0, "haar"),
            Err(CofxError::InvalidArgument(_))
        ));
        assert!(matches!(
            wavelet_matrix(8, 2, "db97"),
            Err(CofxError::UnknownFilter(_))
        ));
    }

    #[test]
    fn d4_columns_concentrate_in_their_frequency_band() {
        // Energy fraction of each detail column inside the dyadic band
        // [pi/2^j, pi/2^(j-1)] (mirror frequencies counted), measured by DFT.
        let t = 8;
        let basis = wavelet_matrix(t, 3, "d4").unwrap();
        let f = dft_matrix(t);
        for j in 1..=3 {
            let (lo, hi) = (PI / (1 << j) as f64, PI / (1 << (j - 1)) as f64);
            let block = basis.block(j).unwrap();
            for c in 0..block.ncols() {
                let col = block.column(c).map(|x| Complex::new(x, 0.0));
                let spectrum = &f * col;
                let mut inside = 0.0;
                let mut total = 0.0;
                for k in 0..t {
                    let omega = 2.0 * PI * k as f64 / t as f64;
                    let folded = omega.min(2.0 * PI - omega);
                    let e = spectrum[k].norm_sqr();
                    total += e;
                    if folded >= lo - 1e-12 && folded <= hi + 1e-12 {
                        inside += e;
                    }
                }
                assert!(inside / total > 0.5, "scale {j} col {c}: {}", inside / total);
            }
        }
    }

    #[test]
    fn scale_blocks_of_identity_are_orthogonal_projections() {
        let t = 16;
        let basis = wavelet_matrix(t, 2, "haar").unwrap();
        let eye = plain_matrix(t, DMatrix::identity(t, t));
        let (same, _) = scale_effects(&eye, &basis, 1, 1).unwrap();
        assert!((same - DMatrix::identity(8, 8)).abs().max() <= 1e-12);
        let (cross, cofs) = scale_effects(&eye, &basis, 1, 2).unwrap();
        assert!(cross.abs().max() <= 1e-12);
        assert!(cofs.sigmas.iter().all(|&s| s <= 1e-12));
        let zero = plain_matrix(t, DMatrix::zeros(t, t));
        let (z, _) = scale_effects(&zero, &basis, 2, 2).unwrap();
        assert!(z.abs().max() == 0.0);
    }

    #[test]
    fn scale_decomposition_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        let model = random_stable_model(&mut rng, 3, 2);
        let eff = twce(&model, &WindowSpec::new(1, 2, 0, 16, 16).unwrap()).unwrap();
        let basis = wavelet_matrix(16, 3, "d4").unwrap();
        let mut energy = 0.0;
        for s_in in 1..=basis.n_scales() {
            for s_out in 1..=basis.n_scales() {
                let (omega, cofs) = scale_effects(&eff, &basis, s_in, s_out).unwrap();
                energy += omega.norm_squared();
                assert_eq!(cofs.impulses.nrows(), 16);
                assert_eq!(cofs.responses.nrows(), 16);
                assert_eq!(cofs.constraint_tag, "wavelet-scale");
            }
        }
        let total = eff.values.norm_squared();
        assert!((energy - total).abs() <= 1e-10 * total.max(1.0));
    }

    #[test]
    fn scale_effects_reject_mismatched_windows() {
        let basis = wavelet_matrix(8, 2, "haar").unwrap();
        let eff = plain_matrix(4, DMatrix::zeros(4, 4));
        assert!(matches!(
            scale_effects(&eff, &basis, 1, 1),
            Err(CofxError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn curve_csv_has_contracted_header_and_rows() {
        let curve = SpectralCurve {
            frequencies: vec![0.0, 0.5],
            values: vec![1.0, 2.0],
            kind: CurveKind::FrequencyGranger,
        };
        let csv = curve.csv("B1", "standard");
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("omega,value,kind,model,mode"));
        let row = lines.next().unwrap();
        assert!(row.ends_with(",frequency-granger,B1,standard"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn wavelet_basis_json_round_trip() {
        let basis = wavelet_matrix(8, 2, "d4").unwrap();
        let again = WaveletBasis::from_json(&basis.to_json()).unwrap();
        assert_eq!(basis, again);
        assert!(WaveletBasis::from_json("{\"total_length\":4}").is_err());
    }
}
