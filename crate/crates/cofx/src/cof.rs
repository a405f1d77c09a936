//! Causal orthogonal functions (COFs).
//!
//! The singular value decomposition of an effect matrix yields paired unit
//! signals: impulse `u_l` on the cause window and response `v_l` on the
//! effect window with `Lambda u_l = sigma_l v_l`. The `sigma_l` are the
//! stationary values of the causal effect, the impulses its critical points,
//! and each pair filters the response perfectly (zero causal discrepancy).
//!
//! Variants restrict the impulse and/or response side to chosen subspaces:
//! [`constrained_cofs`] for one orthonormal basis per side,
//! [`jointly_constrained_cofs`] for chains of overlapping subspaces, and
//! [`ssa_restricted_cofs`] for bases built from singular spectrum analysis of
//! the marginal processes.
//!
//! Output conventions, pinned for reproducibility: singular values sorted in
//! non-increasing order, values below `1e-12 * sigma_1` truncated to exact
//! zero, each response's first largest-magnitude entry made positive (the
//! impulse follows its pair), and exact ties ordered lexicographically by
//! response vector.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::effects::{EffectMatrix, SignalRole, SignalVector};
use crate::error::{CofxError, Result};
use crate::ordering::{canonical_sign, lex_cmp};

/// Relative cutoff under which singular values collapse to exact zero.
pub const SIGMA_TRUNCATION: f64 = 1e-12;
/// Allowed deviation from orthonormality for projection bases.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;

/// Which window a projection basis restricts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSide {
    /// Cause-window (impulse) side.
    Impulse,
    /// Effect-window (response) side.
    Response,
}

/// A subspace restriction: orthonormal columns spanning admissible signals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis {
    pub columns: DMatrix<f64>,
    pub side: BasisSide,
}

impl ProjectionBasis {
    /// Validates column orthonormality (tolerance
    /// [`ORTHONORMALITY_TOLERANCE`]) and wraps the basis.
    pub fn new(columns: DMatrix<f64>, side: BasisSide) -> Result<Self> {
        if columns.ncols() == 0 || columns.ncols() > columns.nrows() {
            return Err(CofxError::InvalidArgument(format!(
                "projection basis must have 1..=dim columns, got {}x{}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        let gram = columns.transpose() * &columns;
        let deviation = (&gram - DMatrix::identity(gram.nrows(), gram.ncols()))
            .abs()
            .max();
        if deviation > ORTHONORMALITY_TOLERANCE {
            return Err(CofxError::NotOrthonormal {
                deviation,
                tolerance: ORTHONORMALITY_TOLERANCE,
            });
        }
        Ok(ProjectionBasis { columns, side })
    }

    /// Number of basis vectors.
    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    fn require_side(&self, side: BasisSide) -> Result<()> {
        if self.side != side {
            return Err(CofxError::RoleMismatch {
                expected: match side {
                    BasisSide::Impulse => "impulse",
                    BasisSide::Response => "response",
                },
                got: match self.side {
                    BasisSide::Impulse => "impulse",
                    BasisSide::Response => "response",
                },
            });
        }
        Ok(())
    }

    fn require_rows(&self, expected: usize, context: &'static str) -> Result<()> {
        if self.columns.nrows() != expected {
            return Err(CofxError::DimensionMismatch {
                context,
                expected,
                got: self.columns.nrows(),
            });
        }
        Ok(())
    }
}

/// A set of paired impulse/response signals with their effect magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct CofSet {
    /// Non-increasing effect magnitudes.
    pub sigmas: Vec<f64>,
    /// Impulse signals, one column per pair (cause-window length).
    pub impulses: DMatrix<f64>,
    /// Response signals, one column per pair (effect-window length).
    pub responses: DMatrix<f64>,
    /// Names the restriction that produced the set (`"unconstrained"`,
    /// `"constrained"`, `"jointly-constrained"`, `"ssa"`, `"wavelet-scale"`).
    pub constraint_tag: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CofSetDoc {
    sigmas: Vec<f64>,
    impulses: Vec<Vec<f64>>,
    responses: Vec<Vec<f64>>,
    constraint_tag: String,
}

impl CofSet {
    /// Number of pairs in the set.
    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    /// Impulse signal of pair `l` (1-based), tagged for use in the filtered
    /// effect quantities.
    pub fn impulse(&self, l: usize) -> SignalVector {
        SignalVector {
            values: self.impulses.column(l - 1).into_owned(),
            role: SignalRole::Impulse,
        }
    }

    /// Response signal of pair `l` (1-based).
    pub fn response(&self, l: usize) -> SignalVector {
        SignalVector {
            values: self.responses.column(l - 1).into_owned(),
            role: SignalRole::Response,
        }
    }

    /// Serializes as column-major JSON: one array per signal vector.
    pub fn to_json(&self) -> String {
        let doc = CofSetDoc {
            sigmas: self.sigmas.clone(),
            impulses: (0..self.impulses.ncols())
                .map(|c| self.impulses.column(c).iter().copied().collect())
                .collect(),
            responses: (0..self.responses.ncols())
                .map(|c| self.responses.column(c).iter().copied().collect())
                .collect(),
            constraint_tag: self.constraint_tag.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("cof serialization cannot fail")
    }

    /// Parses the JSON form produced by [`CofSet::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CofSetDoc =
            serde_json::from_str(text).map_err(|e| CofxError::Schema(e.to_string()))?;
        let pairs = doc.sigmas.len();
        if doc.impulses.len() != pairs || doc.responses.len() != pairs {
            return Err(CofxError::Schema(
                "sigmas, impulses and responses must have matching lengths".into(),
            ));
        }
        let col_matrix = |cols: &[Vec<f64>], what: &str| -> Result<DMatrix<f64>> {
            let rows = cols.first().map_or(0, Vec::len);
            if cols.iter().any(|c| c.len() != rows) {
                return Err(CofxError::Schema(format!("{what} columns differ in length")));
            }
            Ok(DMatrix::from_fn(rows, cols.len(), |r, c| cols[c][r]))
        };
        Ok(CofSet {
            sigmas: doc.sigmas,
            impulses: col_matrix(&doc.impulses, "impulse")?,
            responses: col_matrix(&doc.responses, "response")?,
            constraint_tag: doc.constraint_tag,
        })
    }
}

/// One (sigma, impulse, response) triple during canonicalization.
struct Triple {
    sigma: f64,
    impulse: DVector<f64>,
    response: DVector<f64>,
}

/// Applies the crate's sign, truncation and ordering conventions to raw SVD
/// factors of a matrix `A = responses * diag(sigmas) * impulses^T`.
fn canonicalize(mut triples: Vec<Triple>, rank: usize, tag: &str) -> CofSet {
    let sigma_max = triples.iter().map(|t| t.sigma).fold(0.0, f64::max);
    let cutoff = SIGMA_TRUNCATION * sigma_max;
    for t in &mut triples {
        if t.sigma < cutoff {
            t.sigma = 0.0;
        }
        if t.sigma > 0.0 {
            // Pairs flip together, keyed on the response.
            let s = canonical_sign(&t.response);
            t.response *= s;
            t.impulse *= s;
        } else {
            // Dead pairs: fix each side independently.
            let s = canonical_sign(&t.response);
            t.response *= s;
            let s = canonical_sign(&t.impulse);
            t.impulse *= s;
        }
    }
    triples.sort_by(|a, b| {
        b.sigma
            .partial_cmp(&a.sigma)
            .expect("singular values are finite")
            .then_with(|| lex_cmp(&a.response, &b.response))
    });
    triples.truncate(rank);

    let ti = triples.first().map_or(0, |t| t.impulse.len());
    let tj = triples.first().map_or(0, |t| t.response.len());
    let mut impulses = DMatrix::zeros(ti, triples.len());
    let mut responses = DMatrix::zeros(tj, triples.len());
    let mut sigmas = Vec::with_capacity(triples.len());
    for (c, t) in triples.iter().enumerate() {
        impulses.set_column(c, &t.impulse);
        responses.set_column(c, &t.response);
        sigmas.push(t.sigma);
    }
    CofSet {
        sigmas,
        impulses,
        responses,
        constraint_tag: tag.to_string(),
    }
}

/// Raw SVD of an arbitrary matrix as canonical triples.
fn svd_triples(a: &DMatrix<f64>) -> Vec<Triple> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left vectors requested");
    let vt = svd.v_t.as_ref().expect("right vectors requested");
    (0..svd.singular_values.len())
        .map(|l| Triple {
            sigma: svd.singular_values[l],
            impulse: vt.row(l).transpose(),
            response: u.column(l).into_owned(),
        })
        .collect()
}

/// Computes the full COF set of an effect matrix.
///
/// `rank` truncates to the leading pairs; it defaults to `min(T_i, T_j)`
/// (all of them) and may not exceed it.
pub fn compute_cofs(eff: &EffectMatrix, rank: Option<usize>) -> Result<CofSet> {
    let full = eff.spec.t_cause.min(eff.spec.t_effect);
    let rank = rank.unwrap_or(full);
    if rank == 0 || rank > full {
        return Err(CofxError::InvalidArgument(format!(
            "rank must be in 1..={full}, got {rank}"
        )));
    }
    Ok(canonicalize(svd_triples(&eff.values), rank, "unconstrained"))
}

/// COFs restricted to one subspace per side: decomposes `q^T Lambda p` and
/// maps the factors back through the bases, so impulses live in `span(p)` and
/// responses in `span(q)`.
pub fn constrained_cofs(
    eff: &EffectMatrix,
    p: &ProjectionBasis,
    q: &ProjectionBasis,
) -> Result<CofSet> {
    constrained_with_tag(eff, p, q, "constrained")
}

pub(crate) fn constrained_with_tag(
    eff: &EffectMatrix,
    p: &ProjectionBasis,
    q: &ProjectionBasis,
    tag: &str,
) -> Result<CofSet> {
    p.require_side(BasisSide::Impulse)?;
    q.require_side(BasisSide::Response)?;
    p.require_rows(eff.spec.t_cause, "impulse basis rows")?;
    q.require_rows(eff.spec.t_effect, "response basis rows")?;
    let small = q.columns.transpose() * &eff.values * &p.columns;
    let triples = svd_triples(&small)
        .into_iter()
        .map(|t| Triple {
            sigma: t.sigma,
            impulse: &p.columns * t.impulse,
            response: &q.columns * t.response,
        })
        .collect::<Vec<_>>();
    let rank = small.nrows().min(small.ncols());
    Ok(canonicalize(triples, rank, tag))
}

/// COFs under chained subspace restrictions.
///
/// With impulse bases `[P1, ..., Pm]` and response bases `[Q1, ..., Qn]`
/// (composition order = list order), the decomposed core is
///
/// ```text
/// Qn^T (Q_{n-1} Q_{n-1}^T) ... (Q1 Q1^T)  Lambda  (P1 P1^T) ... (P_{m-1} P_{m-1}^T) Pm
/// ```
///
/// and the factors map back through the same chains. Projector chains of
/// overlapping subspaces are contractions, not isometries, so the returned
/// signal columns are orthonormal only when the spans nest; the sigmas are
/// still bounded by the unconstrained `sigma_1`.
pub fn jointly_constrained_cofs(
    eff: &EffectMatrix,
    ps: &[ProjectionBasis],
    qs: &[ProjectionBasis],
) -> Result<CofSet> {
    if ps.is_empty() || qs.is_empty() {
        return Err(CofxError::InvalidArgument(
            "at least one basis required per side".into(),
        ));
    }
    for p in ps {
        p.require_side(BasisSide::Impulse)?;
        p.require_rows(eff.spec.t_cause, "impulse basis rows")?;
    }
    for q in qs {
        q.require_side(BasisSide::Response)?;
        q.require_rows(eff.spec.t_effect, "response basis rows")?;
    }
    // Right chain: Lambda (P1 P1^T)...(P_{m-1}P_{m-1}^T) P_m, built as the
    // T_i x k_m matrix applied to impulse coordinates.
    let mut right: DMatrix<f64> = ps[0].columns.clone();
    for p in &ps[1..] {
        // (current current^T) next  ==  current (current^T next)
        right = &right * (right.transpose() * &p.columns);
    }
    let mut left: DMatrix<f64> = qs[0].columns.clone();
    for q in &qs[1..] {
        left = &left * (left.transpose() * &q.columns);
    }
    let small = left.transpose() * &eff.values * &right;
    let triples = svd_triples(&small)
        .into_iter()
        .map(|t| Triple {
            sigma: t.sigma,
            impulse: &right * t.impulse,
            response: &left * t.response,
        })
        .collect::<Vec<_>>();
    let rank = small.nrows().min(small.ncols());
    Ok(canonicalize(triples, rank, "jointly-constrained"))
}

/// COFs restricted to singular-spectrum bases of the marginal processes:
/// a [`constrained_cofs`] call with the cause-side SSA basis as `p` and the
/// effect-side SSA basis as `q`, tagged `"ssa"`.
pub fn ssa_restricted_cofs(
    eff: &EffectMatrix,
    cause_basis: &ProjectionBasis,
    effect_basis: &ProjectionBasis,
) -> Result<CofSet> {
    constrained_with_tag(eff, cause_basis, effect_basis, "ssa")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::{causal_discrepancy, twce, WindowSpec};
    use crate::models;
    use crate::testutil::{random_orthonormal, random_process_pair, random_stable_model};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chain_2x2() -> EffectMatrix {
        twce(&models::chain(), &WindowSpec::new(1, 2, 0, 2, 2).unwrap()).unwrap()
    }

    #[test]
    fn chain_sigmas_match_characteristic_polynomial() {
        // For the 2x2 chain matrix the sigma^2 are the eigenvalues of
        // Lambda^T Lambda, solved here by the quadratic formula.
        let eff = chain_2x2();
        let g = eff.values.transpose() * &eff.values;
        let (tr, det) = (g[(0, 0)] + g[(1, 1)], g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]);
        let disc = (tr * tr - 4.0 * det).sqrt();
        let expected = [((tr + disc) / 2.0).sqrt(), ((tr - disc) / 2.0).sqrt()];
        let cofs = compute_cofs(&eff, None).unwrap();
        assert_eq!(cofs.len(), 2);
        for (got, want) in cofs.sigmas.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn rank_one_matrix_recovers_its_factors() {
        let a = DVector::from_vec(vec![3.0, 0.0, -4.0]);
        let b = DVector::from_vec(vec![0.0, -2.0, 1.0, 2.0]);
        let spec = WindowSpec::new(1, 2, 0, 4, 3).unwrap();
        let eff = EffectMatrix::new(spec, &a * b.transpose()).unwrap();
        let cofs = compute_cofs(&eff, None).unwrap();
        assert!((cofs.sigmas[0] - a.norm() * b.norm()).abs() <= 1e-12);
        assert!(cofs.sigmas[1..].iter().all(|&s| s == 0.0));
        // Response follows a (its largest-magnitude entry is -4 -> flipped),
        // impulse follows the pair.
        let v = cofs.response(1).values;
        let u = cofs.impulse(1).values;
        assert!((&v - &a / -a.norm()).norm() <= 1e-12);
        assert!((&u - &b / -b.norm()).norm() <= 1e-12);
    }

    #[test]
    fn decomposition_invariants_hold_on_random_effect_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..25 {
            let model = random_stable_model(&mut rng, 3, 3);
            let (cause, effect) = random_process_pair(&mut rng, model.n_processes);
            let spec = WindowSpec::new(
                cause,
                effect,
                rng.gen_range(0..2),
                rng.gen_range(2..7),
                rng.gen_range(2..7),
            )
            .unwrap();
            let eff = twce(&model, &spec).unwrap();
            let cofs = compute_cofs(&eff, None).unwrap();
            let norm = eff.values.norm();

            // Reconstruction.
            let rebuilt = &cofs.responses
                * DMatrix::from_diagonal(&DVector::from_vec(cofs.sigmas.clone()))
                * cofs.impulses.transpose();
            assert!((&rebuilt - &eff.values).norm() <= 1e-10 * norm.max(1.0));

            // Ordering, energy, orthonormality, sign convention.
            assert!(cofs.sigmas.windows(2).all(|w| w[0] >= w[1]));
            let energy: f64 = cofs.sigmas.iter().map(|s| s * s).sum();
            assert!((energy - norm * norm).abs() <= 1e-10 * (norm * norm).max(1.0));
            let iu = cofs.impulses.transpose() * &cofs.impulses;
            let iv = cofs.responses.transpose() * &cofs.responses;
            let eye = DMatrix::identity(cofs.len(), cofs.len());
            assert!((&iu - &eye).abs().max() <= 1e-10);
            assert!((&iv - &eye).abs().max() <= 1e-10);
            for l in 1..=cofs.len() {
                let v = cofs.response(l).values;
                assert!(v[v.abs().imax()] >= 0.0);
            }

            // Each active pair filters its own response perfectly.
            for l in 1..=cofs.len() {
                if cofs.sigmas[l - 1] > 0.0 {
                    let cd =
                        causal_discrepancy(&eff, &cofs.impulse(l), &cofs.response(l)).unwrap();
                    assert!(cd <= 1e-20, "cd = {cd}");
                }
            }
        }
    }

    #[test]
    fn rank_argument_truncates_and_validates() {
        let eff = chain_2x2();
        let top = compute_cofs(&eff, Some(1)).unwrap();
        assert_eq!(top.len(), 1);
        assert!(compute_cofs(&eff, Some(0)).is_err());
        assert!(compute_cofs(&eff, Some(3)).is_err());
    }

    #[test]
    fn constrained_full_bases_reproduce_unconstrained_sigmas() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let eff = twce(
            &models::process_a(),
            &WindowSpec::new(1, 3, 0, 8, 8).unwrap(),
        )
        .unwrap();
        let p = ProjectionBasis::new(random_orthonormal(&mut rng, 8, 8), BasisSide::Impulse).unwrap();
        let q =
            ProjectionBasis::new(random_orthonormal(&mut rng, 8, 8), BasisSide::Response).unwrap();
        let full = compute_cofs(&eff, None).unwrap();
        let constrained = constrained_cofs(&eff, &p, &q).unwrap();
        for (a, b) in full.sigmas.iter().zip(&constrained.sigmas) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
        assert_eq!(constrained.constraint_tag, "constrained");
    }

    #[test]
    fn constrained_sigma_never_exceeds_unconstrained() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let eff = twce(
            &models::process_a(),
            &WindowSpec::new(1, 3, 0, 10, 10).unwrap(),
        )
        .unwrap();
        let sigma1 = compute_cofs(&eff, None).unwrap().sigmas[0];
        for _ in 0..30 {
            let mp = rng.gen_range(1..=10);
            let mq = rng.gen_range(1..=10);
            let p = ProjectionBasis::new(random_orthonormal(&mut rng, 10, mp), BasisSide::Impulse)
                .unwrap();
            let q = ProjectionBasis::new(random_orthonormal(&mut rng, 10, mq), BasisSide::Response)
                .unwrap();
            let constrained = constrained_cofs(&eff, &p, &q).unwrap();
            assert!(constrained.sigmas[0] <= sigma1 + 1e-12);
        }
    }

    #[test]
    fn non_orthonormal_basis_is_rejected() {
        let cols = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            ProjectionBasis::new(cols, BasisSide::Impulse),
            Err(CofxError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn basis_side_and_dimension_are_enforced() {
        let eff = chain_2x2();
        let b = ProjectionBasis::new(DMatrix::identity(2, 2), BasisSide::Response).unwrap();
        let p = ProjectionBasis::new(DMatrix::identity(2, 2), BasisSide::Impulse).unwrap();
        assert!(matches!(
            constrained_cofs(&eff, &b, &b),
            Err(CofxError::RoleMismatch { .. })
        ));
        let tall = ProjectionBasis::new(DMatrix::identity(3, 2), BasisSide::Response).unwrap();
        assert!(matches!(
            constrained_cofs(&eff, &p, &tall),
            Err(CofxError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn disjoint_joint_constraints_kill_every_sigma() {
        let spec = WindowSpec::new(1, 2, 0, 4, 4).unwrap();
        let eff = twce(
            &{
                let mut m = models::chain();
                m.name = None;
                m
            },
            &spec,
        )
        .unwrap();
        let e = DMatrix::<f64>::identity(4, 4);
        let p1 = ProjectionBasis::new(e.columns(0, 2).into_owned(), BasisSide::Impulse).unwrap();
        let p2 = ProjectionBasis::new(e.columns(2, 2).into_owned(), BasisSide::Impulse).unwrap();
        let q = ProjectionBasis::new(e.clone(), BasisSide::Response).unwrap();
        let cofs = jointly_constrained_cofs(&eff, &[p1, p2], &[q]).unwrap();
        assert!(cofs.sigmas.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn single_element_joint_constraint_equals_constrained() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let eff = twce(&models::chain(), &WindowSpec::new(1, 2, 0, 4, 4).unwrap()).unwrap();
        let p = ProjectionBasis::new(random_orthonormal(&mut rng, 4, 2), BasisSide::Impulse).unwrap();
        let q = ProjectionBasis::new(random_orthonormal(&mut rng, 4, 3), BasisSide::Response).unwrap();
        let joint =
            jointly_constrained_cofs(&eff, std::slice::from_ref(&p), std::slice::from_ref(&q))
                .unwrap();
        let single = constrained_cofs(&eff, &p, &q).unwrap();
        for (a, b) in joint.sigmas.iter().zip(&single.sigmas) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert!((&joint.impulses - &single.impulses).abs().max() <= 1e-12);
    }

    #[test]
    fn overlapping_joint_constraints_stay_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let eff = twce(&models::chain(), &WindowSpec::new(1, 2, 0, 6, 6).unwrap()).unwrap();
        let sigma1 = compute_cofs(&eff, None).unwrap().sigmas[0];
        for _ in 0..10 {
            let p1 = ProjectionBasis::new(random_orthonormal(&mut rng, 6, 4), BasisSide::Impulse)
                .unwrap();
            let p2 = ProjectionBasis::new(random_orthonormal(&mut rng, 6, 3), BasisSide::Impulse)
                .unwrap();
            let q1 = ProjectionBasis::new(random_orthonormal(&mut rng, 6, 5), BasisSide::Response)
                .unwrap();
            let q2 = ProjectionBasis::new(random_orthonormal(&mut rng, 6, 2), BasisSide::Response)
                .unwrap();
            let joint = jointly_constrained_cofs(&eff, &[p1, p2], &[q1, q2]).unwrap();
            assert!(joint.sigmas[0] <= sigma1 + 1e-12);
            assert_eq!(joint.constraint_tag, "jointly-constrained");
        }
    }

    #[test]
    fn ssa_wrapper_with_full_bases_matches_unconstrained() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let eff = twce(&models::chain(), &WindowSpec::new(1, 2, 0, 5, 5).unwrap()).unwrap();
        let p = ProjectionBasis::new(random_orthonormal(&mut rng, 5, 5), BasisSide::Impulse).unwrap();
        let q = ProjectionBasis::new(random_orthonormal(&mut rng, 5, 5), BasisSide::Response).unwrap();
        let ssa = ssa_restricted_cofs(&eff, &p, &q).unwrap();
        let full = compute_cofs(&eff, None).unwrap();
        for (a, b) in ssa.sigmas.iter().zip(&full.sigmas) {
            assert!((a - b).abs() <= 1e-10);
        }
        assert_eq!(ssa.constraint_tag, "ssa");
    }

    #[test]
    fn cof_json_round_trip() {
        let cofs = compute_cofs(&chain_2x2(), None).unwrap();
        let again = CofSet::from_json(&cofs.to_json()).unwrap();
        assert_eq!(cofs, again);
        assert!(CofSet::from_json("{\"sigmas\":[1.0],\"impulses\":[],\"responses\":[],\"constraint_tag\":\"x\"}").is_err());
    }
}
