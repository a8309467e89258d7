//! Covariance divergence, subspace similarity between subjects, and a paired
//! sign-flip permutation test.

use nalgebra::Cholesky;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::ClassCovariances;
use crate::error::{Error, Result};
use crate::numerics::{
    check_same_dim, derive_seed, gen_sym_eig, orthonormalize, principal_angle_similarity, random_subspace, Matrix,
    OrthonormalBasis, SymMatrix,
};
use crate::transfer::{nonstationary_directions, SsCspConfig, SubjectStats};

/// Default subspace dimensions for similarity analyses.
pub const DEFAULT_DISCRIMINATIVE_DIM: usize = 6;
pub const DEFAULT_NONSTATIONARY_DIM: usize = 5;

/// Exhaustive enumeration is used up to this many subjects (2¹⁰ sign patterns).
pub const MAX_EXHAUSTIVE_SUBJECTS: usize = 10;
/// Sign patterns drawn (identity included) above that size.
pub const RANDOM_PERMUTATIONS: usize = 1024;
pub const PERMUTATION_SEED: u64 = 0x5EED_F11F;

/// `KL(N(0,Σi)‖N(0,Σj)) + KL(N(0,Σj)‖N(0,Σi)) = ½(tr(Σj⁻¹Σi) + tr(Σi⁻¹Σj)) − k`.
pub fn symmetric_kl(si: &SymMatrix, sj: &SymMatrix) -> Result<f64> {
    check_same_dim(si, sj, "symmetric KL")?;
    let k = si.dim() as f64;
    let factor = |s: &SymMatrix| {
        Cholesky::new(s.as_matrix().clone()).ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: crate::numerics::sym_eig(s, crate::numerics::EigenOrder::DescendingValue)
                .values
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
            threshold: 0.0,
        })
    };
    let (ci, cj) = (factor(si)?, factor(sj)?);
    let a = cj.solve(si.as_matrix()).trace();
    let b = ci.solve(sj.as_matrix()).trace();
    Ok(((a + b) / 2.0 - k).max(0.0))
}

/// Orthonormal span of the `d` CSP filters whose class-1 quotient `λ` is
/// most extreme, ranked by `max(λ, 1 − λ)`.
pub fn discriminative_subspace(cov: &ClassCovariances, d: usize) -> Result<OrthonormalBasis> {
    let dim = cov.dim();
    if d == 0 || d > dim {
        return Err(Error::InvalidParameter(format!("subspace dimension {d} outside 1..={dim}")));
    }
    let eig = gen_sym_eig(cov.class1(), &cov.sum())?;
    let mut order: Vec<usize> = (0..dim).collect();
    let score = |i: usize| eig.values[i].max(1.0 - eig.values[i]);
    order.sort_by(|&a, &b| score(b).total_cmp(&score(a)));
    let cols: Vec<_> = order[..d].iter().map(|&i| eig.vectors.column(i).into_owned()).collect();
    orthonormalize(&Matrix::from_columns(&cols))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubspaceKind {
    Discriminative,
    Nonstationary,
}

impl std::str::FromStr for SubspaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discriminative" => Ok(SubspaceKind::Discriminative),
            "nonstationary" => Ok(SubspaceKind::Nonstationary),
            other => Err(Error::InvalidParameter(format!("unknown subspace kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimilarityReport {
    pub subject_ids: Vec<String>,
    /// Symmetric, unit diagonal.
    pub pairwise: Vec<Vec<f64>>,
    /// Mean over distinct pairs.
    pub mean: f64,
    pub subspace_kind: SubspaceKind,
    pub dimension: usize,
}

/// Pairwise similarity of the subjects' discriminative or non-stationary
/// subspaces of dimension `d`.
pub fn subject_similarity_report(subjects: &[SubjectStats], kind: SubspaceKind, d: usize) -> Result<SimilarityReport> {
    if subjects.len() < 2 {
        return Err(Error::TooFewSubjects { required: 2, found: subjects.len() });
    }
    let spans = subjects
        .iter()
        .map(|s| match kind {
            SubspaceKind::Discriminative => discriminative_subspace(&s.train, d),
            SubspaceKind::Nonstationary => Ok(nonstationary_directions(s, &SsCspConfig::new(d, 1)?)?.vectors),
        })
        .collect::<Result<Vec<_>>>()?;
    let n = spans.len();
    let mut pairwise = vec![vec![1.0; n]; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let s = principal_angle_similarity(&spans[i], &spans[j])?;
            pairwise[i][j] = s;
            pairwise[j][i] = s;
            total += s;
        }
    }
    Ok(SimilarityReport {
        subject_ids: subjects.iter().map(|s| s.id.clone()).collect(),
        pairwise,
        mean: total / (n * (n - 1) / 2) as f64,
        subspace_kind: kind,
        dimension: d,
    })
}

/// Similarities of a reference subspace to Haar-random subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    /// In draw order.
    pub scores: Vec<f64>,
}

impl NullDistribution {
    /// Fraction of null scores strictly below `observed`.
    pub fn fraction_below(&self, observed: f64) -> f64 {
        let below = self.scores.iter().filter(|&&s| s < observed).count();
        below as f64 / self.scores.len().max(1) as f64
    }

    pub fn mean(&self) -> f64 {
        self.scores.iter().sum::<f64>() / self.scores.len().max(1) as f64
    }
}

/// `n_draws` similarities between `reference` and independent random
/// `d`-dimensional subspaces; draw `k` uses a seed derived from `(seed, k)`.
pub fn random_subspace_null(reference: &OrthonormalBasis, d: usize, n_draws: usize, seed: u64) -> Result<NullDistribution> {
    let ambient = reference.ambient_dim();
    if d == 0 || d > ambient {
        return Err(Error::InvalidParameter(format!("subspace dimension {d} outside 1..={ambient}")));
    }
    let scores = (0..n_draws)
        .into_par_iter()
        .map(|k| {
            let r = random_subspace(ambient, d, derive_seed(seed, k as u64))?;
            principal_angle_similarity(reference, &r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NullDistribution { scores })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationTestResult {
    /// `mean(a − b)`.
    pub observed_mean_difference: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub exhaustive: bool,
}

/// One-sided paired test of `mean(a − b) > 0` by flipping the sign of each
/// subject's difference. Up to [`MAX_EXHAUSTIVE_SUBJECTS`] every pattern is
/// enumerated; beyond, the identity plus `RANDOM_PERMUTATIONS − 1` seeded
/// random patterns are used. Ties within a relative `1e-9` count as `≥`.
pub fn paired_permutation_test(a: &[f64], b: &[f64]) -> Result<PermutationTestResult> {
    if a.len() != b.len() {
        return Err(Error::mismatch("paired performance vectors", a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::InvalidParameter("permutation test needs at least one pair".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len();
    let stat = |flip: &dyn Fn(usize) -> bool| -> f64 {
        diffs.iter().enumerate().map(|(i, d)| if flip(i) { -d } else { *d }).sum::<f64>() / n as f64
    };
    let observed = stat(&|_| false);
    // Sums of the same magnitudes in different sign patterns can round
    // differently; a small slack keeps exact ties counted.
    let slack = 1e-9 * diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let at_least = |s: f64| s >= observed - slack;

    if n <= MAX_EXHAUSTIVE_SUBJECTS {
        let total = 1usize << n;
        let hits = (0..total).filter(|&mask| at_least(stat(&|i| mask >> i & 1 == 1))).count();
        return Ok(PermutationTestResult {
            observed_mean_difference: observed,
            p_value: hits as f64 / total as f64,
            n_permutations: total,
            exhaustive: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PERMUTATION_SEED);
    let mut hits = 1;
    for _ in 1..RANDOM_PERMUTATIONS {
        let flips: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        if at_least(stat(&|i| flips[i])) {
            hits += 1;
        }
    }
    Ok(PermutationTestResult {
        observed_mean_difference: observed,
        p_value: hits as f64 / RANDOM_PERMUTATIONS as f64,
        n_permutations: RANDOM_PERMUTATIONS,
        exhaustive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{standard_normal_matrix, Vector};
    use proptest::prelude::*;

    fn random_spd(dim: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = standard_normal_matrix(dim, dim + 2, &mut rng);
        SymMatrix::symmetrized(&g * g.transpose() / dim as f64).with_ridge(0.05)
    }

    #[test]
    fn kl_fixed_values() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(symmetric_kl(&i2, &i2).unwrap(), 0.0);
        let d = SymMatrix::from_diagonal(&[2.0, 1.0]);
        assert!((symmetric_kl(&d, &i2).unwrap() - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn kl_rejects_indefinite() {
        let bad = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            symmetric_kl(&bad, &SymMatrix::identity(2)),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn discriminative_subspace_of_diagonal_pair() {
        let c = ClassCovariances::new(SymMatrix::from_diagonal(&[3.0, 1.0]), SymMatrix::from_diagonal(&[1.0, 1.0])).unwrap();
        let s = discriminative_subspace(&c, 1).unwrap();
        assert!((s.columns()[(0, 0)].abs() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn full_bank_span_matches_csp_filters() {
        let c = ClassCovariances::new(random_spd(6, 1), random_spd(6, 2)).unwrap();
        let bank = crate::csp::csp_train(c.class1(), c.class2(), 3).unwrap();
        let s = discriminative_subspace(&c, 6).unwrap();
        assert!((principal_angle_similarity(&s, &bank.span().unwrap()).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn null_full_dimension_is_one() {
        let r = random_subspace(5, 2, 3).unwrap();
        let null = random_subspace_null(&r, 5, 20, 4).unwrap();
        assert!(null.scores.iter().all(|s| (s - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn null_mean_near_expected_overlap() {
        let reference = random_subspace(80, 6, 8).unwrap();
        let null = random_subspace_null(&reference, 5, 2000, 9).unwrap();
        // E‖UᵀV‖² = d_ref·d/C, divided by min(d_ref, d) = 5.
        let expected = 6.0 / 80.0;
        assert!((null.mean() - expected).abs() <= 0.2 * expected, "{}", null.mean());
        assert_eq!(null, random_subspace_null(&reference, 5, 2000, 9).unwrap());
    }

    #[test]
    fn null_fraction_below_planted_disjoint_score() {
        let reference = OrthonormalBasis::coordinate_axes(40, 0..4).unwrap();
        let disjoint = OrthonormalBasis::coordinate_axes(40, 10..14).unwrap();
        let observed = principal_angle_similarity(&reference, &disjoint).unwrap();
        let null = random_subspace_null(&reference, 4, 500, 1).unwrap();
        assert!(null.fraction_below(observed) <= 0.01);
    }

    #[test]
    fn permutation_fixed_cases() {
        let same = paired_permutation_test(&[0.7, 0.8, 0.9], &[0.7, 0.8, 0.9]).unwrap();
        assert_eq!(same.p_value, 1.0);
        assert!(same.exhaustive);
        let one = paired_permutation_test(&[10.0], &[5.0]).unwrap();
        assert_eq!((one.p_value, one.n_permutations), (0.5, 2));
        assert!(paired_permutation_test(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn large_samples_use_seeded_random_flips() {
        let a: Vec<f64> = (0..12).map(|i| 0.6 + 0.01 * i as f64).collect();
        let b = vec![0.6; 12];
        let r = paired_permutation_test(&a, &b).unwrap();
        assert!(!r.exhaustive);
        assert_eq!(r.n_permutations, RANDOM_PERMUTATIONS);
        assert!(r.p_value >= 1.0 / RANDOM_PERMUTATIONS as f64);
        assert_eq!(r, paired_permutation_test(&a, &b).unwrap());
    }

    proptest! {
        #[test]
        fn kl_symmetric_nonnegative_and_congruence_invariant(dim in 1usize..=5, seed in any::<u64>()) {
            let (a, b) = (random_spd(dim, seed), random_spd(dim, seed.wrapping_add(1)));
            let ab = symmetric_kl(&a, &b).unwrap();
            prop_assert_eq!(ab, symmetric_kl(&b, &a).unwrap());
            prop_assert!(ab >= 0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
            let r = standard_normal_matrix(dim, dim, &mut rng) + Matrix::identity(dim, dim) * 3.0;
            let moved = symmetric_kl(&a.congruence(&r).unwrap(), &b.congruence(&r).unwrap()).unwrap();
            prop_assert!((moved - ab).abs() <= 1e-8 * (1.0 + ab));
            prop_assert!(symmetric_kl(&a, &a).unwrap() <= 1e-10);
        }

        #[test]
        fn permutation_shift_invariant(
            a in prop::collection::vec(0.0f64..1.0, 1..=9), shift in -1.0f64..1.0, seed in any::<u64>()
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b: Vec<f64> = a.iter().map(|_| rng.random::<f64>()).collect();
            let p = paired_permutation_test(&a, &b).unwrap().p_value;
            let a2: Vec<f64> = a.iter().map(|v| v + shift).collect();
            let b2: Vec<f64> = b.iter().map(|v| v + shift).collect();
            prop_assert_eq!(p, paired_permutation_test(&a2, &b2).unwrap().p_value);
        }

        #[test]
        fn exhaustive_matches_brute_force(diffs in prop::collection::vec(-1.0f64..1.0, 10)) {
            let zeros = vec![0.0; 10];
            let got = paired_permutation_test(&diffs, &zeros).unwrap();
            // Brute force over explicit sign vectors, summed in a different order.
            let observed: f64 = diffs.iter().sum::<f64>() / 10.0;
            let slack = 1e-9 * diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let mut hits = 0;
            for mask in 0u32..1024 {
                let signs: Vec<f64> = (0..10).map(|i| if mask & (1 << i) != 0 { -1.0 } else { 1.0 }).collect();
                let s = Vector::from_vec(signs).dot(&Vector::from_vec(diffs.clone())) / 10.0;
                if s >= observed - slack {
                    hits += 1;
                }
            }
            prop_assert_eq!(got.p_value, hits as f64 / 1024.0);
        }
    }
}
