//! Stationary-subspace CSP: directions along which the donors' session
//! covariances change are pooled into a common subspace, which the target's
//! filters are then pushed away from.

use super::mtcsp::{mtcsp_train, MtCspConfig};
use super::SubjectStats;
use crate::csp::{csp_train, penalized_csp_unchecked, SpatialFilterBank};
use crate::data::ClassCovariances;
use crate::error::{Error, Result};
use crate::numerics::{
    orthonormal_complement, pca_no_mean, sym_eig, EigenOrder, Matrix, OrthonormalBasis, ProjectOut, SymMatrix,
    Vector,
};

pub const DEFAULT_SUBSPACE_PENALTY: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsCspConfig {
    /// Directions taken per donor.
    pub l: usize,
    /// Dimension of the common subspace.
    pub nu: usize,
    pub penalty: f64,
    /// When set, each donor keeps the fewest directions whose `|eigenvalue|`
    /// mass reaches this fraction of its total, capped at `l`.
    pub adaptive_l_threshold: Option<f64>,
    /// Use class-wise session differences instead of pooled ones.
    pub class_conditional: bool,
}

impl SsCspConfig {
    pub fn new(l: usize, nu: usize) -> Result<Self> {
        if l == 0 || nu == 0 {
            return Err(Error::InvalidParameter(format!("l and nu must be ≥ 1, got l={l}, nu={nu}")));
        }
        Ok(SsCspConfig {
            l,
            nu,
            penalty: DEFAULT_SUBSPACE_PENALTY,
            adaptive_l_threshold: None,
            class_conditional: false,
        })
    }

    pub fn with_adaptive_l(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!("adaptive threshold must lie in (0, 1], got {threshold}")));
        }
        self.adaptive_l_threshold = Some(threshold);
        Ok(self)
    }

    pub fn with_class_conditional(mut self, on: bool) -> Self {
        self.class_conditional = on;
        self
    }

    fn check_donors(&self, donors: usize) -> Result<()> {
        if donors == 0 {
            return Err(Error::NoDonors("sscsp".into()));
        }
        if self.nu > self.l * donors {
            return Err(Error::InvalidParameter(format!(
                "nu={} exceeds l·donors = {}·{donors}",
                self.nu, self.l
            )));
        }
        Ok(())
    }
}

/// Leading eigenvectors of one subject's train−test covariance difference.
#[derive(Debug, Clone)]
pub struct NonstationaryDirections {
    pub subject_id: String,
    pub vectors: OrthonormalBasis,
    /// Signed, ordered by decreasing magnitude.
    pub eigenvalues: Vector,
    /// The difference is numerically zero; the vectors are arbitrary.
    pub degenerate: bool,
}

/// Directions from the session difference of `stats`; `l` is the count, or
/// the cap when `adaptive_l_threshold` is set.
pub fn nonstationary_directions(stats: &SubjectStats, cfg: &SsCspConfig) -> Result<NonstationaryDirections> {
    directions_from(
        &stats.id,
        &stats.train_pooled,
        &stats.test_pooled,
        cfg.class_conditional.then_some((&stats.train, &stats.test)),
        cfg,
    )
}

fn directions_from(
    id: &str,
    train: &SymMatrix,
    test: &SymMatrix,
    classes: Option<(&ClassCovariances, &ClassCovariances)>,
    cfg: &SsCspConfig,
) -> Result<NonstationaryDirections> {
    let dim = train.dim();
    if cfg.l > dim {
        return Err(Error::InvalidParameter(format!("l={} exceeds {dim} channels", cfg.l)));
    }
    let scale = (train.trace() + test.trace()) / (2.0 * dim as f64);
    let (vectors, values) = match classes {
        None => {
            let diff = SymMatrix::symmetrized(train.as_matrix() - test.as_matrix());
            let eig = sym_eig(&diff, EigenOrder::DescendingAbsValue);
            (eig.vectors, eig.values)
        }
        Some((tr, te)) => {
            // Directions that move in either class: eigenvectors of Σ_c D_c²,
            // reported with the root-mean-square class change.
            let mut acc = Matrix::zeros(dim, dim);
            for class in crate::data::ClassLabel::BOTH {
                let d = tr.get(class).as_matrix() - te.get(class).as_matrix();
                acc += &d * &d;
            }
            let eig = sym_eig(&SymMatrix::symmetrized(acc / 2.0), EigenOrder::DescendingValue);
            (eig.vectors, eig.values.map(|v| v.max(0.0).sqrt()))
        }
    };
    let keep = match cfg.adaptive_l_threshold {
        None => cfg.l,
        Some(threshold) => {
            let total: f64 = values.iter().map(|v| v.abs()).sum();
            let mut mass = 0.0;
            let mut keep = cfg.l;
            for (i, v) in values.iter().enumerate().take(cfg.l) {
                mass += v.abs();
                if mass >= threshold * total {
                    keep = i + 1;
                    break;
                }
            }
            keep
        }
    };
    let degenerate = values.iter().map(|v| v.abs()).fold(0.0, f64::max) <= 1e-10 * scale.max(f64::MIN_POSITIVE);
    Ok(NonstationaryDirections {
        subject_id: id.to_owned(),
        vectors: OrthonormalBasis::new_unchecked(vectors.columns(0, keep).into_owned()),
        eigenvalues: values.rows(0, keep).into_owned(),
        degenerate,
    })
}

/// The `nu` principal axes (no centering) of all donors' directions side by side.
pub fn common_nonstationary_subspace(dirs: &[NonstationaryDirections], nu: usize) -> Result<OrthonormalBasis> {
    let Some(first) = dirs.first() else {
        return Err(Error::NoDonors("common non-stationary subspace".into()));
    };
    let dim = first.vectors.ambient_dim();
    let mut cols = Vec::new();
    for d in dirs {
        if d.vectors.ambient_dim() != dim {
            return Err(Error::mismatch(format!("{} directions", d.subject_id), dim, d.vectors.ambient_dim()));
        }
        cols.extend(d.vectors.columns().column_iter().map(|c| c.into_owned()));
    }
    if nu > cols.len() {
        return Err(Error::InvalidParameter(format!("nu={nu} exceeds the {} pooled directions", cols.len())));
    }
    pca_no_mean(&Matrix::from_columns(&cols), nu)
}

/// Same as [`common_nonstationary_subspace`] after deflating each donor's
/// session covariances by the span of its own CSP filters, so that only
/// changes outside the discriminative directions are pooled.
pub fn noise_only_subspace(donors: &[&SubjectStats], cfg: &SsCspConfig, m: usize) -> Result<OrthonormalBasis> {
    cfg.check_donors(donors.len())?;
    let dirs = donors
        .iter()
        .map(|d| noise_only_directions(d, cfg, m))
        .collect::<Result<Vec<_>>>()?;
    common_nonstationary_subspace(&dirs, cfg.nu)
}

/// One donor's directions after removing its CSP span.
pub fn noise_only_directions(stats: &SubjectStats, cfg: &SsCspConfig, m: usize) -> Result<NonstationaryDirections> {
    let span = csp_train(stats.train.class1(), stats.train.class2(), m)?.span()?;
    let train = stats.train_pooled.project_out(&span)?;
    let test = stats.test_pooled.project_out(&span)?;
    let classes = if cfg.class_conditional {
        let deflate = |cc: &ClassCovariances| -> Result<ClassCovariances> {
            ClassCovariances::new(cc.class1().project_out(&span)?, cc.class2().project_out(&span)?)
        };
        Some((deflate(&stats.train)?, deflate(&stats.test)?))
    } else {
        None
    };
    let mut dirs = directions_from(&stats.id, &train, &test, classes.as_ref().map(|(a, b)| (a, b)), cfg)?;
    // Scale the degeneracy test by the undeflated statistics.
    let scale = (stats.train_pooled.trace() + stats.test_pooled.trace()) / (2.0 * train.dim() as f64);
    dirs.degenerate = dirs.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max) <= 1e-10 * scale;
    Ok(dirs)
}

/// Builds the donors' common subspace and trains the target's filters with
/// the penalty `penalty·P·Pᵀ`.
pub fn sscsp_train(target: &SubjectStats, donors: &[&SubjectStats], cfg: &SsCspConfig, m: usize) -> Result<SpatialFilterBank> {
    cfg.check_donors(donors.len())?;
    if donors.iter().any(|d| d.id == target.id) {
        return Err(Error::InvalidParameter(format!("target {} listed among its own donors", target.id)));
    }
    let dirs = donors
        .iter()
        .map(|d| nonstationary_directions(d, cfg))
        .collect::<Result<Vec<_>>>()?;
    let subspace = common_nonstationary_subspace(&dirs, cfg.nu)?;
    sscsp_train_with_subspace(&target.train, &subspace, cfg.penalty, m)
}

/// Penalized CSP against a precomputed subspace.
pub fn sscsp_train_with_subspace(
    target: &ClassCovariances,
    subspace: &OrthonormalBasis,
    penalty: f64,
    m: usize,
) -> Result<SpatialFilterBank> {
    if subspace.ambient_dim() != target.dim() {
        return Err(Error::mismatch("subspace ambient dimension", target.dim(), subspace.ambient_dim()));
    }
    if !(penalty >= 0.0) || !penalty.is_finite() {
        return Err(Error::InvalidParameter(format!("penalty must be finite and ≥ 0, got {penalty}")));
    }
    let p = subspace.columns();
    let delta = SymMatrix::symmetrized(p * p.transpose() * penalty);
    penalized_csp_unchecked(target.class1(), target.class2(), &delta, m)
}

/// Removes the donors' common subspace exactly, then runs mtCSP on every
/// subject (target first) in complement coordinates; returns the target's bank.
pub fn ss_mt_csp_train(
    target: &SubjectStats,
    donors: &[&SubjectStats],
    ss_cfg: &SsCspConfig,
    mt_cfg: &MtCspConfig,
    m: usize,
) -> Result<SpatialFilterBank> {
    ss_cfg.check_donors(donors.len())?;
    let dirs = donors
        .iter()
        .map(|d| nonstationary_directions(d, ss_cfg))
        .collect::<Result<Vec<_>>>()?;
    let subspace = common_nonstationary_subspace(&dirs, ss_cfg.nu)?;
    let donor_covs: Vec<&ClassCovariances> = donors.iter().map(|d| &d.train).collect();
    ss_mt_csp_train_with_subspace(&target.train, &donor_covs, &subspace, mt_cfg, m)
}

/// ss+mt against a precomputed subspace. An empty subspace reduces to plain
/// mtCSP.
pub fn ss_mt_csp_train_with_subspace(
    target: &ClassCovariances,
    donors: &[&ClassCovariances],
    subspace: &OrthonormalBasis,
    mt_cfg: &MtCspConfig,
    m: usize,
) -> Result<SpatialFilterBank> {
    if subspace.ambient_dim() != target.dim() {
        return Err(Error::mismatch("subspace ambient dimension", target.dim(), subspace.ambient_dim()));
    }
    let q = orthonormal_complement(subspace);
    let reduced = std::iter::once(target)
        .chain(donors.iter().copied())
        .map(|cc| cc.congruence(q.columns()))
        .collect::<Result<Vec<_>>>()?;
    let init = reduced
        .iter()
        .map(|cc| csp_train(cc.class1(), cc.class2(), m))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&ClassCovariances> = reduced.iter().collect();
    let init_refs: Vec<&SpatialFilterBank> = init.iter().collect();
    let sol = mtcsp_train(&refs, mt_cfg, m, &init_refs)?;
    let filters = q.columns() * sol.banks[0].filters();
    SpatialFilterBank::from_filters(filters, target.class1(), target.class2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{principal_angle_similarity, random_subspace, standard_normal_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn random_spd(dim: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = standard_normal_matrix(dim, dim + 3, &mut rng);
        SymMatrix::symmetrized(&g * g.transpose() / dim as f64).with_ridge(0.1)
    }

    fn stats(id: &str, c1: SymMatrix, c2: SymMatrix, shift: &Matrix) -> SubjectStats {
        let train = ClassCovariances::new(c1.clone(), c2.clone()).unwrap();
        let test = ClassCovariances::new(
            SymMatrix::symmetrized(c1.as_matrix() + shift),
            SymMatrix::symmetrized(c2.as_matrix() + shift),
        )
        .unwrap();
        let pool = |cc: &ClassCovariances| SymMatrix::symmetrized((cc.class1().as_matrix() + cc.class2().as_matrix()) / 2.0);
        SubjectStats {
            id: id.into(),
            train_pooled: pool(&train),
            test_pooled: pool(&test),
            train,
            test,
        }
    }

    fn directions(train: &[f64], test: &[f64], l: usize) -> NonstationaryDirections {
        let cfg = SsCspConfig::new(l, 1).unwrap();
        directions_from("s", &SymMatrix::from_diagonal(train), &SymMatrix::from_diagonal(test), None, &cfg).unwrap()
    }

    #[test]
    fn diagonal_difference() {
        let d = directions(&[3.0, 1.0], &[1.0, 1.0], 1);
        assert_eq!(d.vectors.columns().column(0), e(2, 0));
        assert!((d.eigenvalues[0] - 2.0).abs() <= 1e-15);
        assert!(!d.degenerate);
    }

    #[test]
    fn negative_change_ranks_by_magnitude() {
        let d = directions(&[1.0, 1.0, 2.0], &[1.5, 5.0, 2.0], 2);
        assert!((d.eigenvalues[0] + 4.0).abs() <= 1e-14);
        assert!((d.eigenvalues[1] + 0.5).abs() <= 1e-14);
    }

    #[test]
    fn stationary_subject_is_flagged() {
        let d = directions(&[2.0, 1.0], &[2.0, 1.0], 2);
        assert!(d.degenerate);
        assert_eq!(d.vectors.dim(), 2);
        OrthonormalBasis::new(d.vectors.columns().clone()).unwrap();
    }

    #[test]
    fn adaptive_l_keeps_enough_mass() {
        let cfg = SsCspConfig::new(4, 1).unwrap().with_adaptive_l(0.8).unwrap();
        let d = directions_from(
            "s",
            &SymMatrix::from_diagonal(&[5.0, 1.5, 1.1, 1.0]),
            &SymMatrix::from_diagonal(&[1.0; 4]),
            None,
            &cfg,
        )
        .unwrap();
        // |λ| = 4, 0.5, 0.1, 0: 4/4.6 ≥ 0.8 after one direction.
        assert_eq!(d.vectors.dim(), 1);
    }

    fn named(vectors: Vec<Vector>) -> NonstationaryDirections {
        let n = vectors.len();
        NonstationaryDirections {
            subject_id: "d".into(),
            vectors: OrthonormalBasis::new(Matrix::from_columns(&vectors)).unwrap(),
            eigenvalues: Vector::from_element(n, 1.0),
            degenerate: false,
        }
    }

    #[test]
    fn unanimous_and_sign_mixed_donors() {
        let same = vec![named(vec![e(3, 0)]), named(vec![e(3, 0)]), named(vec![e(3, 0)])];
        let mixed = vec![named(vec![e(3, 0)]), named(vec![-e(3, 0)]), named(vec![e(3, 0)])];
        let target = OrthonormalBasis::coordinate_axes(3, 0..1).unwrap();
        for dirs in [same, mixed] {
            let got = common_nonstationary_subspace(&dirs, 1).unwrap();
            assert!((principal_angle_similarity(&got, &target).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn subspace_invariant_to_order_and_signs() {
        let dirs: Vec<NonstationaryDirections> = (0..4)
            .map(|s| {
                let b = random_subspace(8, 3, s).unwrap();
                NonstationaryDirections {
                    subject_id: s.to_string(),
                    eigenvalues: Vector::from_vec(vec![3.0, 2.0, 1.0]),
                    vectors: b,
                    degenerate: false,
                }
            })
            .collect();
        let base = common_nonstationary_subspace(&dirs, 4).unwrap();
        let mut shuffled: Vec<NonstationaryDirections> = dirs.iter().rev().cloned().collect();
        let flipped = shuffled[1].vectors.columns() * Matrix::from_diagonal(&Vector::from_vec(vec![-1.0, 1.0, -1.0]));
        shuffled[1].vectors = OrthonormalBasis::new(flipped).unwrap();
        let other = common_nonstationary_subspace(&shuffled, 4).unwrap();
        assert!(principal_angle_similarity(&base, &other).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn too_large_nu_rejected() {
        let dirs = vec![named(vec![e(3, 0)])];
        assert!(common_nonstationary_subspace(&dirs, 2).is_err());
        assert!(common_nonstationary_subspace(&[], 1).is_err());
    }

    fn shift_along(v: &Vector, size: f64) -> Matrix {
        v * v.transpose() * size
    }

    #[test]
    fn filters_avoid_the_penalized_subspace() {
        let dim = 8;
        let target = stats("t", random_spd(dim, 1), random_spd(dim, 2), &Matrix::zeros(dim, dim));
        let sub = random_subspace(dim, 2, 3).unwrap();
        let bank = sscsp_train_with_subspace(&target.train, &sub, DEFAULT_SUBSPACE_PENALTY, 3).unwrap();
        for f in bank.filters().column_iter() {
            for p in sub.columns().column_iter() {
                assert!(f.dot(&p).abs() / f.norm() <= 1e-3);
            }
        }
    }

    #[test]
    fn penalty_outside_discriminative_span_is_inactive() {
        // Classes differ only in the first four channels; penalize channel 7.
        let c1 = SymMatrix::from_diagonal(&[4.0, 3.0, 0.5, 0.4, 1.0, 1.0, 1.0, 1.0]);
        let c2 = SymMatrix::from_diagonal(&[0.5, 0.6, 3.0, 2.0, 1.0, 1.0, 1.0, 1.2]);
        let target = ClassCovariances::new(c1.clone(), c2.clone()).unwrap();
        let sub = OrthonormalBasis::coordinate_axes(8, 6..7).unwrap();
        let ss = sscsp_train_with_subspace(&target, &sub, DEFAULT_SUBSPACE_PENALTY, 2).unwrap();
        let plain = csp_train(&c1, &c2, 2).unwrap();
        for k in 0..4 {
            let (a, b) = (ss.filters().column(k), plain.filters().column(k));
            assert!(a.dot(&b).abs() / (a.norm() * b.norm()) >= 0.999, "filter {k}");
        }
    }

    #[test]
    fn self_transfer_avoids_own_nonstationarity() {
        let dim = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dir = standard_normal_matrix(dim, 1, &mut rng).column(0).normalize();
        let t = stats("t", random_spd(dim, 4), random_spd(dim, 5), &shift_along(&dir, 5.0));
        let copies: Vec<SubjectStats> = (0..3).map(|k| SubjectStats { id: format!("copy{k}"), ..t.clone() }).collect();
        let refs: Vec<&SubjectStats> = copies.iter().collect();
        let bank = sscsp_train(&t, &refs, &SsCspConfig::new(1, 1).unwrap(), 3).unwrap();
        for f in bank.filters().column_iter() {
            assert!(f.dot(&dir).abs() / f.norm() <= 1e-3);
        }
    }

    #[test]
    fn donor_rules() {
        let t = stats("t", random_spd(4, 1), random_spd(4, 2), &Matrix::zeros(4, 4));
        let cfg = SsCspConfig::new(1, 1).unwrap();
        assert!(matches!(sscsp_train(&t, &[], &cfg, 1), Err(Error::NoDonors(_))));
        assert!(sscsp_train(&t, &[&t], &cfg, 1).is_err());
        let d = SubjectStats { id: "d".into(), ..t.clone() };
        assert!(sscsp_train(&t, &[&d], &SsCspConfig::new(1, 2).unwrap(), 1).is_err());
    }

    #[test]
    fn noise_only_flags_nonstationarity_inside_csp_span() {
        // The only change is on channel 0, the strongest discriminative axis.
        let c1 = SymMatrix::from_diagonal(&[5.0, 1.0, 1.0, 1.0, 1.0]);
        let c2 = SymMatrix::from_diagonal(&[0.5, 1.0, 1.0, 1.0, 1.0]);
        let s = stats("d", c1, c2, &shift_along(&e(5, 0), 2.0));
        let d = noise_only_directions(&s, &SsCspConfig::new(2, 1).unwrap(), 1).unwrap();
        assert!(d.degenerate, "{:?}", d.eigenvalues);
    }

    #[test]
    fn noise_only_matches_standard_when_disjoint() {
        let c1 = SymMatrix::from_diagonal(&[5.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let c2 = SymMatrix::from_diagonal(&[0.5, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let donors: Vec<SubjectStats> = (0..3)
            .map(|k| stats(&format!("d{k}"), c1.clone(), c2.clone(), &shift_along(&e(6, 4), 2.0 + k as f64)))
            .collect();
        let refs: Vec<&SubjectStats> = donors.iter().collect();
        let cfg = SsCspConfig::new(1, 1).unwrap();
        let noise = noise_only_subspace(&refs, &cfg, 1).unwrap();
        let dirs: Vec<_> = refs.iter().map(|d| nonstationary_directions(d, &cfg).unwrap()).collect();
        let plain = common_nonstationary_subspace(&dirs, 1).unwrap();
        assert!(principal_angle_similarity(&noise, &plain).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn class_conditional_finds_class_specific_change() {
        let dim = 5;
        let c1 = random_spd(dim, 11);
        let c2 = random_spd(dim, 12);
        let train = ClassCovariances::new(c1.clone(), c2.clone()).unwrap();
        // Class 1 gains power on channel 2, class 2 loses the same amount, so
        // the pooled difference vanishes.
        let bump = shift_along(&e(dim, 2), 0.05);
        let test = ClassCovariances::new(
            SymMatrix::symmetrized(c1.as_matrix() + &bump),
            SymMatrix::symmetrized(c2.as_matrix() - &bump),
        )
        .unwrap();
        let pooled = SymMatrix::symmetrized((c1.as_matrix() + c2.as_matrix()) / 2.0);
        let s = SubjectStats {
            id: "s".into(),
            train,
            test,
            train_pooled: pooled.clone(),
            test_pooled: pooled,
        };
        let cfg = SsCspConfig::new(1, 1).unwrap();
        assert!(nonstationary_directions(&s, &cfg).unwrap().degenerate);
        let cc = nonstationary_directions(&s, &cfg.with_class_conditional(true)).unwrap();
        assert!((cc.vectors.columns()[(2, 0)].abs() - 1.0).abs() <= 1e-12);
        assert!((cc.eigenvalues[0] - 0.05).abs() <= 1e-12);
    }

    #[test]
    fn ss_mt_filters_lie_in_complement() {
        let dim = 6;
        let subs: Vec<ClassCovariances> = (0..3)
            .map(|k| ClassCovariances::new(random_spd(dim, 20 + k), random_spd(dim, 40 + k)).unwrap())
            .collect();
        let sub = random_subspace(dim, 2, 7).unwrap();
        let cfg = MtCspConfig::new(1.0, 1.0).unwrap();
        let bank = ss_mt_csp_train_with_subspace(&subs[0], &[&subs[1], &subs[2]], &sub, &cfg, 2).unwrap();
        let residual = (sub.columns().transpose() * bank.filters()).amax();
        assert!(residual <= 1e-12, "{residual}");
    }

    #[test]
    fn ss_mt_without_subspace_is_mtcsp() {
        let dim = 5;
        let subs: Vec<ClassCovariances> = (0..2)
            .map(|k| ClassCovariances::new(random_spd(dim, 60 + k), random_spd(dim, 70 + k)).unwrap())
            .collect();
        let cfg = MtCspConfig::new(0.5, 2.0).unwrap();
        let composed = ss_mt_csp_train_with_subspace(&subs[0], &[&subs[1]], &OrthonormalBasis::empty(dim), &cfg, 1).unwrap();
        let init: Vec<SpatialFilterBank> = subs.iter().map(|s| csp_train(s.class1(), s.class2(), 1).unwrap()).collect();
        let direct = mtcsp_train(&[&subs[0], &subs[1]], &cfg, 1, &[&init[0], &init[1]]).unwrap();
        for k in 0..2 {
            let (a, b) = (composed.filters().column(k), direct.banks[0].filters().column(k));
            assert!(a.dot(&b).abs() / (a.norm() * b.norm()) >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn ss_mt_specific_limit_matches_sscsp_direction() {
        let dim = 6;
        let subs: Vec<ClassCovariances> = (0..3)
            .map(|k| ClassCovariances::new(random_spd(dim, 80 + k), random_spd(dim, 90 + k)).unwrap())
            .collect();
        let sub = random_subspace(dim, 1, 5).unwrap();
        let cfg = MtCspConfig::new(1e4, 1e-4).unwrap();
        let composed = ss_mt_csp_train_with_subspace(&subs[0], &[&subs[1], &subs[2]], &sub, &cfg, 2).unwrap();
        let ss = sscsp_train_with_subspace(&subs[0], &sub, DEFAULT_SUBSPACE_PENALTY, 2).unwrap();
        for k in 0..4 {
            let (a, b) = (composed.filters().column(k), ss.filters().column(k));
            assert!(a.dot(&b).abs() / (a.norm() * b.norm()) >= 0.99, "filter {k}");
        }
    }
}
