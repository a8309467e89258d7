//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). The process exits 0 even when
//! criteria fail so that the report is always produced; set
//! `ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit.
//! `ACCEPTANCE_REPS` overrides the toy repetition count (default 50); values
//! below 50 are reported as failing the toy criteria.

use std::time::{Duration, Instant};

use csp_transfer::data::{save_dataset, ClassCovariances};
use csp_transfer::harness::{
    error_quantiles, run_pipeline, run_real_experiment, run_toy_experiment, ExperimentConfig, Method, MethodSpec, Params,
    ResultTable, ToyStudy, Workspace,
};
use csp_transfer::metrics::{paired_permutation_test, symmetric_kl};
use csp_transfer::numerics::{
    gen_sym_eig, principal_angle_similarity, random_subspace, standard_normal_matrix, Matrix, OrthonormalBasis,
    SymMatrix, Vector,
};
use csp_transfer::toygen::{gen_population, PerturbTarget, PopulationSpec, ToySpec, DEFAULT_ETA_GRID};
use csp_transfer::transfer::{
    common_nonstationary_subspace, noise_only_subspace, nonstationary_directions, sscsp_train_with_subspace,
    SsCspConfig, SubjectStats,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// Pinned tolerances.
const MIN_TOY_REPS: usize = 50;
const TOY_RUNTIME_BUDGET: Duration = Duration::from_secs(30 * 60);
const CHANCE_FLOOR: f64 = 0.40;
const SS_SLACK_AT_MAX: f64 = 0.02;
const SS_MARGIN_B: f64 = 0.03;
const EIG_TOL: f64 = 1e-8;
const EIG_RUNTIME: Duration = Duration::from_secs(5);
const PENALTY_COS_TOL: f64 = 1e-3;
const KL_EXACT_TOL: f64 = 1e-12;
const KL_MC_REL_TOL: f64 = 0.02;
const KL_MC_SAMPLES: usize = 1_000_000;
const SIM_EXACT_TOL: f64 = 1e-12;
const SIM_ORACLE_TOL: f64 = 1e-6;
const SUBSPACE_SIM_MIN: f64 = 0.85;
const NOISE_ONLY_SIM_GAP: f64 = 0.1;
const NOISE_ONLY_ACC_GAP: f64 = 0.02;

/// Even decades of the default mtCSP grid; the full 81-point grid is
/// about 2.5× slower per repetition and does not fit a desk-scale run.
const ACCEPTANCE_PENALTIES: [f64; 5] = [1e-4, 1e-2, 1.0, 1e2, 1e4];
const TOY_SEED: u64 = 20_100;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

struct Checks(Vec<(String, bool)>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn add(&mut self, label: impl Into<String>, ok: bool) {
        self.0.push((label.into(), ok));
    }

    fn pass(&self) -> bool {
        self.0.iter().all(|(_, ok)| *ok)
    }

    fn detail(&self) -> String {
        self.0
            .iter()
            .map(|(l, ok)| format!("{}{l}", if *ok { "" } else { "✗ " }))
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn outcome(self, id: &'static str, title: &'static str) -> Outcome {
        Outcome {
            id,
            title,
            pass: self.pass(),
            detail: self.detail(),
        }
    }
}

fn random_spd(dim: usize, rng: &mut ChaCha8Rng, floor: f64) -> SymMatrix {
    let g = standard_normal_matrix(dim, dim + 2, rng);
    SymMatrix::symmetrized(&g * g.transpose() / dim as f64).with_ridge(floor)
}

// ---------------------------------------------------------------- toy study

struct ToyRun {
    medians: Vec<(Method, f64)>,
}

impl ToyRun {
    fn median(&self, m: Method) -> f64 {
        self.medians.iter().find(|(x, _)| *x == m).map(|p| p.1).expect("method was run")
    }
}

fn toy_run(perturb: PerturbTarget, eta: f64, methods: &[Method], reps: usize) -> ToyRun {
    let mut toy = ToyStudy::new(perturb);
    toy.eta = vec![eta];
    let methods = methods
        .iter()
        .map(|&m| {
            let mut s = MethodSpec::new(m);
            if m == Method::MtCsp {
                s.global_penalties = ACCEPTANCE_PENALTIES.to_vec();
                s.specific_penalties = ACCEPTANCE_PENALTIES.to_vec();
            }
            s
        })
        .collect();
    let cfg = ExperimentConfig {
        dataset: None,
        toy: Some(toy),
        methods,
        m: 3,
        repetitions: reps,
        seed: TOY_SEED,
        output: None,
    };
    let started = Instant::now();
    let table = run_toy_experiment(&cfg).expect("toy experiment runs");
    let medians: Vec<(Method, f64)> = error_quantiles(&table).into_iter().map(|q| (q.method, q.median)).collect();
    let shown: Vec<String> = medians.iter().map(|(m, v)| format!("{m}={v:.3}")).collect();
    eprintln!(
        "  toy {perturb} eta={eta}: {} ({:.0?})",
        shown.join(" "),
        started.elapsed()
    );
    ToyRun { medians }
}

fn toy_criteria(reps: usize) -> Vec<Outcome> {
    use Method::*;
    let started = Instant::now();
    let max_eta = DEFAULT_ETA_GRID[DEFAULT_ETA_GRID.len() - 1];

    // At η = 0 every perturbation target yields the same population, so the
    // three scenarios share this run (scenario C is η-independent).
    let base = toy_run(PerturbTarget::None, 0.0, &[Csp, CovCsp, MtCsp, SsCsp, SsMtCsp], reps);
    let a_max = toy_run(PerturbTarget::A, max_eta, &[Csp, CovCsp, MtCsp, SsCsp], reps);
    let mut b_runs = Vec::new();
    for &eta in &DEFAULT_ETA_GRID[1..] {
        let methods: &[Method] = if eta == max_eta { &[Csp, CovCsp, MtCsp, SsCsp] } else { &[Csp, CovCsp, MtCsp] };
        b_runs.push((eta, toy_run(PerturbTarget::B, eta, methods, reps)));
    }
    let elapsed = started.elapsed();
    let b_max = &b_runs.last().expect("grid has a nonzero eta").1;
    let enough = reps >= MIN_TOY_REPS;

    let mut c1 = Checks::new();
    c1.add(format!("reps={reps}"), enough);
    for m in [CovCsp, MtCsp] {
        c1.add(
            format!("eta=0 {m} {:.3} ≤ csp {:.3}", base.median(m), base.median(Csp)),
            base.median(m) <= base.median(Csp),
        );
    }
    for m in [CovCsp, MtCsp] {
        c1.add(format!("eta={max_eta} {m} {:.3} ≥ {CHANCE_FLOOR}", a_max.median(m)), a_max.median(m) >= CHANCE_FLOOR);
    }
    c1.add(
        format!("eta={max_eta} sscsp {:.3} ≤ csp {:.3}+{SS_SLACK_AT_MAX}", a_max.median(SsCsp), a_max.median(Csp)),
        a_max.median(SsCsp) <= a_max.median(Csp) + SS_SLACK_AT_MAX,
    );
    c1.add(
        format!("eta=0 sscsp {:.3} < csp {:.3}", base.median(SsCsp), base.median(Csp)),
        base.median(SsCsp) < base.median(Csp),
    );
    c1.add(
        format!("toy runtime {:.1} min ≤ 30", elapsed.as_secs_f64() / 60.0),
        elapsed <= TOY_RUNTIME_BUDGET,
    );

    let mut c2 = Checks::new();
    c2.add(format!("reps={reps}"), enough);
    c2.add(
        format!("eta=0 sscsp {:.3} < csp {:.3}−{SS_MARGIN_B}", base.median(SsCsp), base.median(Csp)),
        base.median(SsCsp) < base.median(Csp) - SS_MARGIN_B,
    );
    c2.add(
        format!("eta={max_eta} |sscsp {:.3} − csp {:.3}| ≤ {SS_MARGIN_B}", b_max.median(SsCsp), b_max.median(Csp)),
        (b_max.median(SsCsp) - b_max.median(Csp)).abs() <= SS_MARGIN_B,
    );
    let all_b: Vec<(f64, &ToyRun)> = std::iter::once((0.0, &base)).chain(b_runs.iter().map(|(e, r)| (*e, r))).collect();
    for m in [CovCsp, MtCsp] {
        let worst = all_b
            .iter()
            .map(|(eta, r)| (*eta, r.median(m) - r.median(Csp)))
            .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        c2.add(format!("{m} − csp ≤ 0 for all eta (worst {:+.3} at eta={})", worst.1, worst.0), worst.1 <= 0.0);
    }

    let mut c3 = Checks::new();
    c3.add(format!("reps={reps}"), enough);
    let floor = [Csp, CovCsp, MtCsp].iter().map(|&m| base.median(m)).fold(f64::INFINITY, f64::min);
    for m in [SsCsp, SsMtCsp] {
        c3.add(format!("{m} {:.3} ≤ min(csp, covcsp, mtcsp) {floor:.3}", base.median(m)), base.median(m) <= floor);
    }

    vec![
        c1.outcome("1", "toy scenario A (A perturbed, B common)"),
        c2.outcome("2", "toy scenario B (B perturbed, A common)"),
        c3.outcome("3", "toy scenario C (both common)"),
    ]
}

// ------------------------------------------------------------ oracle suites

fn criterion_eigensolver() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..200 {
        let a = random_spd(5, &mut rng, 0.1);
        let b = random_spd(5, &mut rng, 0.1);
        let ours = gen_sym_eig(&a, &b).expect("SPD pair");
        let binv = b.as_matrix().clone().try_inverse().expect("SPD is invertible");
        let brute = (binv * a.as_matrix()).complex_eigenvalues();
        let mut reference: Vec<f64> = brute.iter().map(|z| z.re).collect();
        reference.sort_by(|x, y| y.total_cmp(x));
        if brute.iter().any(|z| z.im.abs() > EIG_TOL) {
            failures += 1;
        }
        for (x, y) in ours.values.iter().zip(&reference) {
            let err = (x - y).abs() / y.abs().max(1.0);
            worst = worst.max(err);
        }
    }
    let elapsed = started.elapsed();
    let mut c = Checks::new();
    c.add(format!("max scaled error {worst:.1e} ≤ {EIG_TOL:.0e}"), worst <= EIG_TOL);
    c.add(format!("{failures} complex spectra"), failures == 0);
    c.add(format!("runtime {elapsed:.2?} < 5 s"), elapsed < EIG_RUNTIME);
    c.outcome("4", "generalized eigensolver vs eig(B⁻¹A)")
}

fn criterion_penalty_orthogonality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let dim = 6 + (k % 5) as usize;
        let nu = 1 + (k % 3) as usize;
        let cov = ClassCovariances::new(random_spd(dim, &mut rng, 0.05), random_spd(dim, &mut rng, 0.05))
            .expect("matching shapes");
        let sub = random_subspace(dim, nu, 1000 + k).expect("valid dims");
        let bank = sscsp_train_with_subspace(&cov, &sub, 1e5, 2).expect("penalized CSP");
        for w in bank.filters().column_iter() {
            let cos = (sub.columns().transpose() * w).norm() / w.norm();
            worst = worst.max(cos);
        }
    }
    let mut c = Checks::new();
    c.add(format!("max |cos| {worst:.1e} ≤ {PENALTY_COS_TOL:.0e}"), worst <= PENALTY_COS_TOL);
    c.outcome("5", "ssCSP filters avoid the penalized subspace")
}

/// `KL(N(0,P) ‖ N(0,Q))` by sampling from `P`: the log-determinant term is
/// exact, the quadratic term `E[xᵀ(Q⁻¹ − P⁻¹)x]` is the sample mean.
fn monte_carlo_kl(p: &SymMatrix, q: &SymMatrix, rng: &mut ChaCha8Rng) -> f64 {
    let chol = p.as_matrix().clone().cholesky().expect("SPD");
    let l = chol.l();
    let pinv = chol.inverse();
    let qinv = q.as_matrix().clone().try_inverse().expect("SPD");
    let m = qinv - pinv;
    let logdet = |s: &Matrix| s.clone().cholesky().expect("SPD").l().diagonal().map(|d| d.ln()).sum() * 2.0;
    let d = p.dim();
    let mut z = vec![0.0; d];
    let mut x = vec![0.0; d];
    let mut acc = 0.0;
    for _ in 0..KL_MC_SAMPLES {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        for i in 0..d {
            x[i] = (0..=i).map(|j| l[(i, j)] * z[j]).sum();
        }
        let mut quad = 0.0;
        for i in 0..d {
            for j in 0..d {
                quad += x[i] * m[(i, j)] * x[j];
            }
        }
        acc += quad;
    }
    0.5 * (logdet(q.as_matrix()) - logdet(p.as_matrix())) + 0.5 * acc / KL_MC_SAMPLES as f64
}

fn criterion_symmetric_kl() -> Outcome {
    let mut c = Checks::new();
    let fixed = symmetric_kl(&SymMatrix::from_diagonal(&[2.0, 1.0]), &SymMatrix::identity(2)).expect("valid");
    c.add(format!("diag(2,1) vs I = {fixed:.15}"), (fixed - 0.25).abs() <= KL_EXACT_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = random_spd(4, &mut rng, 0.2);
        let q = random_spd(4, &mut rng, 0.2);
        let exact = symmetric_kl(&p, &q).expect("valid");
        let mc = monte_carlo_kl(&p, &q, &mut rng) + monte_carlo_kl(&q, &p, &mut rng);
        worst = worst.max((exact - mc).abs() / exact);
    }
    c.add(format!("50 pairs, max relative MC gap {:.2}% ≤ 2%", worst * 100.0), worst <= KL_MC_REL_TOL);
    c.outcome("6", "symmetric KL divergence")
}

/// Maximizes a smooth function of an angle on `[0, π)` by a dense scan
/// followed by golden-section refinement around the best sample.
fn maximize_angle(f: impl Fn(f64) -> f64) -> f64 {
    const SCAN: usize = 4000;
    let step = std::f64::consts::PI / SCAN as f64;
    let best = (0..SCAN).map(|k| k as f64 * step).max_by(|a, b| f(*a).total_cmp(&f(*b))).expect("nonempty");
    let (mut lo, mut hi) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    (lo + hi) / 2.0
}

fn unit(v: Vector) -> Vector {
    let n = v.norm();
    v / n
}

/// Principal-angle similarity in 3-D from the recursive definition: the
/// first pair maximizes `uᵀv` over unit vectors of each subspace, each
/// later pair does the same orthogonally to the earlier ones.
fn recursive_similarity(u: &Matrix, v: &Matrix) -> f64 {
    let (u, v) = if u.ncols() <= v.ncols() { (u, v) } else { (v, u) };
    let proj = |x: &Vector| v * (v.transpose() * x);
    let col = |m: &Matrix, j: usize| m.column(j).into_owned();
    let u1 = if u.ncols() == 1 {
        col(u, 0)
    } else {
        let at = |a: f64| u.column(0) * a.cos() + u.column(1) * a.sin();
        at(maximize_angle(|a| proj(&at(a)).norm_squared()))
    };
    let p1 = proj(&u1);
    let cos1 = p1.norm();
    if u.ncols() == 1 {
        return cos1 * cos1;
    }
    // Both are planes in 3-D, so each later vector is fixed up to sign:
    // the in-plane direction orthogonal to the first one.
    let u2 = unit(cross3(&u1, &cross3(&col(u, 0), &col(u, 1))));
    let v2 = unit(cross3(&unit(p1), &cross3(&col(v, 0), &col(v, 1))));
    let cos2 = u2.dot(&v2).abs();
    (cos1 * cos1 + cos2 * cos2) / 2.0
}

fn cross3(a: &Vector, b: &Vector) -> Vector {
    Vector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

fn criterion_principal_angles() -> Outcome {
    let mut c = Checks::new();
    let s = random_subspace(5, 2, 70).expect("valid");
    let same = principal_angle_similarity(&s, &s).expect("valid");
    c.add(format!("identical {same:.15}"), (same - 1.0).abs() <= SIM_EXACT_TOL);
    let e = |axes| OrthonormalBasis::coordinate_axes(5, axes).expect("valid axes");
    let orth = principal_angle_similarity(&e(0..2), &e(2..5)).expect("valid");
    c.add(format!("orthogonal {orth:.1e}"), orth.abs() <= SIM_EXACT_TOL);
    let dims = [(1, 1), (1, 2), (2, 1), (2, 2)];
    let mut worst = 0.0f64;
    for k in 0..20u64 {
        let (p, q) = dims[k as usize % dims.len()];
        let a = random_subspace(3, p, 700 + 2 * k).expect("valid");
        let b = random_subspace(3, q, 701 + 2 * k).expect("valid");
        let ours = principal_angle_similarity(&a, &b).expect("valid");
        let oracle = recursive_similarity(a.columns(), b.columns());
        worst = worst.max((ours - oracle).abs());
    }
    c.add(format!("20 3-D instances vs recursive oracle, max gap {worst:.1e}"), worst <= SIM_ORACLE_TOL);
    c.outcome("7", "principal-angle similarity")
}

/// p-value by recursive enumeration of every sign pattern.
fn brute_force_p(d: &[f64]) -> f64 {
    fn walk(d: &[f64], i: usize, sum: f64, observed: f64, slack: f64, hits: &mut usize) {
        if i == d.len() {
            if sum / d.len() as f64 >= observed - slack {
                *hits += 1;
            }
            return;
        }
        walk(d, i + 1, sum + d[i], observed, slack, hits);
        walk(d, i + 1, sum - d[i], observed, slack, hits);
    }
    let observed = d.iter().sum::<f64>() / d.len() as f64;
    let slack = 1e-9 * d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut hits = 0;
    walk(d, 0, 0.0, observed, slack, &mut hits);
    hits as f64 / (1u64 << d.len()) as f64
}

fn criterion_permutation_test() -> Outcome {
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0;
    let mut cases = 0;
    for n in 1..=10usize {
        for trial in 0..10 {
            // Odd trials use small integer scores, where ties are exact.
            let mut draw = || -> f64 {
                let x: f64 = StandardNormal.sample(&mut rng);
                if trial % 2 == 0 { x } else { (2.0 * x).round() }
            };
            let a: Vec<f64> = (0..n).map(|_| draw()).collect();
            let b: Vec<f64> = (0..n).map(|_| draw()).collect();
            let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            let ours = paired_permutation_test(&a, &b).expect("valid input");
            cases += 1;
            if !ours.exhaustive || ours.p_value != brute_force_p(&d) {
                mismatches += 1;
            }
        }
    }
    c.add(format!("{cases} cases n ≤ 10, {mismatches} mismatches"), mismatches == 0);
    let zero = paired_permutation_test(&[0.7; 6], &[0.7; 6]).expect("valid").p_value;
    c.add(format!("zero differences p={zero}"), zero == 1.0);
    let one = paired_permutation_test(&[0.9], &[0.6]).expect("valid").p_value;
    c.add(format!("n=1 positive p={one}"), one == 0.5);
    c.outcome("8", "paired permutation test")
}

fn criterion_subspace_transfer() -> Outcome {
    let spec = ToySpec::default();
    let cfg = SsCspConfig::new(5, 5).expect("valid");
    let mut c = Checks::new();
    let mut sims = Vec::new();
    let mut acc_standard = Vec::new();
    let mut acc_noise = Vec::new();
    for rep in 0..20u64 {
        let (records, truth) =
            gen_population(&spec, &PopulationSpec::new(5, 1.0, PerturbTarget::A, 9_000 + rep)).expect("population");
        let ws = Workspace::new(&records, 3).expect("workspace");
        let donors: Vec<&SubjectStats> = (1..5).map(|i| ws.stats(i)).collect();
        let dirs: Vec<_> = donors.iter().map(|d| nonstationary_directions(d, &cfg).expect("directions")).collect();
        let standard = common_nonstationary_subspace(&dirs, cfg.nu).expect("subspace");
        let noise = noise_only_subspace(&donors, &cfg, 3).expect("subspace");
        let truth_span = truth.nonstationary_span(0);
        sims.push((
            principal_angle_similarity(&standard, &truth_span).expect("valid"),
            principal_angle_similarity(&noise, &truth_span).expect("valid"),
        ));
        let params = Params::Subspace { l: 5, nu: 5 };
        let run = |m| run_pipeline(&ws, m, 0, &[1, 2, 3, 4], params).expect("pipeline");
        acc_standard.push(run(Method::SsCsp).test_accuracy);
        acc_noise.push(run(Method::SsCspNoiseOnly).test_accuracy);
    }
    let (standard, noise) = sims[0];
    c.add(format!("similarity {standard:.3} ≥ {SUBSPACE_SIM_MIN}"), standard >= SUBSPACE_SIM_MIN);
    c.add(
        format!("noise-only similarity {noise:.3}, gap {:.3} ≤ {NOISE_ONLY_SIM_GAP}", (standard - noise).abs()),
        (standard - noise).abs() <= NOISE_ONLY_SIM_GAP,
    );
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let gap = (mean(&acc_standard) - mean(&acc_noise)).abs();
    c.add(
        format!(
            "mean accuracy over 20 populations {:.3} vs {:.3}, gap {gap:.3} ≤ {NOISE_ONLY_ACC_GAP}",
            mean(&acc_standard),
            mean(&acc_noise)
        ),
        gap <= NOISE_ONLY_ACC_GAP,
    );
    let min_sim = sims.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    c.add(format!("(info) min similarity over populations {min_sim:.3}"), true);
    c.outcome("9", "subspace-transfer fidelity")
}

fn small_toy() -> ToyStudy {
    let mut toy = ToyStudy::new(PerturbTarget::Both);
    toy.spec = ToySpec {
        d_dis: 2,
        d_ndis: 8,
        d_stat: 8,
        d_nstat: 2,
        trials_per_class: 20,
        samples_per_trial: 40,
        ..ToySpec::default()
    };
    toy.n_subjects = 4;
    toy.eta = vec![0.0, 1.0];
    toy
}

fn small_methods() -> Vec<MethodSpec> {
    Method::ALL
        .iter()
        .map(|&m| {
            let mut s = MethodSpec::new(m);
            s.lambdas = vec![0.0, 0.5, 1.0];
            s.global_penalties = vec![1e-2, 1e2];
            s.specific_penalties = vec![1.0];
            s.subspace_dims = vec![1, 2];
            s.subspace_counts = vec![1, 2];
            s
        })
        .collect()
}

fn criterion_determinism() -> Outcome {
    let mut c = Checks::new();
    let toy_cfg = ExperimentConfig {
        dataset: None,
        toy: Some(small_toy()),
        methods: small_methods(),
        m: 1,
        repetitions: 2,
        seed: 10,
        output: None,
    };
    let run = |cfg: &ExperimentConfig, real: bool| -> String {
        let t: ResultTable = if real { run_real_experiment(cfg) } else { run_toy_experiment(cfg) }.expect("runs");
        t.to_csv_string().expect("csv")
    };
    let first = run(&toy_cfg, false);
    c.add(format!("toy rerun identical ({} bytes)", first.len()), first == run(&toy_cfg, false));

    let dir = tempfile::tempdir().expect("tempdir");
    let toy = small_toy();
    let (records, _) =
        gen_population(&toy.spec, &PopulationSpec::new(4, 0.5, PerturbTarget::Both, 11)).expect("population");
    save_dataset(&records, dir.path()).expect("save");
    let real_cfg = ExperimentConfig {
        dataset: Some(dir.path().to_path_buf()),
        toy: None,
        ..toy_cfg
    };
    let first = run(&real_cfg, true);
    c.add(format!("dataset rerun identical ({} bytes)", first.len()), first == run(&real_cfg, true));
    c.outcome("10", "byte-identical reruns")
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; none apply.
    let reps = std::env::var("ACCEPTANCE_REPS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(MIN_TOY_REPS);
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");

    let started = Instant::now();
    let mut outcomes = Vec::new();
    let quick: [fn() -> Outcome; 7] = [
        criterion_eigensolver,
        criterion_penalty_orthogonality,
        criterion_symmetric_kl,
        criterion_principal_angles,
        criterion_permutation_test,
        criterion_subspace_transfer,
        criterion_determinism,
    ];
    for f in quick {
        let o = f();
        eprintln!("  criterion {} done ({:.0?})", o.id, started.elapsed());
        outcomes.push(o);
    }
    eprintln!("  toy study: {reps} repetitions per setting");
    outcomes.extend(toy_criteria(reps));
    outcomes.sort_by_key(|o| o.id.parse::<u32>().expect("numeric id"));

    println!("\nacceptance ({:.1} min)", started.elapsed().as_secs_f64() / 60.0);
    for o in &outcomes {
        println!("{} [{:>2}] {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.title, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
