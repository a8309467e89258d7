//! Multi-task CSP: every subject's filter is a shared part plus a
//! subject-specific part, `wᵢ = w₀ + vᵢ`, and the sum of regularized
//! Rayleigh quotients
//!
//! ```text
//! F = Σᵢ wᵢᵀΣᵢ,c wᵢ / (wᵢᵀ(Σᵢ,₁ + Σᵢ,₂)wᵢ + λ₁‖w₀‖² + λ₂‖vᵢ‖²)
//! ```
//!
//! is maximized over `x = (w₀, v₁, …, vₙ)` by damped Newton. `F` is invariant
//! to the scale of `x`, so iterates live on the unit sphere. Filters after
//! the first of each class are kept conjugate to the earlier ones,
//! `wᵢᵀΣᵢ,c wᵢ,ₖ = 0`.

use nalgebra::LU;

use crate::csp::SpatialFilterBank;
use crate::data::{ClassCovariances, ClassLabel};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SymMatrix, Vector};

/// Newton parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MtCspSolver {
    /// Newton steps in all of `(w₀, v₁, …, vₙ)` at once.
    #[default]
    Joint,
    /// Newton steps on `w₀`, then on each `vᵢ`, in turn.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MtCspConfig {
    /// λ₁, the weight of `‖w₀‖²`. Large values suppress the shared part.
    pub global_penalty: f64,
    /// λ₂, the weight of `‖vᵢ‖²`. Large values suppress the specific parts.
    pub specific_penalty: f64,
    pub max_iterations: usize,
    pub objective_tolerance: f64,
    pub solver: MtCspSolver,
}

impl MtCspConfig {
    pub fn new(global_penalty: f64, specific_penalty: f64) -> Result<Self> {
        for (name, v) in [("global", global_penalty), ("specific", specific_penalty)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} penalty must be positive and finite, got {v}")));
            }
        }
        Ok(MtCspConfig {
            global_penalty,
            specific_penalty,
            max_iterations: 200,
            objective_tolerance: 1e-8,
            solver: MtCspSolver::Joint,
        })
    }

    pub fn with_solver(mut self, solver: MtCspSolver) -> Self {
        self.solver = solver;
        self
    }
}

/// Result of [`mtcsp_train`]. Column `k` of `global` and of each
/// `specific[i]` are the parts of filter `k` of subject `i`; the banks hold
/// the normalized sums.
#[derive(Debug, Clone)]
pub struct MtCspSolution {
    pub global: Matrix,
    pub specific: Vec<Matrix>,
    pub banks: Vec<SpatialFilterBank>,
    /// Objective after initialization and after every accepted iteration,
    /// one trace per extracted filter.
    pub objective_traces: Vec<Vec<f64>>,
}

/// Trains `m` filters per class for every subject. `init[i]` seeds subject
/// `i` (its own CSP bank in the usual setup).
pub fn mtcsp_train(
    subjects: &[&ClassCovariances],
    cfg: &MtCspConfig,
    m: usize,
    init: &[&SpatialFilterBank],
) -> Result<MtCspSolution> {
    let n = subjects.len();
    if n == 0 {
        return Err(Error::InvalidParameter("mtCSP needs at least one subject".into()));
    }
    if init.len() != n {
        return Err(Error::mismatch("initial filter banks", n, init.len()));
    }
    let dim = subjects[0].dim();
    if m == 0 || 2 * m > dim {
        return Err(Error::InvalidParameter(format!("{m} filters per class need 1 ≤ 2m ≤ {dim} channels")));
    }
    for (i, s) in subjects.iter().enumerate() {
        if s.dim() != dim {
            return Err(Error::mismatch(format!("subject {i} channels"), dim, s.dim()));
        }
        if init[i].channels() != dim || init[i].filters_per_class() < m {
            return Err(Error::mismatch(format!("subject {i} initial filters"), 2 * m, init[i].filters().ncols()));
        }
    }
    let denominators: Vec<SymMatrix> = subjects.iter().map(|s| s.sum()).collect();
    let mut global = Matrix::zeros(dim, 2 * m);
    let mut specific = vec![Matrix::zeros(dim, 2 * m); n];
    let mut traces = Vec::with_capacity(2 * m);

    for (class_slot, class) in ClassLabel::BOTH.into_iter().enumerate() {
        let problem = Problem {
            numerators: subjects.iter().map(|s| s.get(class)).collect(),
            denominators: &denominators,
            global_penalty: cfg.global_penalty,
            specific_penalty: cfg.specific_penalty,
            dim,
        };
        let mut extracted: Vec<Vec<Vector>> = vec![Vec::new(); n];
        for k in 0..m {
            let col = class_slot * m + k;
            let seeds: Vec<Vector> = init
                .iter()
                .enumerate()
                .map(|(i, b)| conjugate_seed(b.filters().column(col).into_owned(), problem.numerators[i], &extracted[i]))
                .collect();
            let constraints = Constraints::new(&problem, &extracted, k)?;
            let (x, trace) = problem
                .maximize(&seeds, &constraints, cfg)
                .map_err(|e| e.context(format!("mtCSP filter {k} of class {class}")))?;
            global.set_column(col, &problem.w0(&x));
            for i in 0..n {
                let v = problem.v(&x, i);
                specific[i].set_column(col, &v);
                extracted[i].push(problem.w0(&x) + v);
            }
            traces.push(trace);
        }
    }

    let banks = (0..n)
        .map(|i| {
            let w = &global + &specific[i];
            SpatialFilterBank::from_filters(w, subjects[i].class1(), subjects[i].class2())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MtCspSolution {
        global,
        specific,
        banks,
        objective_traces: traces,
    })
}

/// Ratio `‖w₀‖ / minᵢ‖vᵢ‖` below which per-subject scales are treated as gauge.
const GAUGE_RATIO: f64 = 1e-2;

/// Removes from `seed` its components along the earlier filters in the
/// `Σ_c` inner product, so that `w = seed` already meets the conjugacy
/// rows. The earlier filters are mutually conjugate, so one pass suffices.
fn conjugate_seed(mut seed: Vector, numerator: &SymMatrix, earlier: &[Vector]) -> Vector {
    for w in earlier {
        let sw = numerator.as_matrix() * w;
        let norm = w.dot(&sw);
        if norm > 0.0 {
            seed -= w * (sw.dot(&seed) / norm);
        }
    }
    seed
}

struct Problem<'a> {
    numerators: Vec<&'a SymMatrix>,
    denominators: &'a [SymMatrix],
    global_penalty: f64,
    specific_penalty: f64,
    dim: usize,
}

/// Value, gradient and arrowhead Hessian of `F`. `cross[i]` is the
/// `(vᵢ, w₀)` block and `diag[i]` the `(vᵢ, vᵢ)` block.
struct Derivatives {
    value: f64,
    grad: Vector,
    a0: Matrix,
    cross: Vec<Matrix>,
    diag: Vec<Matrix>,
}

/// Orthonormalized conjugacy rows (as columns of `basis`) plus the raw
/// unit-norm rows needed for the Hessian shift.
struct Constraints {
    /// `(subject, â)`: row `â` on the `w₀` and `vᵢ` blocks, `‖row‖ = 1`.
    rows: Vec<(usize, Vector)>,
    basis: Matrix,
}

impl Constraints {
    fn new(problem: &Problem<'_>, extracted: &[Vec<Vector>], filter: usize) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, earlier) in extracted.iter().enumerate() {
            for w in earlier {
                let a = problem.numerators[i].as_matrix() * w;
                let norm = a.norm();
                if !(norm > 0.0) || !norm.is_finite() {
                    return Err(Error::ConstraintRankLoss {
                        filter,
                        rank: rows.len(),
                        expected: problem.n() * filter,
                    });
                }
                rows.push((i, a / (norm * std::f64::consts::SQRT_2)));
            }
        }
        let len = problem.len();
        let mut full = Matrix::zeros(len, rows.len());
        for (j, (i, a)) in rows.iter().enumerate() {
            full.view_mut((0, j), (problem.dim, 1)).copy_from(a);
            full.view_mut(((i + 1) * problem.dim, j), (problem.dim, 1)).copy_from(a);
        }
        let basis = if rows.is_empty() {
            full
        } else {
            let qr = full.clone().qr();
            let r = qr.r();
            let rank = (0..rows.len()).filter(|&j| r[(j, j)].abs() > 1e-10).count();
            if rank < rows.len() {
                return Err(Error::ConstraintRankLoss {
                    filter,
                    rank,
                    expected: rows.len(),
                });
            }
            qr.q()
        };
        Ok(Constraints { rows, basis })
    }

    fn project(&self, x: &Vector) -> Vector {
        if self.rows.is_empty() {
            return x.clone();
        }
        x - &self.basis * (self.basis.transpose() * x)
    }
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.numerators.len()
    }

    fn len(&self) -> usize {
        self.dim * (self.n() + 1)
    }

    fn w0(&self, x: &Vector) -> Vector {
        x.rows(0, self.dim).into_owned()
    }

    fn v(&self, x: &Vector, i: usize) -> Vector {
        x.rows((i + 1) * self.dim, self.dim).into_owned()
    }

    fn objective(&self, x: &Vector) -> f64 {
        let w0 = self.w0(x);
        let w0_sq = w0.norm_squared();
        (0..self.n())
            .map(|i| {
                let v = self.v(x, i);
                let w = &w0 + &v;
                let num = self.numerators[i].quad_form(&w);
                let den = self.denominators[i].quad_form(&w)
                    + self.global_penalty * w0_sq
                    + self.specific_penalty * v.norm_squared();
                num / den
            })
            .sum()
    }

    fn derivatives(&self, x: &Vector) -> Derivatives {
        let (c, n) = (self.dim, self.n());
        let (l1, l2) = (self.global_penalty, self.specific_penalty);
        let w0 = self.w0(x);
        let mut grad = Vector::zeros(self.len());
        let mut a0 = Matrix::zeros(c, c);
        let mut cross = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        let mut value = 0.0;
        for i in 0..n {
            let v = self.v(x, i);
            let w = &w0 + &v;
            let s = self.numerators[i].as_matrix() * &w;
            let t = self.denominators[i].as_matrix() * &w;
            let num = w.dot(&s);
            let den = w.dot(&t) + l1 * w0.norm_squared() + l2 * v.norm_squared();
            let f = num / den;
            value += f;
            let p0 = (&t + &w0 * l1) * 2.0;
            let pi = (&t + &v * l2) * 2.0;
            let g0 = (&s * 2.0 - &p0 * f) / den;
            let gi = (&s * 2.0 - &pi * f) / den;
            let common = self.numerators[i].as_matrix() * 2.0 - self.denominators[i].as_matrix() * (2.0 * f);

            let mut h00 = common.clone();
            add_diagonal(&mut h00, -2.0 * f * l1);
            h00 -= &g0 * p0.transpose() + &p0 * g0.transpose();
            a0 += h00 / den;

            let mut hii = common.clone();
            add_diagonal(&mut hii, -2.0 * f * l2);
            hii -= &gi * pi.transpose() + &pi * gi.transpose();
            diag.push(hii / den);

            let hi0 = (common - &pi * g0.transpose() - &gi * p0.transpose()) / den;
            cross.push(hi0);

            let mut g_head = grad.rows_mut(0, c);
            g_head += &g0;
            grad.rows_mut((i + 1) * c, c).copy_from(&gi);
        }
        Derivatives {
            value,
            grad,
            a0,
            cross,
            diag,
        }
    }

    /// Sign-aligns the seeds to the first subject and splits each into
    /// `w₀ + vᵢ`. Two splits are scored and the better one kept: the one
    /// minimizing `λ₁‖w₀‖² + λ₂Σᵢ‖uᵢ − w₀‖²` (`w₀ = λ₂Σuᵢ / (λ₁ + nλ₂)`),
    /// and the fully shared `w₀ = mean(uᵢ)`, `vᵢ = 0`.
    fn initial_point(&self, seeds: &[Vector], constraints: &Constraints) -> Result<Vector> {
        let c = self.dim;
        let reference = &seeds[0];
        let aligned: Vec<Vector> = seeds
            .iter()
            .map(|u| if u.dot(reference) < 0.0 { -u } else { u.clone() })
            .collect();
        let mut sum = Vector::zeros(c);
        for u in &aligned {
            sum += u;
        }
        let n = aligned.len() as f64;
        let split = |shared: Vector, keep_specific: bool| {
            let mut x = Vector::zeros(self.len());
            for (i, u) in aligned.iter().enumerate() {
                if keep_specific {
                    x.rows_mut((i + 1) * c, c).copy_from(&(u - &shared));
                }
            }
            x.rows_mut(0, c).copy_from(&shared);
            let x = constraints.project(&x);
            let norm = x.norm();
            (norm > 1e-12).then(|| x / norm)
        };
        let balanced = split(&sum * (self.specific_penalty / (self.global_penalty + n * self.specific_penalty)), true);
        let shared = split(&sum / n, false);
        let score = |x: &Option<Vector>| x.as_ref().map(|x| self.objective(x)).filter(|f| f.is_finite());
        match (score(&balanced), score(&shared)) {
            (Some(a), Some(b)) => Ok(if b > a { shared } else { balanced }.expect("scored")),
            (Some(_), None) => Ok(balanced.expect("scored")),
            (None, Some(_)) => Ok(shared.expect("scored")),
            (None, None) => Err(Error::Singular("initial filters lie in the span of the conjugacy constraints".into())),
        }
    }

    fn maximize(&self, seeds: &[Vector], constraints: &Constraints, cfg: &MtCspConfig) -> Result<(Vector, Vec<f64>)> {
        let mut x = self.initial_point(seeds, constraints)?;
        let mut value = self.objective(&x);
        let mut trace = vec![value];
        if !value.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: 0, trace });
        }
        let mut damping = Damping::default();
        for iteration in 1..=cfg.max_iterations {
            let step = match cfg.solver {
                MtCspSolver::Joint => self.joint_step(&x, constraints, &mut damping),
                MtCspSolver::Alternating => self.alternating_sweep(&x, constraints, &mut damping),
            };
            let Some((next, next_value)) = step else { break };
            if !next_value.is_finite() {
                trace.push(next_value);
                return Err(Error::NonFiniteObjective { iteration, trace });
            }
            let gain = next_value - value;
            x = next;
            value = next_value;
            trace.push(value);
            if gain <= cfg.objective_tolerance * value.abs().max(1.0) {
                break;
            }
        }
        Ok((x, trace))
    }

    /// Backtracking from `x` along `d`: halves the step up to 30 times and
    /// accepts the first feasible unit-norm point that does not decrease `F`.
    fn line_search(&self, x: &Vector, d: &Vector, value: f64, constraints: &Constraints) -> Option<(Vector, f64)> {
        let dn = d.norm();
        if !(dn > 0.0) || !dn.is_finite() {
            return None;
        }
        let mut t = (0.5 / dn).min(1.0);
        for _ in 0..=30 {
            let mut cand = constraints.project(&(x + d * t));
            let norm = cand.norm();
            if norm > 0.0 {
                cand /= norm;
                let f = self.objective(&cand);
                if f.is_finite() && f >= value {
                    return Some((cand, f));
                }
            }
            t *= 0.5;
        }
        None
    }

    fn joint_step(&self, x: &Vector, constraints: &Constraints, damping: &mut Damping) -> Option<(Vector, f64)> {
        let der = self.derivatives(x);
        if der.grad.iter().any(|v| !v.is_finite()) {
            return Some((x.clone(), f64::NAN));
        }
        let scale = hessian_scale(&der);
        let newton = damping.search(|tau| {
            let shift = tau * scale;
            self.joint_newton_direction(x, &der, constraints, shift).filter(|d| {
                let curvature = d.dot(&self.hessian_times(&der, d)) - shift * d.norm_squared();
                curvature < 0.0 && der.grad.dot(d) > 0.0
            })
        });
        let d = newton.unwrap_or_else(|| self.projected_gradient(x, &der.grad, constraints));
        let d = self.freeze_gauge(x, d);
        self.line_search(x, &d, der.value, constraints)
    }

    /// Once `w₀` is negligible against every `vᵢ` the terms decouple and each
    /// is invariant to the scale of its own `vᵢ`; steps that only reshuffle
    /// those scales buy vanishing gains, so they are removed.
    fn freeze_gauge(&self, x: &Vector, mut d: Vector) -> Vector {
        let w0 = self.w0(x).norm();
        let blocks: Vec<Vector> = (0..self.n()).map(|i| self.v(x, i)).collect();
        let smallest = blocks.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(w0 <= GAUGE_RATIO * smallest) {
            return d;
        }
        for (i, v) in blocks.iter().enumerate() {
            let mut seg = d.rows_mut((i + 1) * self.dim, self.dim);
            let along = seg.dot(v) / v.norm_squared();
            seg.axpy(-along, v, 1.0);
        }
        d
    }

    /// Unshifted arrowhead Hessian times `d`.
    fn hessian_times(&self, der: &Derivatives, d: &Vector) -> Vector {
        let c = self.dim;
        let d0 = d.rows(0, c);
        let mut out = Vector::zeros(self.len());
        let mut head = &der.a0 * d0;
        for i in 0..self.n() {
            let di = d.rows((i + 1) * c, c);
            head += der.cross[i].transpose() * di;
            out.rows_mut((i + 1) * c, c).copy_from(&(&der.cross[i] * d0 + &der.diag[i] * di));
        }
        out.rows_mut(0, c).copy_from(&head);
        out
    }

    /// Gradient with the components along `x` and the constraint rows removed.
    fn projected_gradient(&self, x: &Vector, grad: &Vector, constraints: &Constraints) -> Vector {
        let g = constraints.project(grad);
        let xs = constraints.project(x);
        let xn = xs.norm_squared();
        if xn > 0.0 {
            &g - &xs * (xs.dot(&g) / xn)
        } else {
            g
        }
    }

    /// Newton direction of the equality-constrained problem
    ///
    /// ```text
    /// [H  Eᵀ] [d]   [−g]
    /// [E  0 ] [μ] = [ 0]
    /// ```
    ///
    /// where `E` stacks the conjugacy rows and `xᵀ`. `H` is replaced by
    /// `H − β·EᵀE`, which leaves the solution unchanged but makes the matrix
    /// invertible at the singular direction `x`. The part of the shift that
    /// keeps the arrowhead shape is factored blockwise; the coupling part of
    /// `β·xxᵀ` is restored with a Woodbury correction.
    fn joint_newton_direction(
        &self,
        x: &Vector,
        der: &Derivatives,
        constraints: &Constraints,
        shift: f64,
    ) -> Option<Vector> {
        let (c, n) = (self.dim, self.n());
        let beta = hessian_scale(der) + shift;
        let mut a0 = der.a0.clone();
        let mut cross = der.cross.clone();
        let mut diag = der.diag.clone();
        if shift > 0.0 {
            add_diagonal(&mut a0, -shift);
            for d in diag.iter_mut() {
                add_diagonal(d, -shift);
            }
        }
        for (i, a) in &constraints.rows {
            let outer = a * a.transpose() * beta;
            a0 -= &outer;
            cross[*i] -= &outer;
            diag[*i] -= &outer;
        }
        let blocks: Vec<Vector> = (0..=n).map(|b| x.rows(b * c, c).into_owned()).collect();
        a0 -= &blocks[0] * blocks[0].transpose() * beta;
        for i in 0..n {
            diag[i] -= &blocks[i + 1] * blocks[i + 1].transpose() * beta;
        }

        let arrow = ArrowheadSolver::new(a0, cross, diag)?;

        // U embeds each block of x in its own column; the dense shift is
        // β·U·(11ᵀ − I)·Uᵀ on top of the block-diagonal part.
        let mut u = Matrix::zeros(self.len(), n + 1);
        for (b, xb) in blocks.iter().enumerate() {
            u.view_mut((b * c, b), (c, 1)).copy_from(xb);
        }
        let binv_u = arrow.solve(&u)?;
        let coupling = Matrix::from_fn(n + 1, n + 1, |r, s| if r == s { 0.0 } else { 1.0 });
        let coupling_inv = coupling.try_inverse()?;
        let small = -coupling_inv / beta + u.transpose() * &binv_u;
        let small_lu = LU::new(small);
        let m_solve = |r: &Matrix| -> Option<Matrix> {
            let y = arrow.solve(r)?;
            let corr = small_lu.solve(&(u.transpose() * &y))?;
            Some(y - &binv_u * corr)
        };

        let rows = constraints.rows.len() + 1;
        let mut e = Matrix::zeros(self.len(), rows);
        for (j, (i, a)) in constraints.rows.iter().enumerate() {
            e.view_mut((0, j), (c, 1)).copy_from(a);
            e.view_mut(((i + 1) * c, j), (c, 1)).copy_from(a);
        }
        e.set_column(rows - 1, x);
        let mut rhs = Matrix::zeros(self.len(), rows + 1);
        rhs.set_column(0, &der.grad);
        rhs.columns_mut(1, rows).copy_from(&e);
        let sol = m_solve(&rhs)?;
        let minv_g = sol.column(0).into_owned();
        let minv_e = sol.columns(1, rows).into_owned();
        let schur = e.transpose() * &minv_e;
        let mu = LU::new(schur).solve(&(-(e.transpose() * &minv_g)))?;
        let d = -minv_g - minv_e * mu;
        d.iter().all(|v| v.is_finite()).then_some(d)
    }

    /// One pass of block Newton steps: `w₀` first, then each `vᵢ`. Returns
    /// `None` when no block improved.
    fn alternating_sweep(&self, x: &Vector, constraints: &Constraints, damping: &mut Damping) -> Option<(Vector, f64)> {
        let c = self.dim;
        let mut current = x.clone();
        let mut value = self.objective(x);
        let mut moved = false;
        for block in 0..=self.n() {
            let der = self.derivatives(&current);
            if der.grad.iter().any(|v| !v.is_finite()) {
                return Some((current, f64::NAN));
            }
            let hess = if block == 0 { &der.a0 } else { &der.diag[block - 1] };
            let g = der.grad.rows(block * c, c).into_owned();
            let rows: Vec<&Vector> = constraints
                .rows
                .iter()
                .filter(|(i, _)| block == 0 || *i + 1 == block)
                .map(|(_, a)| a)
                .collect();
            let scale = hess.norm().max(f64::MIN_POSITIVE);
            let local = damping.search(|tau| {
                let mut shifted = hess.clone();
                add_diagonal(&mut shifted, -tau * scale);
                block_newton_direction(&shifted, &g, &rows).filter(|d| d.dot(&(&shifted * d)) < 0.0 && g.dot(d) > 0.0)
            });
            let local = local.unwrap_or_else(|| project_rows(&g, &rows));
            let mut d = Vector::zeros(self.len());
            d.rows_mut(block * c, c).copy_from(&local);
            if let Some((next, f)) = self.line_search(&current, &d, value, constraints) {
                moved |= f > value;
                current = next;
                value = f;
            }
        }
        moved.then_some((current, value))
    }
}

/// `‖H‖_F`, an upper bound on the Hessian's spectral radius.
fn hessian_scale(der: &Derivatives) -> f64 {
    let mut s = der.a0.norm_squared();
    for (b, k) in der.cross.iter().zip(&der.diag) {
        s += 2.0 * b.norm_squared() + k.norm_squared();
    }
    s.sqrt().max(f64::MIN_POSITIVE)
}

/// Levenberg-style shift `H − τ‖H‖_F·I` for Newton directions. A pure Newton
/// step is tried first; on failure the shift grows tenfold until the shifted
/// matrix is negative definite (certain once `τ > 1`). The last successful
/// shift, reduced tenfold, seeds the next iteration.
#[derive(Debug, Default)]
struct Damping {
    tau: f64,
}

impl Damping {
    const MIN: f64 = 1e-6;
    const MAX: f64 = 10.0;

    fn search(&mut self, mut attempt: impl FnMut(f64) -> Option<Vector>) -> Option<Vector> {
        let mut tau = self.tau;
        loop {
            if let Some(d) = attempt(tau) {
                self.tau = if tau / 10.0 < Self::MIN { 0.0 } else { tau / 10.0 };
                return Some(d);
            }
            tau = if tau == 0.0 { Self::MIN } else { tau * 10.0 };
            if tau > Self::MAX {
                self.tau = 0.0;
                return None;
            }
        }
    }
}

fn add_diagonal(m: &mut Matrix, v: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += v;
    }
}

/// Removes from `g` its components along the span of `rows`.
fn project_rows(g: &Vector, rows: &[&Vector]) -> Vector {
    if rows.is_empty() {
        return g.clone();
    }
    let cols: Vec<Vector> = rows.iter().map(|r| (*r).clone()).collect();
    let q = Matrix::from_columns(&cols).qr().q();
    g - &q * (q.transpose() * g)
}

/// Dense KKT solve `[H Rᵀ; R 0][d; μ] = [−g; 0]` for one block.
fn block_newton_direction(h: &Matrix, g: &Vector, rows: &[&Vector]) -> Option<Vector> {
    let c = h.nrows();
    let r = rows.len();
    let mut kkt = Matrix::zeros(c + r, c + r);
    kkt.view_mut((0, 0), (c, c)).copy_from(h);
    for (j, a) in rows.iter().enumerate() {
        kkt.view_mut((0, c + j), (c, 1)).copy_from(*a);
        kkt.view_mut((c + j, 0), (1, c)).copy_from(&a.transpose());
    }
    let mut rhs = Vector::zeros(c + r);
    rhs.rows_mut(0, c).copy_from(&(-g));
    let sol = LU::new(kkt).solve(&rhs)?;
    let d = sol.rows(0, c).into_owned();
    d.iter().all(|v| v.is_finite()).then_some(d)
}

/// Block elimination for the arrowhead matrix
/// `[[A₀, B₁ᵀ, …, Bₙᵀ], [B₁, K₁], …, [Bₙ, 0, …, Kₙ]]`.
struct ArrowheadSolver {
    cross: Vec<Matrix>,
    diag_lu: Vec<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    /// `Kᵢ⁻¹Bᵢ`.
    reduced: Vec<Matrix>,
    schur_lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl ArrowheadSolver {
    fn new(a0: Matrix, cross: Vec<Matrix>, diag: Vec<Matrix>) -> Option<Self> {
        let mut schur = a0;
        let mut diag_lu = Vec::with_capacity(diag.len());
        let mut reduced = Vec::with_capacity(diag.len());
        for (k, b) in diag.into_iter().zip(&cross) {
            let lu = LU::new(k);
            let z = lu.solve(b)?;
            schur -= b.transpose() * &z;
            diag_lu.push(lu);
            reduced.push(z);
        }
        let schur_lu = LU::new(schur);
        if !schur_lu.is_invertible() {
            return None;
        }
        Some(ArrowheadSolver {
            cross,
            diag_lu,
            reduced,
            schur_lu,
        })
    }

    fn solve(&self, r: &Matrix) -> Option<Matrix> {
        let c = self.schur_lu.l().nrows();
        let cols = r.ncols();
        let mut head = r.rows(0, c).into_owned();
        let mut tails = Vec::with_capacity(self.cross.len());
        for (i, lu) in self.diag_lu.iter().enumerate() {
            let ki_r = lu.solve(&r.rows((i + 1) * c, c).into_owned())?;
            head -= self.cross[i].transpose() * &ki_r;
            tails.push(ki_r);
        }
        let y0 = self.schur_lu.solve(&head)?;
        let mut out = Matrix::zeros(r.nrows(), cols);
        out.rows_mut(0, c).copy_from(&y0);
        for (i, ki_r) in tails.into_iter().enumerate() {
            out.rows_mut((i + 1) * c, c).copy_from(&(ki_r - &self.reduced[i] * &y0));
        }
        Some(out)
    }
}
