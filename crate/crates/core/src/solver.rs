//! Concave maximization of the dual over `Γ_J ∩ Y⁺` (minimization sense)
//! and the mirrored convex minimization over `(−Γ_J) ∩ Y⁻` (maximization
//! sense), producing a certified candidate pair `(x(λ̄), λ̄)`.
//!
//! The method is projected damped Newton: steps `−(∇²D − σI)⁻¹∇D` with the
//! shift `σ` chosen so the modified Hessian is definite by a safe margin,
//! Armijo backtracking, sign clamping on inequality multipliers, and a
//! definiteness guard that keeps every accepted iterate strictly inside
//! the region where `D` is smooth and concave (resp. convex).  When the
//! supremum sits on the singular boundary of that region the guard starves
//! the step; the solver then lands on the boundary by bisection, evaluates
//! `D` there through the min-norm solve, attempts to recover a feasible
//! primal point along the kernel, and re-certifies.  Such runs finish with
//! status [`SolveStatus::BoundaryLimit`], never `Converged`.

use serde::Serialize;

use crate::dual::{self, eval_dual};
use crate::kkt::{self, Certificate, Grade, Justification, Sense};
use crate::linalg::{self, eig_sym, SymMatrix};
use crate::model::Problem;
use crate::scalar::Scalar;
use crate::tol::Tolerances;

/// Solver knobs.
#[derive(Debug, Clone)]
pub struct SolveConfig<T> {
    /// Projected-gradient norm below which the solve converges.
    pub tol_grad: T,
    pub max_iter: usize,
    /// Definiteness margin `δ`: accepted iterates keep
    /// `min_eig A(λ) ≥ δ` (minimization) or `max_eig A(λ) ≤ −δ`.
    pub min_eig_guard: T,
    /// Optional user start; falls back to the ray search of [`find_start`].
    pub start: Option<Vec<T>>,
    pub sense: Sense,
}

impl<T: Scalar> Default for SolveConfig<T> {
    fn default() -> Self {
        SolveConfig {
            tol_grad: T::of(1e-10),
            max_iter: 200,
            min_eig_guard: T::of(1e-8),
            start: None,
            sense: Sense::Min,
        }
    }
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    /// Projected gradient below tolerance at an interior iterate.
    Converged,
    /// No multiplier with definite `A(λ)` of the required sign was found.
    InitNotFound,
    IterLimit,
    /// `D` escaped beyond ±1e12 along feasible steps (diagnostic).
    Unbounded,
    /// The optimum was approached on the singular boundary; the reported
    /// multiplier sits on it and the certificate comes from re-grading.
    BoundaryLimit,
}

/// Outcome of a dual solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveResult<T> {
    pub lambda: Vec<T>,
    pub x: Vec<T>,
    pub certificate: Certificate<T>,
    pub iterations: usize,
    pub status: SolveStatus,
    /// `D(λ̄)` when defined at the reported multiplier.
    pub dual_value: Option<T>,
    /// Dual values of accepted iterates (monotone in the solve direction).
    #[serde(skip)]
    pub dual_trajectory: Vec<T>,
    /// Accepted iterates, for membership auditing.
    #[serde(skip)]
    pub lambda_trajectory: Vec<Vec<T>>,
}

const ARMIJO_SLOPE: f64 = 1e-4;
const STEP_FLOOR: f64 = 1e-14;
const UNBOUNDED_LIMIT: f64 = 1e12;

#[inline]
fn sense_sign<T: Scalar>(sense: Sense) -> T {
    match sense {
        Sense::Min => T::one(),
        Sense::Max => -T::one(),
    }
}

/// Definiteness margin of `A(λ)` in the solve direction: positive iff the
/// matrix is definite of the sign the sense requires.
fn guard_margin<T: Scalar>(p: &Problem<T>, lambda: &[T], sense: Sense) -> T {
    let (a, _, _) = dual::assemble(p, lambda);
    let eig = eig_sym(&a);
    match sense {
        Sense::Min => eig.min_eig(),
        Sense::Max => -eig.max_eig(),
    }
}

fn clamp_signs<T: Scalar>(p: &Problem<T>, lambda: &mut [T], sense: Sense) {
    for j in p.inequality_indices() {
        let v = lambda[j - 1];
        lambda[j - 1] = match sense {
            Sense::Min => v.max(T::zero()),
            Sense::Max => v.min(T::zero()),
        };
    }
}

/// Candidate ray directions for the start search, minimization sense
/// (inequality coordinates nonnegative).  The maximization set is the
/// negation.
fn start_directions<T: Scalar>(p: &Problem<T>) -> Vec<Vec<T>> {
    let m = p.m();
    let eq: Vec<usize> = p.equality_set().iter().copied().collect();
    let mut dirs = Vec::new();
    // Single coordinates, both signs where J allows.
    for k in 1..=m {
        let mut d = vec![T::zero(); m];
        d[k - 1] = T::one();
        dirs.push(d.clone());
        if p.is_equality(k) {
            d[k - 1] = -T::one();
            dirs.push(d);
        }
    }
    // Full sums with sign patterns on the equality coordinates.
    let patterns = 1usize << eq.len().min(8);
    for bits in 0..patterns {
        let mut d = vec![T::one(); m];
        for (i, &j) in eq.iter().take(8).enumerate() {
            if bits >> i & 1 == 1 {
                d[j - 1] = -T::one();
            }
        }
        dirs.push(d);
    }
    // Coordinate pairs with admissible sign combinations.
    for k in 1..=m {
        for l in k + 1..=m {
            let sk: &[T] = if p.is_equality(k) {
                &[T::one(), -T::one()]
            } else {
                &[T::one()]
            };
            let sl: &[T] = if p.is_equality(l) {
                &[T::one(), -T::one()]
            } else {
                &[T::one()]
            };
            for &a in sk {
                for &b in sl {
                    let mut d = vec![T::zero(); m];
                    d[k - 1] = a;
                    d[l - 1] = b;
                    dirs.push(d);
                }
            }
        }
    }
    dirs
}

/// Searches for a multiplier with `A(λ)` definite of the required sign by
/// margin `δ` and admissible multiplier signs: rays `t·d`,
/// `t ∈ {1, 2, 4, …, 2²⁰}`, over single coordinates, signed full sums and
/// coordinate pairs.
pub fn find_start<T: Scalar>(
    p: &Problem<T>,
    sense: Sense,
    delta: T,
    _tol: &Tolerances<T>,
) -> Option<Vec<T>> {
    if p.m() == 0 {
        let empty: Vec<T> = Vec::new();
        return (guard_margin(p, &empty, sense) >= delta).then_some(empty);
    }
    let sign = sense_sign::<T>(sense);
    for d in start_directions(p) {
        let mut t = T::one();
        for _ in 0..=20 {
            let lambda: Vec<T> = d.iter().map(|&v| sign * t * v).collect();
            if guard_margin(p, &lambda, sense) >= delta {
                return Some(lambda);
            }
            t = t + t;
        }
    }
    None
}

struct PointData<T> {
    value: T,
    grad: Vec<T>,
    hess: SymMatrix<T>,
    x: Vec<T>,
}

fn eval_interior<T: Scalar>(p: &Problem<T>, lambda: &[T], tol: &Tolerances<T>) -> PointData<T> {
    let ev = eval_dual(p, lambda, tol).expect("guarded iterate has definite A(lambda)");
    let m = p.m();
    PointData {
        value: ev.value,
        grad: ev.gradient.unwrap_or_default(),
        hess: ev.hessian.unwrap_or_else(|| SymMatrix::zeros(m.max(1))),
        x: ev.x_lambda,
    }
}

/// Projected gradient of `φ = ±D` against the sign constraints; zero
/// exactly at points satisfying the dual KKT conditions.
fn projected_gradient<T: Scalar>(
    p: &Problem<T>,
    lambda: &[T],
    grad_phi: &[T],
    sense: Sense,
) -> Vec<T> {
    let mut pg = grad_phi.to_vec();
    for j in p.inequality_indices() {
        if lambda[j - 1] == T::zero() {
            pg[j - 1] = match sense {
                // Only increasing λ_j is feasible: inward gradient counts.
                Sense::Min => grad_phi[j - 1].max(T::zero()),
                Sense::Max => grad_phi[j - 1].min(T::zero()),
            };
        }
    }
    pg
}

/// Modified Newton direction on the free coordinates:
/// `(σI − ∇²φ)⁻¹ ∇φ` with `σ` making the system matrix definite.
fn newton_direction<T: Scalar>(
    free: &[usize],
    grad_phi: &[T],
    hess_phi: &SymMatrix<T>,
    tol: &Tolerances<T>,
) -> Vec<T> {
    let nf = free.len();
    let mut hf = SymMatrix::zeros(nf.max(1));
    for (r, &j) in free.iter().enumerate() {
        for (c, &k) in free.iter().enumerate().skip(r) {
            hf.set_sym(r, c, hess_phi.get(j, k));
        }
    }
    let eig = eig_sym(&hf);
    let shift = tol.eig_zero_band(eig.spectral_norm());
    let sigma = eig.max_eig().max(T::zero()) + shift;
    // σI − H has eigenvalues σ − w ≥ shift > 0.
    let gf: Vec<T> = free.iter().map(|&j| grad_phi[j]).collect();
    let mut step_f = vec![T::zero(); nf];
    for j in 0..nf {
        let w = sigma - eig.values[j];
        let coeff = linalg::dot(eig.eigenvector(j), &gf) / w;
        linalg::axpy(coeff, eig.eigenvector(j), &mut step_f);
    }
    let mut step = vec![T::zero(); grad_phi.len()];
    for (r, &j) in free.iter().enumerate() {
        step[j] = step_f[r];
    }
    step
}

/// Maximizes the dual over `Γ_J ∩ Y⁺` when `cfg.sense` is `Min`, or
/// minimizes it over `(−Γ_J) ∩ Y⁻` when `Max`; on convergence the primal
/// candidate is `x(λ̄)` and the certificate comes from [`kkt::certify`].
pub fn maximize_dual<T: Scalar>(
    p: &Problem<T>,
    cfg: &SolveConfig<T>,
    tol: &Tolerances<T>,
) -> SolveResult<T> {
    let sense = cfg.sense;
    let sign = sense_sign::<T>(sense);
    let delta = cfg.min_eig_guard;

    let start = cfg
        .start
        .as_ref()
        .map(|s| {
            let mut s = s.clone();
            clamp_signs(p, &mut s, sense);
            s
        })
        .filter(|s| s.len() == p.m() && guard_margin(p, s, sense) >= delta)
        .or_else(|| find_start(p, sense, delta, tol));
    let mut lambda = match start {
        Some(s) => s,
        None => {
            return SolveResult {
                lambda: vec![T::zero(); p.m()],
                x: vec![T::zero(); p.n()],
                certificate: Certificate {
                    grade: Grade::None,
                    justification: Justification::None,
                    duality_gap: None,
                },
                iterations: 0,
                status: SolveStatus::InitNotFound,
                dual_value: None,
                dual_trajectory: Vec::new(),
                lambda_trajectory: Vec::new(),
            }
        }
    };

    let mut dual_trajectory = Vec::new();
    let mut lambda_trajectory = Vec::new();
    let step_floor = |lam: &[T]| T::of(STEP_FLOOR) * (T::one() + linalg::norm2(lam));

    for it in 0..cfg.max_iter {
        let pt = eval_interior(p, &lambda, tol);
        dual_trajectory.push(pt.value);
        lambda_trajectory.push(lambda.clone());

        if sign * pt.value >= T::of(UNBOUNDED_LIMIT) {
            return finish(
                p, lambda, pt.x, it, SolveStatus::Unbounded, sense, tol,
                dual_trajectory, lambda_trajectory,
            );
        }

        let grad_phi: Vec<T> = pt.grad.iter().map(|&g| sign * g).collect();
        let pg = projected_gradient(p, &lambda, &grad_phi, sense);
        if linalg::norm2(&pg) <= cfg.tol_grad {
            return finish(
                p, lambda, pt.x, it, SolveStatus::Converged, sense, tol,
                dual_trajectory, lambda_trajectory,
            );
        }

        let mut hess_phi = SymMatrix::zeros(p.m().max(1));
        hess_phi.scaled_add(sign, &pt.hess);
        let free: Vec<usize> = (0..p.m())
            .filter(|&j| {
                p.is_equality(j + 1) || lambda[j] != T::zero() || pg[j] != T::zero()
            })
            .collect();
        let step = newton_direction(&free, &grad_phi, &hess_phi, tol);

        // Backtrack: project, keep the definiteness guard, then Armijo.
        let mut alpha = T::one();
        let mut accepted: Option<(Vec<T>, T)> = None;
        let mut guard_blocked = true;
        let floor = step_floor(&lambda);
        loop {
            let mut cand: Vec<T> = lambda
                .iter()
                .zip(&step)
                .map(|(&l, &s)| l + alpha * s)
                .collect();
            clamp_signs(p, &mut cand, sense);
            let delta_vec = linalg::sub(&cand, &lambda);
            let moved = linalg::norm2(&delta_vec);
            if moved <= floor {
                break;
            }
            if guard_margin(p, &cand, sense) >= delta {
                guard_blocked = false;
                let cand_val = eval_interior(p, &cand, tol).value;
                let slope = linalg::dot(&grad_phi, &delta_vec);
                // Near the optimum the true gain drops below the floating
                // resolution of D; tolerating an epsilon-level decrease
                // keeps full Newton steps acceptable there (the cumulative
                // loss over a whole solve stays far inside the 1e-12
                // monotonicity slack).
                let eps_guard = T::epsilon() * (T::one() + pt.value.abs());
                if sign * cand_val >= sign * pt.value + T::of(ARMIJO_SLOPE) * slope - eps_guard {
                    accepted = Some((cand, cand_val));
                    break;
                }
            }
            alpha *= T::of(0.5);
        }

        match accepted {
            Some((next, _)) => lambda = next,
            None if guard_blocked => {
                // The definiteness guard starved the step: the optimum is
                // on the singular boundary along this direction.
                return boundary_finish(
                    p, lambda, &step, it + 1, sense, tol,
                    dual_trajectory, lambda_trajectory,
                );
            }
            None => {
                // Armijo could not improve despite feasible trials.
                let x = pt.x;
                return finish(
                    p, lambda, x, it + 1, SolveStatus::IterLimit, sense, tol,
                    dual_trajectory, lambda_trajectory,
                );
            }
        }
    }

    let pt = eval_interior(p, &lambda, tol);
    let x = pt.x;
    let iters = cfg.max_iter;
    finish(
        p, lambda, x, iters, SolveStatus::IterLimit, sense, tol,
        dual_trajectory, lambda_trajectory,
    )
}

/// The mirror solve for maximization problems: minimizes `D` over
/// `(−Γ_J) ∩ Y⁻`.
pub fn minimize_dual_for_max<T: Scalar>(
    p: &Problem<T>,
    cfg: &SolveConfig<T>,
    tol: &Tolerances<T>,
) -> SolveResult<T> {
    let mut cfg = cfg.clone();
    cfg.sense = Sense::Max;
    maximize_dual(p, &cfg, tol)
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Scalar>(
    p: &Problem<T>,
    lambda: Vec<T>,
    x: Vec<T>,
    iterations: usize,
    status: SolveStatus,
    sense: Sense,
    tol: &Tolerances<T>,
    dual_trajectory: Vec<T>,
    lambda_trajectory: Vec<Vec<T>>,
) -> SolveResult<T> {
    let certificate = kkt::certify(p, &x, &lambda, sense, tol);
    let dual_value = eval_dual(p, &lambda, tol).ok().map(|ev| ev.value);
    SolveResult {
        lambda,
        x,
        certificate,
        iterations,
        status,
        dual_value,
        dual_trajectory,
        lambda_trajectory,
    }
}

/// Lands on the singular boundary along `step`, evaluates `D` there via
/// the min-norm solve, tries to recover a feasible primal point along a
/// one-dimensional kernel, and re-certifies with `Y_col` grading.
#[allow(clippy::too_many_arguments)]
fn boundary_finish<T: Scalar>(
    p: &Problem<T>,
    lambda: Vec<T>,
    step: &[T],
    iterations: usize,
    sense: Sense,
    tol: &Tolerances<T>,
    dual_trajectory: Vec<T>,
    lambda_trajectory: Vec<Vec<T>>,
) -> SolveResult<T> {
    let norm = linalg::norm2(step);
    if norm == T::zero() {
        let x = eval_interior(p, &lambda, tol).x;
        return finish(
            p, lambda, x, iterations, SolveStatus::IterLimit, sense, tol,
            dual_trajectory, lambda_trajectory,
        );
    }
    let project = |t: T| -> Vec<T> {
        let mut cand: Vec<T> = lambda
            .iter()
            .zip(step)
            .map(|(&l, &s)| l + t * s / norm)
            .collect();
        clamp_signs(p, &mut cand, sense);
        cand
    };

    // Expand to bracket the sign change of the definiteness margin.
    let mut t_hi = T::of(STEP_FLOOR) * (T::one() + linalg::norm2(&lambda));
    let t_max = norm * T::of(4.0);
    let mut bracketed = false;
    while t_hi <= t_max {
        if guard_margin(p, &project(t_hi), sense) < T::zero() {
            bracketed = true;
            break;
        }
        t_hi *= T::of(2.0);
    }

    let boundary_lambda = if bracketed {
        let mut lo = T::zero();
        let mut hi = t_hi;
        for _ in 0..200 {
            let mid = T::of(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if guard_margin(p, &project(mid), sense) >= T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        project(lo)
    } else {
        lambda.clone()
    };

    let (x, dual_value) = match eval_dual(p, &boundary_lambda, tol) {
        Ok(ev) => {
            let x = recover_boundary_x(p, &boundary_lambda, ev.x_lambda, sense, tol);
            (x, Some(ev.value))
        }
        Err(_) => (vec![T::zero(); p.n()], None),
    };

    let certificate = kkt::certify(p, &x, &boundary_lambda, sense, tol);
    SolveResult {
        lambda: boundary_lambda,
        x,
        certificate,
        iterations,
        status: SolveStatus::BoundaryLimit,
        dual_value,
        dual_trajectory,
        lambda_trajectory,
    }
}

/// At a singular boundary multiplier the solution set of
/// `A(λ)x = b(λ)` is `x_mn + ker A(λ)`; when the min-norm point violates
/// the constraints and the kernel is one-dimensional, the active
/// constraints are quadratics in the line parameter whose roots give the
/// only candidates for a feasible pair.
fn recover_boundary_x<T: Scalar>(
    p: &Problem<T>,
    lambda: &[T],
    x_mn: Vec<T>,
    sense: Sense,
    tol: &Tolerances<T>,
) -> Vec<T> {
    if kkt::check_lkkt_sense(p, &x_mn, lambda, sense, tol).holds {
        return x_mn;
    }
    let (a, _, _) = dual::assemble(p, lambda);
    let eig = eig_sym(&a);
    let band = tol.eig_zero_band(eig.spectral_norm());
    let kernel = eig.kernel_indices(band);
    if kernel.len() != 1 {
        return x_mn;
    }
    let k = eig.eigenvector(kernel[0]);

    let mut roots: Vec<T> = vec![T::zero()];
    for j in 1..=p.m() {
        let active = p.is_equality(j) || lambda[j - 1].abs() > tol.feas;
        if !active {
            continue;
        }
        let q = p.constraint(j);
        // q_j(x + s k) = ½ a s² + b s + c in the line parameter s.
        let qa = linalg::dot(k, &q.a.mul_vec(k));
        let qb = linalg::dot(k, &q.gradient(&x_mn));
        let qc = q.eval(&x_mn);
        if qa.abs() > T::of(1e-14) {
            let disc = qb * qb - T::of(2.0) * qa * qc;
            if disc >= T::zero() {
                let sq = disc.sqrt();
                roots.push((-qb + sq) / qa);
                roots.push((-qb - sq) / qa);
            }
        } else if qb.abs() > T::of(1e-14) {
            roots.push(-qc / qb);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));

    for s in roots {
        let cand: Vec<T> = x_mn.iter().zip(k).map(|(&x, &kv)| x + s * kv).collect();
        if kkt::check_lkkt_sense(p, &cand, lambda, sense, tol).holds {
            return cand;
        }
    }
    x_mn
}
