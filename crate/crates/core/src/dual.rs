//! The Lagrangian `L(x, λ)`, its affine aggregates, the dual function
//! `D(λ)` with gradient and Hessian, and multiplier-set membership.
//!
//! With `λ₀ := 1` the aggregates are
//! `A(λ) = Σ_k λ_k A_k`, `b(λ) = Σ_k λ_k b_k`, `c(λ) = Σ_k λ_k c_k`, and
//! `L(x, λ) = ½⟨x, A(λ)x⟩ − ⟨x, b(λ)⟩ + c(λ)`.
//!
//! `D(λ)` is the value of `L(·, λ)` at any solution of `A(λ)x = b(λ)`;
//! it is well defined exactly on `Y_col = {λ : b(λ) ∈ Im A(λ)}` (the value
//! does not depend on which solution is taken).  On `Y₀ = {λ : det A(λ) ≠ 0}`
//! it is smooth with `∂D/∂λ_j = q_j(x(λ))` and
//! `∂²D/∂λ_j∂λ_k = −⟨A_j x(λ) − b_j, A(λ)⁻¹ (A_k x(λ) − b_k)⟩`.
//! Outside `Y₀` the gradient and Hessian are refused rather than extended:
//! `Y_col` is not open, so differentiability cannot even be posed there.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    self, classify_from_extremes, eig_sym, in_range_with, solve_minnorm_with, DefClass,
    Definiteness, SymMatrix,
};
use crate::model::Problem;
use crate::scalar::Scalar;
use crate::tol::Tolerances;

/// Membership of a multiplier in the sets driving duality statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SetMembership {
    /// `det A(λ) ≠ 0`.
    pub in_y0: bool,
    /// `A(λ) ≻ 0`.
    pub in_yplus: bool,
    /// `A(λ) ≺ 0`.
    pub in_yminus: bool,
    /// `b(λ) ∈ Im A(λ)`.
    pub in_ycol: bool,
    /// `in_ycol` and `A(λ) ⪰ 0`.
    pub in_ycol_plus: bool,
    /// `in_ycol` and `A(λ) ⪯ 0`.
    pub in_ycol_minus: bool,
    /// `λ_j ≥ 0` for every inequality index `j`.
    pub in_gamma_j: bool,
    /// `Γ_J ∩ Y⁺`.
    pub in_yjplus: bool,
    /// `(−Γ_J) ∩ Y⁻`.
    pub in_yjminus: bool,
}

/// Full evaluation of the dual at one multiplier.
#[derive(Debug, Clone)]
pub struct DualEval<T> {
    /// `D(λ) = L(x(λ), λ)`.
    pub value: T,
    /// `∂D/∂λ_j = q_j(x(λ))`; present only on `Y₀`.
    pub gradient: Option<Vec<T>>,
    /// `m × m` dual Hessian, symmetrized; present only on `Y₀`.
    pub hessian: Option<SymMatrix<T>>,
    /// Min-norm solution of `A(λ) x = b(λ)`.
    pub x_lambda: Vec<T>,
    /// Residual of that solve.
    pub x_residual: T,
    pub membership: SetMembership,
    pub definiteness: Definiteness<T>,
}

impl<T: Scalar> DualEval<T> {
    /// Gradient accessor that names why it can be absent.
    pub fn require_gradient(&self) -> Result<&[T], DualError> {
        self.gradient
            .as_deref()
            .ok_or(DualError::GradientUndefined)
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum DualError {
    /// `λ ∉ Y_col`: no `x` with `A(λ)x = b(λ)`, so `D(λ)` has no value.
    #[error("dual undefined: b(lambda) is outside the range of A(lambda)")]
    DualUndefined,
    /// `λ ∈ Y_col \ Y₀`: the value exists but the derivative does not.
    #[error("dual gradient undefined: A(lambda) is singular")]
    GradientUndefined,
    /// An operation required `λ ∈ Y₀`.
    #[error("A(lambda) is numerically singular")]
    NotInY0,
}

/// The affine aggregates `(A(λ), b(λ), c(λ))` with `λ₀ = 1`.
pub fn assemble<T: Scalar>(p: &Problem<T>, lambda: &[T]) -> (SymMatrix<T>, Vec<T>, T) {
    assert_eq!(lambda.len(), p.m(), "multiplier length must equal m");
    let mut a = p.objective().a.clone();
    let mut b = p.objective().b.clone();
    let mut c = p.objective().c;
    for (j, &lj) in lambda.iter().enumerate() {
        let q = &p.constraints()[j];
        a.scaled_add(lj, &q.a);
        linalg::axpy(lj, &q.b, &mut b);
        c += lj * q.c;
    }
    (a, b, c)
}

/// `L(x, λ) = q₀(x) + Σ λ_j q_j(x)`.
///
/// Also evaluated through the aggregate form
/// `½⟨x, A(λ)x⟩ − ⟨x, b(λ)⟩ + c(λ)`; the two routes must agree to 1e-10
/// relative to the magnitude of the terms involved.
pub fn lagrangian<T: Scalar>(p: &Problem<T>, x: &[T], lambda: &[T]) -> T {
    assert_eq!(x.len(), p.n(), "dimension mismatch");
    assert_eq!(lambda.len(), p.m(), "multiplier length must equal m");
    let mut sum = p.objective().eval(x);
    let mut scale = T::one() + sum.abs();
    for (j, &lj) in lambda.iter().enumerate() {
        let qj = p.constraints()[j].eval(x);
        sum += lj * qj;
        scale += (lj * qj).abs();
    }
    let (a, b, c) = assemble(p, lambda);
    let agg = T::of(0.5) * linalg::dot(x, &a.mul_vec(x)) - linalg::dot(x, &b) + c;
    scale += T::of(0.5) * linalg::dot(x, &a.mul_vec(x)).abs()
        + linalg::dot(x, &b).abs()
        + c.abs();
    assert!(
        (sum - agg).abs() <= T::of(1e-10) * scale,
        "Lagrangian forms disagree: {sum} vs {agg}"
    );
    sum
}

/// `∇ₓL(x, λ) = A(λ)x − b(λ)`.
pub fn grad_x_lagrangian<T: Scalar>(p: &Problem<T>, x: &[T], lambda: &[T]) -> Vec<T> {
    let (a, b, _) = assemble(p, lambda);
    let mut g = a.mul_vec(x);
    for (gi, &bi) in g.iter_mut().zip(&b) {
        *gi -= bi;
    }
    g
}

/// `∇²ₓₓL(x, λ) = A(λ)`.
pub fn hess_x_lagrangian<T: Scalar>(p: &Problem<T>, lambda: &[T]) -> SymMatrix<T> {
    assemble(p, lambda).0
}

/// `∇_λ L(x, λ) = (q_j(x))_{j=1..m}`.
pub fn constraint_values<T: Scalar>(p: &Problem<T>, x: &[T]) -> Vec<T> {
    (1..=p.m()).map(|j| p.constraint(j).eval(x)).collect()
}

fn gamma_membership<T: Scalar>(p: &Problem<T>, lambda: &[T], tol: &Tolerances<T>) -> (bool, bool) {
    let mut in_gamma = true;
    let mut in_neg_gamma = true;
    for j in p.inequality_indices() {
        let lj = lambda[j - 1];
        if lj < -tol.feas {
            in_gamma = false;
        }
        if lj > tol.feas {
            in_neg_gamma = false;
        }
    }
    (in_gamma, in_neg_gamma)
}

fn membership_from_parts<T: Scalar>(
    p: &Problem<T>,
    lambda: &[T],
    definiteness: &Definiteness<T>,
    in_y0: bool,
    in_ycol: bool,
    tol: &Tolerances<T>,
) -> SetMembership {
    let in_yplus = definiteness.class == DefClass::PosDef;
    let in_yminus = definiteness.class == DefClass::NegDef;
    let (in_gamma_j, in_neg_gamma) = gamma_membership(p, lambda, tol);
    SetMembership {
        in_y0,
        in_yplus,
        in_yminus,
        in_ycol,
        in_ycol_plus: in_ycol && definiteness.is_psd(),
        in_ycol_minus: in_ycol && definiteness.is_nsd(),
        in_gamma_j,
        in_yjplus: in_gamma_j && in_yplus,
        in_yjminus: in_neg_gamma && in_yminus,
    }
}

/// Classifies `λ` against `Y₀`, `Y±`, `Y_col`, `Y_col±`, `Γ_J`, `Y^{J±}`.
pub fn classify_membership<T: Scalar>(
    p: &Problem<T>,
    lambda: &[T],
    tol: &Tolerances<T>,
) -> SetMembership {
    let (a, b, _) = assemble(p, lambda);
    let eig = eig_sym(&a);
    let definiteness = classify_from_extremes(eig.min_eig(), eig.max_eig(), tol);
    let band = tol.eig_zero_band(eig.spectral_norm());
    let in_y0 = eig.values.iter().all(|w| w.abs() > band);
    let sol = solve_minnorm_with(&eig, &a, &b, tol);
    let in_ycol = in_range_with(&eig, &sol, &b, tol);
    membership_from_parts(p, lambda, &definiteness, in_y0, in_ycol, tol)
}

/// Evaluates `D`, `∇D`, `∇²D`, `x(λ)` and set membership at one multiplier.
///
/// Fails with [`DualError::DualUndefined`] when `λ ∉ Y_col`; on
/// `Y_col \ Y₀` the value is computed through the min-norm solution (well
/// defined because `L(·, λ)` is constant on the solution set) but the
/// gradient and Hessian fields stay `None`.
pub fn eval_dual<T: Scalar>(
    p: &Problem<T>,
    lambda: &[T],
    tol: &Tolerances<T>,
) -> Result<DualEval<T>, DualError> {
    assert_eq!(lambda.len(), p.m(), "multiplier length must equal m");
    let (a, b, _) = assemble(p, lambda);
    let eig = eig_sym(&a);
    let definiteness = classify_from_extremes(eig.min_eig(), eig.max_eig(), tol);
    let band = tol.eig_zero_band(eig.spectral_norm());
    let in_y0 = eig.values.iter().all(|w| w.abs() > band);
    let sol = solve_minnorm_with(&eig, &a, &b, tol);
    let in_ycol = in_range_with(&eig, &sol, &b, tol);
    let membership = membership_from_parts(p, lambda, &definiteness, in_y0, in_ycol, tol);
    if !in_ycol {
        return Err(DualError::DualUndefined);
    }

    let value = lagrangian(p, &sol.x, lambda);
    let (gradient, hessian) = if in_y0 {
        let m = p.m();
        let grad = constraint_values(p, &sol.x);
        // Residual vectors g_k = A_k x(λ) − b_k feed both the Hessian rows
        // and columns; solve A(λ) y_k = g_k once per k.
        let g_vecs: Vec<Vec<T>> = (1..=m)
            .map(|k| p.constraint(k).gradient(&sol.x))
            .collect();
        let y_vecs: Vec<Vec<T>> = g_vecs.iter().map(|g| eig.apply_pinv(g, band)).collect();
        let mut h = SymMatrix::zeros(m.max(1));
        if m > 0 {
            for j in 0..m {
                for k in j..m {
                    // Symmetrized after assembly to kill rounding asymmetry.
                    let hjk = -(linalg::dot(&g_vecs[j], &y_vecs[k])
                        + linalg::dot(&g_vecs[k], &y_vecs[j]))
                        * T::of(0.5);
                    h.set_sym(j, k, hjk);
                }
            }
        }
        (Some(grad), if m > 0 { Some(h) } else { None })
    } else {
        (None, None)
    };

    Ok(DualEval {
        value,
        gradient,
        hessian,
        x_lambda: sol.x,
        x_residual: sol.residual,
        membership,
        definiteness,
    })
}
