//! KKT condition checks split by the equality index set, and graded
//! global-optimality certificates.
//!
//! A pair `(x̄, λ̄)` satisfies the conditions relative to `J` when
//! `∇ₓL(x̄, λ̄) = 0`, `x̄ ∈ X_J`, `λ̄_j ≥ 0` and `λ̄_j q_j(x̄) = 0` on `Jᶜ`.
//! The maximization variant keeps feasibility but flips the multiplier
//! sign to `λ̄_j ≤ 0` on `Jᶜ`.
//!
//! Grading: at such a pair perfect duality `q₀(x̄) = L(x̄, λ̄) = D(λ̄)`
//! always holds; if additionally `λ̄ ∈ Γ_J ∩ Y_col⁺` then `x̄` minimizes
//! `q₀` globally on `X_J` (convexity of `L(·, λ̄)` on the solution set),
//! and if `λ̄ ∈ Γ_J ∩ Y⁺` the minimizer is unique (strict convexity).
//! The mirror statements with `(−Γ_J) ∩ Y_col⁻` / `(−Γ_J) ∩ Y⁻` grade
//! global maximizers.  A pair that meets the conditions without any of
//! those memberships earns only `KKTOnly` — deliberately not "local
//! optimum": reference problems in [`crate::corpus`] show such points can
//! be global maximizers of a minimization problem.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{self, DualError};
use crate::linalg;
use crate::model::Problem;
use crate::scalar::Scalar;
use crate::tol::Tolerances;

/// Optimization direction for certificates and solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// Measured violations of the stationarity/feasibility/sign/slackness
/// conditions for a pair `(x̄, λ̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LkktReport<T> {
    /// `‖∇ₓL(x̄, λ̄)‖`.
    pub stationarity_x: T,
    /// `max_{j∈J} |q_j(x̄)|`.
    pub eq_violation: T,
    /// `max_{j∈Jᶜ} max(0, q_j(x̄))`.
    pub ineq_violation: T,
    /// `max_{j∈Jᶜ} max(0, −λ̄_j)` (minimization; mirrored for maximization).
    pub sign_violation: T,
    /// `max_{j∈Jᶜ} |λ̄_j q_j(x̄)|`.
    pub compl_slack: T,
    /// All five scalars within the KKT tolerance.
    pub holds: bool,
}

fn check_lkkt_impl<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    lambda: &[T],
    sense: Sense,
    tol: &Tolerances<T>,
) -> LkktReport<T> {
    assert_eq!(x.len(), p.n(), "dimension mismatch");
    assert_eq!(lambda.len(), p.m(), "multiplier length must equal m");
    let stationarity_x = linalg::norm2(&dual::grad_x_lagrangian(p, x, lambda));
    let mut eq = T::zero();
    let mut ineq = T::zero();
    let mut sign = T::zero();
    let mut slack = T::zero();
    for j in 1..=p.m() {
        let qj = p.constraint(j).eval(x);
        let lj = lambda[j - 1];
        if p.is_equality(j) {
            eq = eq.max(qj.abs());
        } else {
            ineq = ineq.max(qj.max(T::zero()));
            let wrong_sign = match sense {
                Sense::Min => (-lj).max(T::zero()),
                Sense::Max => lj.max(T::zero()),
            };
            sign = sign.max(wrong_sign);
            slack = slack.max((lj * qj).abs());
        }
    }
    let holds = stationarity_x <= tol.kkt
        && eq <= tol.kkt
        && ineq <= tol.kkt
        && sign <= tol.kkt
        && slack <= tol.kkt;
    LkktReport {
        stationarity_x,
        eq_violation: eq,
        ineq_violation: ineq,
        sign_violation: sign,
        compl_slack: slack,
        holds,
    }
}

/// Checks the minimization-form conditions for `(x̄, λ̄)`.
pub fn check_lkkt<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    lambda: &[T],
    tol: &Tolerances<T>,
) -> LkktReport<T> {
    check_lkkt_impl(p, x, lambda, Sense::Min, tol)
}

/// Maximization variant: `λ̄_j ≤ 0` on `Jᶜ`, same feasibility and
/// slackness structure.
pub fn check_lkkt_max<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    lambda: &[T],
    tol: &Tolerances<T>,
) -> LkktReport<T> {
    check_lkkt_impl(p, x, lambda, Sense::Max, tol)
}

/// Per-sense dispatch.
pub fn check_lkkt_sense<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    lambda: &[T],
    sense: Sense,
    tol: &Tolerances<T>,
) -> LkktReport<T> {
    check_lkkt_impl(p, x, lambda, sense, tol)
}

/// The same conditions read off the dual: `∂D/∂λ_j = 0` on `J`,
/// `λ̄_j ≥ 0 ∧ ∂D/∂λ_j ≤ 0 ∧ λ̄_j ∂D/∂λ_j = 0` on `Jᶜ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualLkktReport<T> {
    /// `max_{j∈J} |∂D/∂λ_j|`.
    pub eq_grad_violation: T,
    /// `max_{j∈Jᶜ} max(0, ∂D/∂λ_j)`.
    pub ineq_grad_violation: T,
    /// `max_{j∈Jᶜ} max(0, −λ̄_j)`.
    pub sign_violation: T,
    /// `max_{j∈Jᶜ} |λ̄_j ∂D/∂λ_j|`.
    pub compl_slack: T,
    pub holds: bool,
}

/// Checks the conditions on `D` at `λ̄ ∈ Y₀`.
///
/// Because `∂D/∂λ_j = q_j(x(λ̄))` and `∇ₓL(x(λ̄), λ̄) = 0` by construction,
/// the verdict coincides with [`check_lkkt`] at `(x(λ̄), λ̄)`.
pub fn check_lkkt_dual<T: Scalar>(
    p: &Problem<T>,
    lambda: &[T],
    tol: &Tolerances<T>,
) -> Result<DualLkktReport<T>, DualError> {
    let ev = dual::eval_dual(p, lambda, tol).map_err(|_| DualError::NotInY0)?;
    if !ev.membership.in_y0 {
        return Err(DualError::NotInY0);
    }
    let grad = ev.gradient.expect("gradient exists on Y0");
    let mut eq = T::zero();
    let mut ineq = T::zero();
    let mut sign = T::zero();
    let mut slack = T::zero();
    for j in 1..=p.m() {
        let dj = grad[j - 1];
        let lj = lambda[j - 1];
        if p.is_equality(j) {
            eq = eq.max(dj.abs());
        } else {
            ineq = ineq.max(dj.max(T::zero()));
            sign = sign.max((-lj).max(T::zero()));
            slack = slack.max((lj * dj).abs());
        }
    }
    let holds = eq <= tol.kkt && ineq <= tol.kkt && sign <= tol.kkt && slack <= tol.kkt;
    Ok(DualLkktReport {
        eq_grad_violation: eq,
        ineq_grad_violation: ineq,
        sign_violation: sign,
        compl_slack: slack,
        holds,
    })
}

/// Strength of an optimality conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grade {
    UniqueGlobalMin,
    GlobalMin,
    UniqueGlobalMax,
    GlobalMax,
    #[serde(rename = "KKTOnly")]
    KktOnly,
    None,
}

impl Grade {
    pub fn is_global(&self) -> bool {
        matches!(
            self,
            Grade::UniqueGlobalMin | Grade::GlobalMin | Grade::UniqueGlobalMax | Grade::GlobalMax
        )
    }
}

/// What justifies a grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    /// `λ̄ ∈ Γ_J ∩ Y⁺` (resp. `(−Γ_J) ∩ Y⁻`): `L(·, λ̄)` strictly convex
    /// (concave), so the optimizer is unique.
    StrictConvexity,
    /// `λ̄ ∈ Γ_J ∩ Y_col⁺` (resp. `(−Γ_J) ∩ Y_col⁻`): convexity without
    /// strictness; global but possibly non-unique.
    ConvexityOnRange,
    /// Conditions hold but `A(λ̄)` is neither semidefinite of the right
    /// sign nor is `b(λ̄)` in its range; no global claim.
    KktConditions,
    None,
}

/// Graded optimality conclusion for a pair `(x̄, λ̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate<T> {
    pub grade: Grade,
    pub justification: Justification,
    /// `|q₀(x̄) − D(λ̄)|`; present whenever `λ̄ ∈ Y_col`.
    pub duality_gap: Option<T>,
}

impl<T: Scalar> Certificate<T> {
    fn none(gap: Option<T>) -> Self {
        Certificate {
            grade: Grade::None,
            justification: Justification::None,
            duality_gap: gap,
        }
    }
}

/// Grades `(x̄, λ̄)` for the given sense.
///
/// Any grade other than `None` additionally requires the measured duality
/// gap to be below `τ_kkt · (1 + |q₀(x̄)|)`; a pair whose conditions hold
/// but whose gap is numerically out of band is downgraded to `None`.
pub fn certify<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    lambda: &[T],
    sense: Sense,
    tol: &Tolerances<T>,
) -> Certificate<T> {
    let report = check_lkkt_impl(p, x, lambda, sense, tol);
    let membership = dual::classify_membership(p, lambda, tol);
    let q0 = p.objective().eval(x);
    let gap = dual::eval_dual(p, lambda, tol)
        .ok()
        .map(|ev| (q0 - ev.value).abs());

    if !report.holds {
        return Certificate::none(gap);
    }
    let gap_ok = matches!(gap, Some(g) if g <= tol.kkt * (T::one() + q0.abs()));
    if !gap_ok {
        return Certificate::none(gap);
    }

    let (grade, justification) = match sense {
        Sense::Min => {
            if membership.in_yjplus {
                (Grade::UniqueGlobalMin, Justification::StrictConvexity)
            } else if membership.in_gamma_j && membership.in_ycol_plus {
                (Grade::GlobalMin, Justification::ConvexityOnRange)
            } else {
                (Grade::KktOnly, Justification::KktConditions)
            }
        }
        Sense::Max => {
            if membership.in_yjminus {
                (Grade::UniqueGlobalMax, Justification::StrictConvexity)
            } else if membership.in_ycol_minus && neg_gamma(p, lambda, tol) {
                (Grade::GlobalMax, Justification::ConvexityOnRange)
            } else {
                (Grade::KktOnly, Justification::KktConditions)
            }
        }
    };
    Certificate {
        grade,
        justification,
        duality_gap: gap,
    }
}

fn neg_gamma<T: Scalar>(p: &Problem<T>, lambda: &[T], tol: &Tolerances<T>) -> bool {
    p.inequality_indices()
        .iter()
        .all(|&j| lambda[j - 1] <= tol.feas)
}

#[derive(Debug, Error)]
pub enum KktError {
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

/// Drops equality indices with nonnegative multipliers from `J`.
///
/// At a pair satisfying the `J`-conditions with `A(λ̄) ⪰ 0`, the indices
/// `J_≥ = {j ∈ J : λ̄_j ≥ 0}` can be relaxed to inequalities: the pair
/// satisfies the `(J \ J_≥)`-conditions, and `x̄` is a global minimizer on
/// the larger feasible set `X_{J \ J_≥} ⊇ X_J`.  Returns the relaxed index
/// set and a certificate recomputed on the relaxed problem.
pub fn relax_equalities<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    lambda: &[T],
    tol: &Tolerances<T>,
) -> Result<(BTreeSet<usize>, Certificate<T>), KktError> {
    let report = check_lkkt(p, x, lambda, tol);
    if !report.holds {
        return Err(KktError::PreconditionFailed(
            "pair does not satisfy the KKT conditions".into(),
        ));
    }
    let defin = linalg::classify_definiteness(&dual::hess_x_lagrangian(p, lambda), tol);
    if !defin.is_psd() {
        return Err(KktError::PreconditionFailed(
            "A(lambda) is not positive semidefinite".into(),
        ));
    }
    let relaxed: BTreeSet<usize> = p
        .equality_set()
        .iter()
        .copied()
        .filter(|&j| lambda[j - 1] < -tol.feas)
        .collect();
    let relaxed_problem = p
        .with_equality_set(relaxed.clone())
        .expect("subset of a valid index set stays valid");
    let certificate = certify(&relaxed_problem, x, lambda, Sense::Min, tol);
    Ok((relaxed, certificate))
}

/// Checks the monotonicity law between nested equality sets `J ⊆ J′`:
/// a `J′`-pair with `λ̄_j ≥ 0` on `J′ \ J` must satisfy the `J`-conditions,
/// and a `J`-pair with `λ̄_j > 0` on `J′ \ J` must satisfy the
/// `J′`-conditions.  Returns whether both implications hold for the given
/// data (vacuous premises count as satisfied).
pub fn lkkt_monotone<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    lambda: &[T],
    j_small: &BTreeSet<usize>,
    j_large: &BTreeSet<usize>,
    tol: &Tolerances<T>,
) -> bool {
    assert!(
        j_small.is_subset(j_large),
        "lkkt_monotone requires J ⊆ J′"
    );
    let p_small = p
        .with_equality_set(j_small.clone())
        .expect("valid index set");
    let p_large = p
        .with_equality_set(j_large.clone())
        .expect("valid index set");
    let small_holds = check_lkkt(&p_small, x, lambda, tol).holds;
    let large_holds = check_lkkt(&p_large, x, lambda, tol).holds;
    let diff: Vec<usize> = j_large.difference(j_small).copied().collect();
    let nonneg_on_diff = diff.iter().all(|&j| lambda[j - 1] >= -tol.feas);
    let strictly_pos_on_diff = diff.iter().all(|&j| lambda[j - 1] > tol.feas);

    let forward = !(large_holds && nonneg_on_diff) || small_holds;
    let converse = !(small_holds && strictly_pos_on_diff) || large_holds;
    forward && converse
}

/// Perfect-duality residual `|q₀(x̄) − L(x̄, λ̄)| + |L(x̄, λ̄) − D(λ̄)|`,
/// which must be ≤ `1e-8 · (1 + |q₀(x̄)|)` at every pair satisfying the
/// KKT conditions.  Exposed for reuse by test suites.
pub fn perfect_duality_residual<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    lambda: &[T],
    tol: &Tolerances<T>,
) -> Result<T, DualError> {
    let q0 = p.objective().eval(x);
    let l = dual::lagrangian(p, x, lambda);
    let d = dual::eval_dual(p, lambda, tol)?.value;
    Ok((q0 - l).abs() + (l - d).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::model::QuadForm;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn circle_eq() -> Problem<f64> {
        let objective = QuadForm::new(
            SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            vec![0.0, 0.0],
            0.0,
        );
        let c1 = QuadForm::new(SymMatrix::identity(2), vec![0.0, 0.0], -0.5);
        Problem::new(objective, vec![c1], BTreeSet::from([1])).unwrap()
    }

    fn indefinite_box() -> Problem<f64> {
        let objective = QuadForm::new(
            SymMatrix::from_rows(&[vec![-1.0, 1.0], vec![1.0, -3.0]]),
            vec![0.0, -1.0],
            0.0,
        );
        let c1 = QuadForm::new(
            SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]),
            vec![0.0, 0.0],
            -0.5,
        );
        let c2 = QuadForm::new(
            SymMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]),
            vec![0.0, 0.0],
            -0.5,
        );
        Problem::new(objective, vec![c1, c2], BTreeSet::new()).unwrap()
    }

    #[test]
    fn lkkt_on_box_critical_points() {
        let p = indefinite_box();
        assert!(check_lkkt(&p, &[1.0, -1.0], &[2.0, 5.0], &tol()).holds);
        // Wrong point for those multipliers: stationarity fails.
        let rep = check_lkkt(&p, &[1.0, 1.0], &[2.0, 5.0], &tol());
        assert!(!rep.holds);
        assert!(rep.stationarity_x > 1e-3);
    }

    #[test]
    fn lkkt_unconstrained() {
        // m = 0: only stationarity matters.
        let objective = QuadForm::new(SymMatrix::identity(2), vec![1.0, 0.0], 0.0);
        let p = Problem::new(objective, vec![], BTreeSet::new()).unwrap();
        assert!(check_lkkt(&p, &[1.0, 0.0], &[], &tol()).holds);
        assert!(!check_lkkt(&p, &[0.0, 0.0], &[], &tol()).holds);
    }

    #[test]
    fn max_variant_sign() {
        let p = circle_eq();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert!(check_lkkt_max(&p, &[a, a], &[-1.0], &tol()).holds);
        // Positive multiplier on an inequality index fails the max variant.
        let pi = p.with_equality_set(BTreeSet::new()).unwrap();
        let rep = check_lkkt_max(&pi, &[a, -a], &[1.0], &tol());
        assert!(!rep.holds);
        assert!(rep.sign_violation > 0.5);
    }

    #[test]
    fn dual_lkkt_matches_primal() {
        let p = indefinite_box();
        let rep = check_lkkt_dual(&p, &[2.0, 5.0], &tol()).unwrap();
        assert!(rep.holds);
        // λ = 3/2 for the 1-d problem with J = {1}.
        let objective = QuadForm::new(SymMatrix::from_rows(&[vec![-1.0]]), vec![0.5], 0.0);
        let c1 = QuadForm::new(SymMatrix::from_rows(&[vec![1.0]]), vec![0.0], -0.5);
        let pe = Problem::new(objective, vec![c1], BTreeSet::from([1])).unwrap();
        assert!(check_lkkt_dual(&pe, &[1.5], &tol()).unwrap().holds);
        // Singular A(λ): refused.
        assert!(matches!(
            check_lkkt_dual(&circle_eq(), &[1.0], &tol()),
            Err(DualError::NotInY0)
        ));
    }

    #[test]
    fn certify_reference_points() {
        let t = tol();
        // Box problem: (1,−1) with (2,5) is the unique global minimum.
        let p = indefinite_box();
        let c = certify(&p, &[1.0, -1.0], &[2.0, 5.0], Sense::Min, &t);
        assert_eq!(c.grade, Grade::UniqueGlobalMin);
        assert!(c.duality_gap.unwrap() < 1e-12);
        // (1,1) with (0,1): conditions hold, A(λ) ≺ 0 — no global claim.
        let c = certify(&p, &[1.0, 1.0], &[0.0, 1.0], Sense::Min, &t);
        assert_eq!(c.grade, Grade::KktOnly);
        // Circle problem at the singular multiplier: global, not unique.
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let pc = circle_eq();
        let c = certify(&pc, &[a, -a], &[1.0], Sense::Min, &t);
        assert_eq!(c.grade, Grade::GlobalMin);
        assert_eq!(c.justification, Justification::ConvexityOnRange);
        let c = certify(&pc, &[a, a], &[-1.0], Sense::Max, &t);
        assert_eq!(c.grade, Grade::GlobalMax);
        // Non-KKT pair grades None.
        let c = certify(&pc, &[1.0, 0.0], &[1.0], Sense::Min, &t);
        assert_eq!(c.grade, Grade::None);
    }

    #[test]
    fn relax_drops_nonnegative_equality_multipliers() {
        let t = tol();
        // Circle problem as J = {1}: λ̄ = 1 ≥ 0, A(1) ⪰ 0 ⇒ relax to the
        // disk and keep a global-minimum certificate.
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let p = circle_eq();
        let (j2, cert) = relax_equalities(&p, &[a, -a], &[1.0], &t).unwrap();
        assert!(j2.is_empty());
        assert_eq!(cert.grade, Grade::GlobalMin);
        // Indefinite A(λ̄) is refused.
        let pb = indefinite_box().with_equality_set(BTreeSet::from([1, 2])).unwrap();
        assert!(relax_equalities(&pb, &[1.0, 1.0], &[0.0, 1.0], &t).is_err());
    }

    #[test]
    fn monotone_between_nested_sets() {
        let t = tol();
        let p = indefinite_box();
        let x = [1.0, -1.0];
        let lam = [2.0, 5.0];
        let empty = BTreeSet::new();
        let full = BTreeSet::from([1, 2]);
        // Both directions of the implication hold at this critical point.
        assert!(lkkt_monotone(&p, &x, &lam, &empty, &full, &t));
        assert!(lkkt_monotone(&p, &x, &lam, &empty, &empty, &t));
        assert!(lkkt_monotone(&p, &x, &lam, &full, &full, &t));
    }

    #[test]
    fn perfect_duality_at_critical_points() {
        let t = tol();
        let p = indefinite_box();
        for (x, lam) in [
            ([1.0, -1.0], [2.0, 5.0]),
            ([1.0, 1.0], [0.0, 1.0]),
            ([-1.0, -1.0], [0.0, 3.0]),
            ([-1.0, 1.0], [2.0, 3.0]),
        ] {
            let q0 = p.objective().eval(&x);
            let r = perfect_duality_residual(&p, &x, &lam, &t).unwrap();
            assert!(r <= 1e-8 * (1.0 + q0.abs()));
        }
    }
}
