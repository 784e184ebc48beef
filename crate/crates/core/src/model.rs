//! Problem schema: quadratic forms, constrained problems, feasibility
//! tests, and the JSON wire format.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsonfmt;
use crate::linalg::{self, SymMatrix};
use crate::scalar::Scalar;
use crate::tol::Tolerances;

/// One quadratic function `q(x) = ½⟨x, A x⟩ − ⟨b, x⟩ + c`.
///
/// Note the minus in front of the linear term; all formulas in this crate
/// follow that sign convention.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm<T> {
    pub a: SymMatrix<T>,
    pub b: Vec<T>,
    pub c: T,
}

impl<T: Scalar> QuadForm<T> {
    pub fn new(a: SymMatrix<T>, b: Vec<T>, c: T) -> Self {
        assert_eq!(a.dim(), b.len(), "A and b must share the dimension");
        QuadForm { a, b, c }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// `½⟨x, A x⟩ − ⟨b, x⟩ + c`.
    pub fn eval(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        let ax = self.a.mul_vec(x);
        T::of(0.5) * linalg::dot(x, &ax) - linalg::dot(&self.b, x) + self.c
    }

    /// `∇q(x) = A x − b`.
    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        let mut g = self.a.mul_vec(x);
        for (gi, &bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        g
    }

    /// The form with `A`, `b`, `c` all negated (`q ↦ −q`).
    pub fn negated(&self) -> Self {
        let n = self.dim();
        let mut a = SymMatrix::zeros(n);
        a.scaled_add(-T::one(), &self.a);
        QuadForm {
            a,
            b: self.b.iter().map(|&v| -v).collect(),
            c: -self.c,
        }
    }
}

/// A quadratic program: minimize (or maximize) `q₀` subject to
/// `q_j(x) = 0` for `j ∈ J` and `q_j(x) ≤ 0` for `j ∉ J`.
///
/// Constraint indices are 1-based throughout, matching the wire format.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<T> {
    objective: QuadForm<T>,
    constraints: Vec<QuadForm<T>>,
    equality: BTreeSet<usize>,
}

impl<T: Scalar> Problem<T> {
    pub fn new(
        objective: QuadForm<T>,
        constraints: Vec<QuadForm<T>>,
        equality: BTreeSet<usize>,
    ) -> Result<Self, ModelError> {
        let n = objective.dim();
        if constraints.iter().any(|q| q.dim() != n) {
            return Err(ModelError::DimensionMismatch);
        }
        let m = constraints.len();
        if let Some(&j) = equality.iter().find(|&&j| j == 0 || j > m) {
            return Err(ModelError::IndexOutOfRange { index: j, m });
        }
        Ok(Problem {
            objective,
            constraints,
            equality,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.objective.dim()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    #[inline]
    pub fn objective(&self) -> &QuadForm<T> {
        &self.objective
    }

    #[inline]
    pub fn constraints(&self) -> &[QuadForm<T>] {
        &self.constraints
    }

    /// Constraint `q_j`, 1-based.
    #[inline]
    pub fn constraint(&self, j: usize) -> &QuadForm<T> {
        &self.constraints[j - 1]
    }

    /// The equality index set `J` (1-based).
    #[inline]
    pub fn equality_set(&self) -> &BTreeSet<usize> {
        &self.equality
    }

    #[inline]
    pub fn is_equality(&self, j: usize) -> bool {
        self.equality.contains(&j)
    }

    /// Inequality indices `Jᶜ = {1..m} \ J`, ascending.
    pub fn inequality_indices(&self) -> Vec<usize> {
        (1..=self.m()).filter(|j| !self.is_equality(*j)).collect()
    }

    /// Same data with a different equality index set.
    pub fn with_equality_set(&self, equality: BTreeSet<usize>) -> Result<Self, ModelError> {
        Problem::new(self.objective.clone(), self.constraints.clone(), equality)
    }

    /// Same data with every constraint negated (`q_j ↦ −q_j`, `j ≥ 1`).
    pub fn with_negated_constraints(&self) -> Self {
        Problem {
            objective: self.objective.clone(),
            constraints: self.constraints.iter().map(QuadForm::negated).collect(),
            equality: self.equality.clone(),
        }
    }

    /// Everything negated, objective included.
    pub fn fully_negated(&self) -> Self {
        Problem {
            objective: self.objective.negated(),
            constraints: self.constraints.iter().map(QuadForm::negated).collect(),
            equality: self.equality.clone(),
        }
    }
}

/// Feasibility of a point, split by constraint kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport<T> {
    pub feasible: bool,
    /// `max_{j∈J} |q_j(x)|` (0 when `J = ∅`).
    pub eq_violation: T,
    /// `max_{j∉J} max(0, q_j(x))` (0 when `Jᶜ = ∅`).
    pub ineq_violation: T,
}

/// Checks `x ∈ X_J` within the feasibility tolerance.
pub fn check_feasible<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    tol: &Tolerances<T>,
) -> FeasibilityReport<T> {
    assert_eq!(x.len(), p.n(), "dimension mismatch");
    let mut eq = T::zero();
    let mut ineq = T::zero();
    for j in 1..=p.m() {
        let v = p.constraint(j).eval(x);
        if p.is_equality(j) {
            eq = eq.max(v.abs());
        } else {
            ineq = ineq.max(v.max(T::zero()));
        }
    }
    FeasibilityReport {
        feasible: eq <= tol.feas && ineq <= tol.feas,
        eq_violation: eq,
        ineq_violation: ineq,
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch between problem data")]
    DimensionMismatch,
    #[error("J index out of range: {index} with m = {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("matrix {which} is asymmetric beyond tolerance: |a[{i}][{j}] - a[{j}][{i}]| = {delta}")]
    Asymmetric {
        which: String,
        i: usize,
        j: usize,
        delta: f64,
    },
    #[error("schema violation: {0}")]
    Schema(String),
}

// ---------------------------------------------------------------------------
// JSON wire format (f64 only).
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct QuadFormJson {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    n: usize,
    m: usize,
    objective: QuadFormJson,
    constraints: Vec<QuadFormJson>,
    equality_indices: Vec<usize>,
}

/// Asymmetry band: raw input is rejected (not silently symmetrized) when
/// any `|a_ij − a_ji|` exceeds `1e-12 · max(1, max |a_ij|)`.
const ASYM_BAND: f64 = 1e-12;

fn quadform_from_json(q: &QuadFormJson, n: usize, which: &str) -> Result<QuadForm<f64>, ModelError> {
    if q.a.len() != n || q.a.iter().any(|r| r.len() != n) {
        return Err(ModelError::Schema(format!(
            "{which}: A must be {n}x{n}"
        )));
    }
    if q.b.len() != n {
        return Err(ModelError::Schema(format!("{which}: b must have length {n}")));
    }
    let max_abs = q
        .a
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, &v| acc.max(v.abs()));
    let band = ASYM_BAND * max_abs.max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            let delta = (q.a[i][j] - q.a[j][i]).abs();
            if delta > band {
                return Err(ModelError::Asymmetric {
                    which: which.to_string(),
                    i,
                    j,
                    delta,
                });
            }
        }
    }
    Ok(QuadForm::new(SymMatrix::from_rows(&q.a), q.b.clone(), q.c))
}

fn quadform_to_json(q: &QuadForm<f64>) -> QuadFormJson {
    let n = q.dim();
    QuadFormJson {
        a: (0..n)
            .map(|i| (0..n).map(|j| q.a.get(i, j)).collect())
            .collect(),
        b: q.b.clone(),
        c: q.c,
    }
}

/// Parses a problem document.
///
/// Schema:
/// ```json
/// { "n": 2, "m": 1,
///   "objective":   {"A": [[0,1],[1,0]], "b": [0,0], "c": 0},
///   "constraints": [{"A": [[1,0],[0,1]], "b": [0,0], "c": -0.5}],
///   "equality_indices": [1] }
/// ```
pub fn load_problem(text: &str) -> Result<Problem<f64>, ModelError> {
    let raw: ProblemJson =
        serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
    if raw.n == 0 {
        return Err(ModelError::Schema("n must be positive".into()));
    }
    if raw.constraints.len() != raw.m {
        return Err(ModelError::Schema(format!(
            "m = {} but {} constraints given",
            raw.m,
            raw.constraints.len()
        )));
    }
    let objective = quadform_from_json(&raw.objective, raw.n, "objective")?;
    let mut constraints = Vec::with_capacity(raw.m);
    for (k, q) in raw.constraints.iter().enumerate() {
        constraints.push(quadform_from_json(q, raw.n, &format!("constraint {}", k + 1))?);
    }
    let equality: BTreeSet<usize> = raw.equality_indices.iter().copied().collect();
    Problem::new(objective, constraints, equality)
}

/// Serializes a problem with 17-significant-digit floats, so that
/// `load_problem(save_problem(p)) == p`.
pub fn save_problem(p: &Problem<f64>) -> String {
    let raw = ProblemJson {
        n: p.n(),
        m: p.m(),
        objective: quadform_to_json(p.objective()),
        constraints: p.constraints().iter().map(quadform_to_json).collect(),
        equality_indices: p.equality_set().iter().copied().collect(),
    };
    jsonfmt::to_string_17_pretty(&raw).expect("problem serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    /// q₀(x,y) = xy, q₁ = ½(x²+y²−1), equality-constrained.
    fn circle_problem() -> Problem<f64> {
        let objective = QuadForm::new(
            SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            vec![0.0, 0.0],
            0.0,
        );
        let c1 = QuadForm::new(SymMatrix::identity(2), vec![0.0, 0.0], -0.5);
        Problem::new(objective, vec![c1], BTreeSet::from([1])).unwrap()
    }

    #[test]
    fn eval_bilinear_form() {
        let p = circle_problem();
        assert_eq!(p.objective().eval(&[1.0, 1.0]), 1.0);
        // x = 0 returns the constant term.
        assert_eq!(p.constraint(1).eval(&[0.0, 0.0]), -0.5);
    }

    #[test]
    fn eval_1d_concave() {
        // q(x) = −½(x² + x): A = [−1], b = (½), c = 0.
        let q = QuadForm::new(SymMatrix::from_rows(&[vec![-1.0]]), vec![0.5], 0.0);
        assert_eq!(q.eval(&[1.0]), -1.0);
    }

    #[test]
    fn feasibility_on_circle() {
        let p = circle_problem();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let rep = check_feasible(&p, &[a, -a], &tol());
        assert!(rep.feasible);
        let rep = check_feasible(&p, &[0.0, 0.0], &tol());
        assert!(!rep.feasible);
        assert!((rep.eq_violation - 0.5).abs() < 1e-15);
    }

    #[test]
    fn feasibility_without_equalities_reports_no_eq_violation() {
        let p = circle_problem().with_equality_set(BTreeSet::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let rep = check_feasible(&p, &x, &tol());
            assert_eq!(rep.eq_violation, 0.0);
        }
    }

    #[test]
    fn sign_convention() {
        // q(x) − q(0) − (½⟨x,Ax⟩ − ⟨b,x⟩) = 0.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(1..5);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let q = QuadForm::new(
                SymMatrix::from_rows(&rows),
                (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                rng.gen_range(-2.0..2.0),
            );
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let zero = vec![0.0; n];
            let pure = 0.5 * linalg::dot(&x, &q.a.mul_vec(&x)) - linalg::dot(&q.b, &x);
            assert!((q.eval(&x) - q.eval(&zero) - pure).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = circle_problem();
        let text = save_problem(&p);
        let p2 = load_problem(&text).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn json_rejects_out_of_range_equality_index() {
        let text = r#"{ "n": 1, "m": 2,
            "objective": {"A": [[1.0]], "b": [0.0], "c": 0.0},
            "constraints": [
              {"A": [[1.0]], "b": [0.0], "c": -0.5},
              {"A": [[1.0]], "b": [0.0], "c": -0.5}],
            "equality_indices": [3] }"#;
        let err = load_problem(text).unwrap_err();
        assert!(err.to_string().contains("J index out of range"));
    }

    #[test]
    fn json_rejects_asymmetry_beyond_band() {
        let text = r#"{ "n": 2, "m": 0,
            "objective": {"A": [[0.0, 1.0], [1.00001, 0.0]], "b": [0.0, 0.0], "c": 0.0},
            "constraints": [], "equality_indices": [] }"#;
        assert!(matches!(
            load_problem(text),
            Err(ModelError::Asymmetric { .. })
        ));
    }

    #[test]
    fn json_accepts_unconstrained() {
        let text = r#"{ "n": 1, "m": 0,
            "objective": {"A": [[2.0]], "b": [1.0], "c": 0.0},
            "constraints": [], "equality_indices": [] }"#;
        let p = load_problem(text).unwrap();
        assert_eq!(p.m(), 0);
        assert_eq!(p.n(), 1);
    }
}
