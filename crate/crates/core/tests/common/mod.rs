//! Shared generators for the integration suites.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qdual_core::linalg::SymMatrix;
use qdual_core::model::{Problem, QuadForm};

pub fn rand_sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymMatrix<f64> {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect();
    SymMatrix::from_rows(&rows)
}

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn rand_quadform(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> QuadForm<f64> {
    QuadForm::new(
        rand_sym(rng, n, scale),
        rand_vec(rng, n, scale),
        rng.gen_range(-scale..scale),
    )
}

/// Random PSD matrix `G Gᵀ` of the given rank.
pub fn rand_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> SymMatrix<f64> {
    let g: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..rank).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[i][j] = (0..rank).map(|k| g[i][k] * g[j][k]).sum();
        }
    }
    SymMatrix::from_rows(&rows)
}

/// Fully random instance with a random equality index set.
pub fn rand_problem(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Problem<f64> {
    let objective = rand_quadform(rng, n, 1.0);
    let constraints: Vec<_> = (0..m).map(|_| rand_quadform(rng, n, 1.0)).collect();
    let equality: BTreeSet<usize> = (1..=m).filter(|_| rng.gen_bool(0.5)).collect();
    Problem::new(objective, constraints, equality).unwrap()
}

/// Random instance whose first constraint has identity curvature, so both
/// `Y⁺` and `Y⁻` are nonempty.
pub fn rand_problem_with_identity(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Problem<f64> {
    assert!(m >= 1);
    let objective = rand_quadform(rng, n, 1.0);
    let mut constraints = vec![QuadForm::new(
        SymMatrix::identity(n),
        vec![0.0; n],
        rng.gen_range(-1.0..0.0),
    )];
    for _ in 1..m {
        constraints.push(rand_quadform(rng, n, 1.0));
    }
    let equality: BTreeSet<usize> = (1..=m).filter(|_| rng.gen_bool(0.5)).collect();
    Problem::new(objective, constraints, equality).unwrap()
}

/// Lattice problem `x_j² − x_j = 0` for all coordinates with a random
/// quadratic objective; the feasible set is `{0,1}ⁿ`.
pub fn boolean_instance(rng: &mut ChaCha8Rng, n: usize) -> Problem<f64> {
    let objective = QuadForm::new(rand_sym(rng, n, 1.0), rand_vec(rng, n, 1.0), 0.0);
    let mut constraints = Vec::with_capacity(n);
    for j in 0..n {
        let mut a = SymMatrix::zeros(n);
        a.set_sym(j, j, 2.0);
        let mut b = vec![0.0; n];
        b[j] = 1.0;
        constraints.push(QuadForm::new(a, b, 0.0));
    }
    Problem::new(objective, constraints, (1..=n).collect()).unwrap()
}
