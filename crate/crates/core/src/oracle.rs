//! Brute-force ground truth: exhaustive lattice enumeration, dense
//! sampling of low-dimensional feasible sets, and local perturbation
//! probes.
//!
//! These are test instruments, deliberately independent of the dual
//! machinery: they touch only `QuadForm::eval` and `check_feasible`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::kkt::Sense;
use crate::linalg;
use crate::model::{check_feasible, Problem, QuadForm};
use crate::scalar::Scalar;
use crate::tol::Tolerances;

/// Sampling strategy of an oracle run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleMode {
    Enumerate01,
    EnumeratePM1,
    GridBox,
    CircleParam,
    RandomFeasible,
}

/// Lattice alphabet for discrete enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscreteAlphabet {
    ZeroOne,
    PlusMinusOne,
}

/// Best value found, with every feasible point that attains it.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult<T> {
    /// Optimal value in the requested sense (smallest for `Min`).
    pub best_value: T,
    /// All feasible evaluated points within `1e-9·(1+|best|)` of the best,
    /// sorted lexicographically.
    pub argmins: Vec<Vec<T>>,
    pub points_evaluated: usize,
    pub mode: OracleMode,
    /// For grid/arc sampling, a Lipschitz bound on how far `best_value`
    /// can sit above the true optimum (`‖∇q₀‖_max · covering radius`);
    /// zero for exhaustive enumeration, absent for rejection sampling.
    pub slack: Option<T>,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dimension {n} exceeds the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("no feasible point found")]
    EmptyFeasible,
    #[error("constraint structure not recognized for this sampling mode")]
    UnrecognizedStructure,
    #[error("no feasible neighbors found within the radius")]
    NoFeasibleNeighbors,
    #[error("the reference point is not feasible")]
    InfeasiblePoint,
}

const ENUM_CAP: usize = 24;

struct BestTracker<T> {
    sense: Sense,
    best: Option<T>,
    points: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> BestTracker<T> {
    fn new(sense: Sense) -> Self {
        BestTracker {
            sense,
            best: None,
            points: Vec::new(),
        }
    }

    fn value_tol(best: T) -> T {
        T::of(1e-9) * (T::one() + best.abs())
    }

    fn offer(&mut self, x: Vec<T>, value: T) {
        let better = match (self.sense, self.best) {
            (_, None) => true,
            (Sense::Min, Some(b)) => value < b,
            (Sense::Max, Some(b)) => value > b,
        };
        if better {
            self.best = Some(value);
            let keep = Self::value_tol(value);
            self.points.retain(|(_, v)| (*v - value).abs() <= keep);
        }
        let best = self.best.expect("set above");
        if (value - best).abs() <= Self::value_tol(best) {
            self.points.push((x, value));
        }
    }

    fn into_result(
        self,
        points_evaluated: usize,
        mode: OracleMode,
        slack: Option<T>,
    ) -> Result<OracleResult<T>, OracleError> {
        let best = self.best.ok_or(OracleError::EmptyFeasible)?;
        let keep = Self::value_tol(best);
        let mut argmins: Vec<Vec<T>> = self
            .points
            .into_iter()
            .filter(|(_, v)| (*v - best).abs() <= keep)
            .map(|(x, _)| x)
            .collect();
        argmins.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .find_map(|(x, y)| match x.partial_cmp(y).expect("finite coordinates") {
                    std::cmp::Ordering::Equal => None,
                    ord => Some(ord),
                })
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        argmins.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| x == y));
        Ok(OracleResult {
            best_value: best,
            argmins,
            points_evaluated,
            mode,
            slack,
        })
    }
}

/// Exact optimum of `q₀` over the feasible lattice points of
/// `{0,1}ⁿ` or `{−1,1}ⁿ` (infeasible points are skipped).
pub fn enumerate_discrete<T: Scalar>(
    p: &Problem<T>,
    alphabet: DiscreteAlphabet,
    sense: Sense,
    tol: &Tolerances<T>,
) -> Result<OracleResult<T>, OracleError> {
    let n = p.n();
    if n > ENUM_CAP {
        return Err(OracleError::TooLarge { n, cap: ENUM_CAP });
    }
    let (lo, hi) = match alphabet {
        DiscreteAlphabet::ZeroOne => (T::zero(), T::one()),
        DiscreteAlphabet::PlusMinusOne => (-T::one(), T::one()),
    };
    let mode = match alphabet {
        DiscreteAlphabet::ZeroOne => OracleMode::Enumerate01,
        DiscreteAlphabet::PlusMinusOne => OracleMode::EnumeratePM1,
    };
    let mut tracker = BestTracker::new(sense);
    let total = 1usize << n;
    let mut x = vec![lo; n];
    for bits in 0..total {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = if bits >> i & 1 == 1 { hi } else { lo };
        }
        if check_feasible(p, &x, tol).feasible {
            tracker.offer(x.clone(), p.objective().eval(&x));
        }
    }
    tracker.into_result(total, mode, Some(T::zero()))
}

/// Per-coordinate interval carved by one single-variable constraint.
fn box_intervals<T: Scalar>(p: &Problem<T>) -> Option<Vec<(T, T)>> {
    let n = p.n();
    if p.m() != n {
        return None;
    }
    let mut intervals: Vec<Option<(T, T)>> = vec![None; n];
    for q in p.constraints() {
        // Diagonal A with exactly one positive entry, b supported there.
        let mut coord = None;
        for i in 0..n {
            for j in 0..n {
                let v = q.a.get(i, j);
                if i == j {
                    if v != T::zero() {
                        if v < T::zero() || coord.is_some() {
                            return None;
                        }
                        coord = Some(i);
                    }
                } else if v != T::zero() {
                    return None;
                }
            }
        }
        let k = coord?;
        if (0..n).any(|i| i != k && q.b[i] != T::zero()) {
            return None;
        }
        let d = q.a.get(k, k);
        let beta = q.b[k];
        let disc = beta * beta - T::of(2.0) * d * q.c;
        if disc < T::zero() {
            return None;
        }
        let sq = disc.sqrt();
        let (lo, hi) = ((beta - sq) / d, (beta + sq) / d);
        if intervals[k].is_some() {
            return None;
        }
        intervals[k] = Some((lo, hi));
    }
    intervals.into_iter().collect()
}

/// A single sphere constraint `α/2 ‖x‖² + c ≤ 0` in the plane.
fn circle_radius<T: Scalar>(p: &Problem<T>) -> Option<T> {
    if p.n() != 2 || p.m() != 1 {
        return None;
    }
    let q = p.constraint(1);
    let alpha = q.a.get(0, 0);
    if alpha <= T::zero()
        || (q.a.get(1, 1) - alpha).abs() > T::of(1e-14) * alpha
        || q.a.get(0, 1) != T::zero()
        || q.b.iter().any(|&v| v != T::zero())
        || q.c >= T::zero()
    {
        return None;
    }
    Some((-T::of(2.0) * q.c / alpha).sqrt())
}

/// Gradient bound `‖A₀‖₂ R + ‖b₀‖` over a region of radius `R`.
fn gradient_bound<T: Scalar>(q0: &QuadForm<T>, region_radius: T) -> T {
    let spec = linalg::eig_sym(&q0.a).spectral_norm();
    spec * region_radius + linalg::norm2(&q0.b)
}

/// Approximate optimum by dense sampling.
///
/// `GridBox` requires every constraint to carve one coordinate interval
/// (diagonal single-entry `A_j`); `CircleParam` requires a single sphere
/// constraint in the plane and samples its boundary arc; `RandomFeasible`
/// rejection-samples a `[−10, 10]ⁿ` box with the given seed.  `resolution`
/// is points per dimension, per arc, or accepted samples respectively.
pub fn sample_continuous<T: Scalar>(
    p: &Problem<T>,
    mode: OracleMode,
    resolution: usize,
    sense: Sense,
    seed: u64,
    tol: &Tolerances<T>,
) -> Result<OracleResult<T>, OracleError> {
    assert!(resolution >= 2, "resolution must be at least 2");
    let mut tracker = BestTracker::new(sense);
    match mode {
        OracleMode::GridBox => {
            let intervals = box_intervals(p).ok_or(OracleError::UnrecognizedStructure)?;
            let n = p.n();
            let total = resolution.pow(n as u32);
            assert!(total <= 100_000_000, "grid too large");
            let mut idx = vec![0usize; n];
            let mut x = vec![T::zero(); n];
            for _ in 0..total {
                for i in 0..n {
                    let (lo, hi) = intervals[i];
                    let frac = T::of_usize(idx[i]) / T::of_usize(resolution - 1);
                    x[i] = lo + (hi - lo) * frac;
                }
                if check_feasible(p, &x, tol).feasible {
                    tracker.offer(x.clone(), p.objective().eval(&x));
                }
                for digit in idx.iter_mut() {
                    *digit += 1;
                    if *digit < resolution {
                        break;
                    }
                    *digit = 0;
                }
            }
            let mesh_sq: T = intervals
                .iter()
                .map(|&(lo, hi)| {
                    let h = (hi - lo) / T::of_usize(resolution - 1);
                    h * h
                })
                .sum();
            let region = intervals
                .iter()
                .map(|&(lo, hi)| lo.abs().max(hi.abs()))
                .fold(T::zero(), |acc, v| acc + v * v)
                .sqrt();
            let slack = gradient_bound(p.objective(), region) * mesh_sq.sqrt() * T::of(0.5);
            tracker.into_result(total, mode, Some(slack))
        }
        OracleMode::CircleParam => {
            let radius = circle_radius(p).ok_or(OracleError::UnrecognizedStructure)?;
            let pi = T::of(std::f64::consts::PI);
            for k in 0..resolution {
                // t ∈ (−π, π].
                let t = -pi + T::of(2.0) * pi * T::of_usize(k + 1) / T::of_usize(resolution);
                let x = vec![radius * t.cos(), radius * t.sin()];
                if check_feasible(p, &x, tol).feasible {
                    tracker.offer(x.clone(), p.objective().eval(&x));
                }
            }
            let arc = pi * radius / T::of_usize(resolution);
            let slack = gradient_bound(p.objective(), radius) * arc;
            tracker.into_result(resolution, mode, Some(slack))
        }
        OracleMode::RandomFeasible => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bound = 10.0;
            let mut accepted = 0usize;
            let mut rejections = 0usize;
            let mut evaluated = 0usize;
            while accepted < resolution {
                let x: Vec<T> = (0..p.n())
                    .map(|_| T::of(rng.gen_range(-bound..bound)))
                    .collect();
                evaluated += 1;
                if check_feasible(p, &x, tol).feasible {
                    accepted += 1;
                    tracker.offer(x.clone(), p.objective().eval(&x));
                } else {
                    rejections += 1;
                    if rejections >= 1_000_000 {
                        return Err(OracleError::EmptyFeasible);
                    }
                }
            }
            tracker.into_result(evaluated, mode, None)
        }
        OracleMode::Enumerate01 | OracleMode::EnumeratePM1 => {
            Err(OracleError::UnrecognizedStructure)
        }
    }
}

/// Verdict of a local perturbation probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LocalClass {
    /// No sampled feasible neighbor is strictly better (for minimization).
    IsLocalMin,
    /// No sampled feasible neighbor is strictly worse.
    IsLocalMax,
    /// Strictly better and strictly worse neighbors both exist.
    Neither,
}

/// Samples feasible points within `radius` of `x` and compares objective
/// values with a `1e-10` margin.
///
/// Ball samples are projected onto any equality sphere constraint
/// (`α/2‖x‖² + c = 0` with `j ∈ J`), since rejection sampling alone never
/// hits a measure-zero surface.  When every sampled neighbor ties within
/// the margin the point counts as `IsLocalMin`.
pub fn local_perturbation_test<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    radius: T,
    trials: usize,
    seed: u64,
    tol: &Tolerances<T>,
) -> Result<LocalClass, OracleError> {
    if !check_feasible(p, x, tol).feasible {
        return Err(OracleError::InfeasiblePoint);
    }
    let margin = T::of(1e-10);
    let base = p.objective().eval(x);
    // Sphere projection target, if some equality constraint is a sphere.
    let sphere_radius = p.equality_set().iter().find_map(|&j| {
        let q = p.constraint(j);
        let n = p.n();
        let alpha = q.a.get(0, 0);
        let diag_uniform = (0..n).all(|i| (q.a.get(i, i) - alpha).abs() <= T::of(1e-14) * alpha.abs())
            && (0..n).all(|i| (0..n).all(|k| i == k || q.a.get(i, k) == T::zero()));
        if alpha > T::zero()
            && diag_uniform
            && q.b.iter().all(|&v| v == T::zero())
            && q.c < T::zero()
        {
            Some((-T::of(2.0) * q.c / alpha).sqrt())
        } else {
            None
        }
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut feasible_neighbors = 0usize;
    let mut better = false;
    let mut worse = false;
    for _ in 0..trials {
        let mut y: Vec<T> = loop {
            let u: Vec<T> = (0..p.n())
                .map(|_| T::of(rng.gen_range(-1.0..1.0)) * radius)
                .collect();
            if linalg::norm2(&u) <= radius {
                break x.iter().zip(&u).map(|(&xi, &ui)| xi + ui).collect();
            }
        };
        if let Some(r) = sphere_radius {
            let len = linalg::norm2(&y);
            if len == T::zero() {
                continue;
            }
            for yi in y.iter_mut() {
                *yi = *yi * r / len;
            }
        }
        if linalg::norm2(&linalg::sub(&y, x)) <= T::of(1e-12) * radius {
            continue;
        }
        if !check_feasible(p, &y, tol).feasible {
            continue;
        }
        feasible_neighbors += 1;
        let v = p.objective().eval(&y);
        if v < base - margin {
            better = true;
        }
        if v > base + margin {
            worse = true;
        }
    }
    if feasible_neighbors == 0 {
        return Err(OracleError::NoFeasibleNeighbors);
    }
    Ok(match (better, worse) {
        (true, true) => LocalClass::Neither,
        (true, false) => LocalClass::IsLocalMax,
        (false, _) => LocalClass::IsLocalMin,
    })
}
