//! Property suites for the duality statements that are not part of the
//! acceptance gate: the dual optimality chain, min/max symmetry, the
//! monotonicity law between nested equality sets, solver/certificate
//! agreement, and wire-format round-trips.

mod common;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdual_core::corpus;
use qdual_core::dual::{self, classify_membership, eval_dual};
use qdual_core::kkt::{self, Grade, Sense};
use qdual_core::linalg::eig_sym;
use qdual_core::model::{load_problem, save_problem, Problem};
use qdual_core::solver::{self, SolveConfig, SolveStatus};
use qdual_core::Tolerances;

fn tol() -> Tolerances<f64> {
    Tolerances::default()
}

/// A multiplier in `Y^{J+}` that satisfies the dual-side KKT conditions
/// dominates `D` over sampled members of `Y^{J+}`.
#[test]
fn dual_optimality_chain() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    // (case, certified dual maximizer) with interior Y^{J+} optima.
    let setups = [
        ("ex2_boundary_eq", vec![1.5]),
        ("ex3_box", vec![2.0, 5.0]),
        ("ex4_sphere", vec![5.0]),
    ];
    for (case_id, lam_star) in setups {
        let p = corpus::get_case(case_id).unwrap().problem;
        let report = kkt::check_lkkt_dual(&p, &lam_star, &t).unwrap();
        assert!(report.holds, "{case_id}: reference multiplier fails the dual conditions");
        let d_star = eval_dual(&p, &lam_star, &t).unwrap().value;
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        while accepted < 1000 {
            attempts += 1;
            assert!(attempts < 200_000, "{case_id}: sampling starved");
            let lam: Vec<f64> = lam_star
                .iter()
                .map(|&v| v + rng.gen_range(-3.0..3.0))
                .collect();
            if !classify_membership(&p, &lam, &t).in_yjplus {
                continue;
            }
            accepted += 1;
            let d = eval_dual(&p, &lam, &t).unwrap().value;
            assert!(
                d_star >= d - 1e-9,
                "{case_id}: D({lam:?}) = {d} beats D* = {d_star}"
            );
        }
    }
}

/// Verdicts on `D` coincide with verdicts on `L` at `x(λ)` for multipliers
/// in `Y₀` (the two definitions read the same numbers).
#[test]
fn dual_and_primal_verdicts_agree() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut checked = 0usize;
    while checked < 200 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        let p = common::rand_problem(&mut rng, n, m);
        let lam = common::rand_vec(&mut rng, m, 2.0);
        let Ok(ev) = eval_dual(&p, &lam, &t) else { continue };
        if !ev.membership.in_y0 {
            continue;
        }
        checked += 1;
        let dual_verdict = kkt::check_lkkt_dual(&p, &lam, &t).unwrap().holds;
        let primal_verdict = kkt::check_lkkt(&p, &ev.x_lambda, &lam, &t).holds;
        assert_eq!(dual_verdict, primal_verdict);
    }
}

/// Negating every constraint and the multiplier maps minimization verdicts
/// to maximization verdicts on equality-constrained problems.
#[test]
fn min_max_symmetry() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..200 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        let p = common::rand_problem(&mut rng, n, m)
            .with_equality_set((1..=m).collect())
            .unwrap();
        let negated = p.with_negated_constraints();
        let x = common::rand_vec(&mut rng, n, 2.0);
        let lam = common::rand_vec(&mut rng, m, 2.0);
        let neg_lam: Vec<f64> = lam.iter().map(|v| -v).collect();
        let min_rep = kkt::check_lkkt(&negated, &x, &neg_lam, &t);
        let max_rep = kkt::check_lkkt_max(&p, &x, &lam, &t);
        assert_eq!(min_rep.holds, max_rep.holds);
        assert!((min_rep.stationarity_x - max_rep.stationarity_x).abs() <= 1e-12);
        assert!((min_rep.eq_violation - max_rep.eq_violation).abs() <= 1e-12);
    }
    // The corpus pair: the circle problem's maximizers under negation.
    let p = corpus::get_case("ex1_circle").unwrap().problem;
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let negated = p.with_negated_constraints();
    assert!(kkt::check_lkkt_max(&p, &[a, a], &[-1.0], &t).holds);
    assert!(kkt::check_lkkt(&negated, &[a, a], &[1.0], &t).holds);
}

/// Monotonicity law between nested equality sets at genuine KKT pairs.
#[test]
fn monotonicity_between_nested_sets() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    // The box problem's four critical points against random nested pairs.
    let p = corpus::get_case("ex3_box").unwrap().problem;
    let criticals = [
        (vec![1.0, -1.0], vec![2.0, 5.0]),
        (vec![1.0, 1.0], vec![0.0, 1.0]),
        (vec![-1.0, -1.0], vec![0.0, 3.0]),
        (vec![-1.0, 1.0], vec![2.0, 3.0]),
    ];
    let subsets: Vec<BTreeSet<usize>> = vec![
        BTreeSet::new(),
        BTreeSet::from([1]),
        BTreeSet::from([2]),
        BTreeSet::from([1, 2]),
    ];
    for (x, lam) in &criticals {
        for js in &subsets {
            for jl in &subsets {
                if js.is_subset(jl) {
                    assert!(
                        kkt::lkkt_monotone(&p, x, lam, js, jl, &t),
                        "law failed at x = {x:?}, J = {js:?}, J' = {jl:?}"
                    );
                }
            }
        }
    }
    // Boolean critical points from converged solves, random nested pairs.
    let mut done = 0usize;
    while done < 25 {
        let n = rng.gen_range(2..=7);
        let p = common::boolean_instance(&mut rng, n);
        let r = solver::maximize_dual(&p, &SolveConfig::default(), &t);
        if r.status != SolveStatus::Converged {
            continue;
        }
        done += 1;
        let jl: BTreeSet<usize> = (1..=n).collect();
        let js: BTreeSet<usize> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
        assert!(kkt::lkkt_monotone(&p, &r.x, &r.lambda, &js, &jl, &t));
    }
}

/// A converged interior solve always grades UniqueGlobalMin/Max.
#[test]
fn solver_certificate_agreement() {
    let t = tol();
    let delta = SolveConfig::<f64>::default().min_eig_guard;
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut audited = 0usize;
    let mut run = |p: &Problem<f64>, sense: Sense| {
        let cfg = SolveConfig {
            sense,
            ..SolveConfig::default()
        };
        let r = solver::maximize_dual(p, &cfg, &t);
        if r.status != SolveStatus::Converged {
            return;
        }
        let (a, _, _) = dual::assemble(p, &r.lambda);
        let eig = eig_sym(&a);
        let interior = match sense {
            Sense::Min => eig.min_eig() >= 2.0 * delta,
            Sense::Max => eig.max_eig() <= -2.0 * delta,
        };
        let strict_active = p
            .inequality_indices()
            .iter()
            .all(|&j| r.lambda[j - 1].abs() > t.feas || r.lambda[j - 1] == 0.0);
        if interior && strict_active {
            audited += 1;
            let expect = match sense {
                Sense::Min => Grade::UniqueGlobalMin,
                Sense::Max => Grade::UniqueGlobalMax,
            };
            assert_eq!(
                r.certificate.grade, expect,
                "converged interior solve graded {:?}",
                r.certificate.grade
            );
        }
    };
    for case in corpus::all_cases() {
        run(&case.problem, Sense::Min);
        run(&case.problem, Sense::Max);
    }
    for _ in 0..60 {
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(1..=4);
        let p = common::rand_problem_with_identity(&mut rng, n, m);
        run(&p, Sense::Min);
    }
    assert!(audited >= 10, "only {audited} interior solves audited");
}

/// Relaxing equality indices with nonnegative multipliers keeps a global
/// certificate on the enlarged feasible set, checked against enumeration.
#[test]
fn relaxation_extends_certificates() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut done = 0usize;
    while done < 25 {
        let n = rng.gen_range(2..=6);
        let p = common::boolean_instance(&mut rng, n);
        let r = solver::maximize_dual(&p, &SolveConfig::default(), &t);
        if r.status != SolveStatus::Converged
            || r.certificate.grade != Grade::UniqueGlobalMin
            || r.lambda.iter().any(|&l| l < 0.0)
        {
            continue;
        }
        done += 1;
        // All multipliers nonnegative and A(λ̄) ≻ 0: every equality index
        // relaxes away and the point stays a global min of the relaxation.
        let (j2, cert) = kkt::relax_equalities(&p, &r.x, &r.lambda, &t).unwrap();
        assert!(j2.is_empty());
        assert!(matches!(cert.grade, Grade::GlobalMin | Grade::UniqueGlobalMin));
        // Oracle on the relaxed problem: 0/1 corners stay feasible, so the
        // relaxed minimum matches the lattice minimum here.
        let relaxed = p.with_equality_set(j2).unwrap();
        let lattice = qdual_core::oracle::enumerate_discrete(
            &relaxed,
            qdual_core::oracle::DiscreteAlphabet::ZeroOne,
            Sense::Min,
            &t,
        )
        .unwrap();
        assert!(p.objective().eval(&r.x) <= lattice.best_value + 1e-6);
    }
}

/// Lagrangian well-definedness on the singular solution set: `L(·, λ)` is
/// constant along the kernel whenever `b(λ) ∈ Im A(λ)`.
#[test]
fn dual_well_defined_on_singular_sets() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let mut done = 0usize;
    while done < 50 {
        let n = rng.gen_range(2..=5);
        let rank = rng.gen_range(1..n);
        let a0 = common::rand_psd(&mut rng, n, rank);
        // b₀ in the range of A₀ keeps λ in Y_col while A(λ) ≡ A₀ singular.
        let seedv = common::rand_vec(&mut rng, n, 1.0);
        let b0 = a0.mul_vec(&seedv);
        let objective = qdual_core::model::QuadForm::new(a0, b0, rng.gen_range(-1.0..1.0));
        let c1 = qdual_core::model::QuadForm::new(
            qdual_core::linalg::SymMatrix::zeros(n),
            vec![0.0; n],
            -1.0,
        );
        let p = Problem::new(objective, vec![c1], BTreeSet::new()).unwrap();
        let lam = vec![rng.gen_range(0.0..2.0)];
        let Ok(ev) = eval_dual(&p, &lam, &t) else { continue };
        if ev.membership.in_y0 {
            continue;
        }
        done += 1;
        let (a, _, _) = dual::assemble(&p, &lam);
        let eig = eig_sym(&a);
        let band = t.eig_zero_band(eig.spectral_norm());
        for k in eig.kernel_indices(band) {
            let s: f64 = rng.gen_range(-2.0..2.0);
            let x2: Vec<f64> = ev
                .x_lambda
                .iter()
                .zip(eig.eigenvector(k))
                .map(|(&x, &v)| x + s * v)
                .collect();
            let l2 = dual::lagrangian(&p, &x2, &lam);
            assert!(
                (l2 - ev.value).abs() <= 1e-8 * (1.0 + ev.value.abs()),
                "L moved along the kernel: {l2} vs {}",
                ev.value
            );
        }
    }
}

/// Wire-format round trip on random problems.
#[test]
fn problem_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(115);
    for _ in 0..50 {
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(0..=4);
        let p = common::rand_problem(&mut rng, n, m);
        let text = save_problem(&p);
        let p2 = load_problem(&text).expect("saved problem reloads");
        assert_eq!(p, p2);
        // Twice through the wire is bit-stable.
        assert_eq!(text, save_problem(&p2));
    }
}

/// Oracle determinism: identical seed and resolution give bit-identical
/// results across repeated runs.
#[test]
fn oracle_determinism() {
    use qdual_core::oracle::{self, OracleMode};
    let t = tol();
    let p = corpus::get_case("ex4_sphere").unwrap().problem;
    for mode in [OracleMode::CircleParam, OracleMode::RandomFeasible] {
        let a = oracle::sample_continuous(&p, mode, 501, Sense::Min, 9, &t).unwrap();
        let b = oracle::sample_continuous(&p, mode, 501, Sense::Min, 9, &t).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.argmins, b.argmins);
        assert_eq!(a.points_evaluated, b.points_evaluated);
    }
}

/// Certificate soundness on random inequality-constrained instances: a
/// global-minimum grade can never beat rejection-sampled feasible points.
#[test]
fn random_certificates_respect_sampling_oracle() {
    use qdual_core::oracle::{self, OracleMode};
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(117);
    let mut certified = 0usize;
    let mut attempts = 0usize;
    while certified < 25 && attempts < 400 {
        attempts += 1;
        let n = rng.gen_range(2..=3);
        let m = rng.gen_range(1..=3);
        // First constraint bounds the feasible set inside a small ball, so
        // rejection sampling terminates; everything is inequality-read.
        let p = common::rand_problem_with_identity(&mut rng, n, m)
            .with_equality_set(BTreeSet::new())
            .unwrap();
        let r = solver::maximize_dual(&p, &SolveConfig::default(), &t);
        if !matches!(
            r.certificate.grade,
            Grade::GlobalMin | Grade::UniqueGlobalMin
        ) {
            continue;
        }
        let Ok(oracle) =
            oracle::sample_continuous(&p, OracleMode::RandomFeasible, 300, Sense::Min, 7, &t)
        else {
            continue;
        };
        certified += 1;
        let v = p.objective().eval(&r.x);
        assert!(
            oracle.best_value >= v - 1e-6,
            "certified global minimum {v} beaten by sampled point at {}",
            oracle.best_value
        );
    }
    assert!(certified >= 25, "only {certified} certified instances found");
}

/// Everything is a pure function of immutable inputs: concurrent dual
/// evaluation over a multiplier grid is bitwise-deterministic per point.
#[test]
fn concurrent_evaluation_is_deterministic() {
    let t = tol();
    let p = std::sync::Arc::new(corpus::get_case("ex4_sphere").unwrap().problem);
    let grid: Vec<f64> = (0..64).map(|i| -8.0 + 0.31 * i as f64).collect();
    let serial: Vec<Option<u64>> = grid
        .iter()
        .map(|&l| eval_dual(&p, &[l], &t).ok().map(|ev| ev.value.to_bits()))
        .collect();
    let handles: Vec<_> = grid
        .iter()
        .map(|&l| {
            let p = std::sync::Arc::clone(&p);
            std::thread::spawn(move || {
                eval_dual(&p, &[l], &Tolerances::default())
                    .ok()
                    .map(|ev| ev.value.to_bits())
            })
        })
        .collect();
    let parallel: Vec<Option<u64>> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(serial, parallel);
}

/// Accepted solver iterates stay inside the sign-and-definiteness region.
#[test]
fn solver_iterates_stay_in_region() {
    let t = tol();
    for case in corpus::all_cases() {
        for sense in [Sense::Min, Sense::Max] {
            let cfg = SolveConfig {
                sense,
                ..SolveConfig::default()
            };
            let r = solver::maximize_dual(&case.problem, &cfg, &t);
            if r.status == SolveStatus::InitNotFound {
                continue;
            }
            for lam in &r.lambda_trajectory {
                let m = classify_membership(&case.problem, lam, &t);
                match sense {
                    Sense::Min => assert!(m.in_yjplus, "{}: iterate left Y^J+", case.id),
                    Sense::Max => assert!(m.in_yjminus, "{}: iterate left Y^J-", case.id),
                }
            }
        }
    }
}

/// The boundary solve on the circle problem recovers a feasible maximizer
/// pair on each side, matching the replayed corpus points.
#[test]
fn boundary_solves_recover_reference_points() {
    let t = tol();
    let p = corpus::get_case("ex1_circle").unwrap().problem;
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let min = solver::maximize_dual(&p, &SolveConfig::default(), &t);
    assert_eq!(min.status, SolveStatus::BoundaryLimit);
    assert!(kkt::check_lkkt(&p, &min.x, &min.lambda, &t).holds);
    assert!((min.x[0].abs() - a).abs() < 1e-7);
    let max = solver::minimize_dual_for_max(&p, &SolveConfig::default(), &t);
    assert_eq!(max.status, SolveStatus::BoundaryLimit);
    assert!(kkt::check_lkkt_max(&p, &max.x, &max.lambda, &t).holds);
    assert!((max.x[0].abs() - a).abs() < 1e-7);
}
