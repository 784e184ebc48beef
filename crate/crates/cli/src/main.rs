//! `qdual` — evaluate, solve, certify and brute-force quadratic problems
//! with quadratic constraints from JSON problem files.
//!
//! Every command prints one JSON document to stdout:
//! `{"schema_version", "command", "payload", "diagnostics"}` on success,
//! `{"schema_version", "command", "error": {"code", "message"}}` on
//! failure.  Exit codes: 0 success, 2 input error, 3 dual undefined at the
//! requested multiplier, 4 solver initialization failure, 5 reproduction
//! assertion failure (1 for other failed runs).  All floats print with 17
//! significant digits.  `QDUAL_TOL_SCALE` scales every tolerance.

mod output;
mod payload;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qdual_core::corpus;
use qdual_core::dual::{self, DualError};
use qdual_core::kkt::{self, Grade, Sense};
use qdual_core::model::{load_problem, Problem};
use qdual_core::oracle::{self, DiscreteAlphabet, OracleMode};
use qdual_core::solver::{self, SolveConfig, SolveStatus};
use qdual_core::Tolerances;

use output::{fail, succeed, CliFailure};

#[derive(Parser)]
#[command(name = "qdual", version, about = "Lagrangian duality for quadratically constrained quadratic programs", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the dual function at a multiplier.
    Eval {
        /// Problem JSON file.
        file: PathBuf,
        /// Comma-separated multiplier, length m.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 0..)]
        lambda: Vec<f64>,
    },
    /// Maximize (sense=min) or minimize (sense=max) the dual and certify.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "min")]
        sense: SenseArg,
        /// Comma-separated starting multiplier.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 0..)]
        start: Option<Vec<f64>>,
        /// Projected-gradient convergence tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Grade a candidate pair (x, lambda).
    Certify {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 1..)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 0..)]
        lambda: Vec<f64>,
        #[arg(long, default_value = "min")]
        sense: SenseArg,
    },
    /// Brute-force the problem by enumeration or sampling.
    Oracle {
        file: PathBuf,
        /// enum01 | enumpm1 | grid | circle | random
        #[arg(long)]
        mode: ModeArg,
        #[arg(long, default_value = "min")]
        sense: SenseArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Points per dimension / arc / accepted samples.
        #[arg(long, default_value_t = 101)]
        resolution: usize,
    },
    /// Replay the reference corpus (all cases, or one).
    Repro {
        #[arg(long)]
        case: Option<String>,
        /// Directory with manifest.json and problem files (default: embedded).
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SenseArg {
    Min,
    Max,
}

impl From<SenseArg> for Sense {
    fn from(s: SenseArg) -> Sense {
        match s {
            SenseArg::Min => Sense::Min,
            SenseArg::Max => Sense::Max,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Enum01,
    Enumpm1,
    Grid,
    Circle,
    Random,
}

fn tolerances() -> Result<Tolerances<f64>, CliFailure> {
    match std::env::var("QDUAL_TOL_SCALE") {
        Err(_) => Ok(Tolerances::default()),
        Ok(raw) => {
            let scale: f64 = raw.parse().map_err(|_| {
                CliFailure::input(format!("QDUAL_TOL_SCALE is not a number: {raw}"))
            })?;
            if !(scale.is_finite() && scale > 0.0) {
                return Err(CliFailure::input(format!(
                    "QDUAL_TOL_SCALE must be a positive finite number, got {raw}"
                )));
            }
            Ok(Tolerances::scaled(scale))
        }
    }
}

fn read_problem(path: &PathBuf) -> Result<Problem<f64>, CliFailure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliFailure::input(format!("{}: {e}", path.display())))?;
    load_problem(&text).map_err(|e| CliFailure::input(e.to_string()))
}

fn check_lambda_len(p: &Problem<f64>, lambda: &[f64]) -> Result<(), CliFailure> {
    if lambda.len() != p.m() {
        return Err(CliFailure::input(format!(
            "lambda has length {}, problem has m = {}",
            lambda.len(),
            p.m()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, result) = match cli.command {
        Command::Eval { file, lambda } => ("eval", cmd_eval(file, lambda)),
        Command::Solve {
            file,
            sense,
            start,
            tol,
            max_iter,
        } => ("solve", cmd_solve(file, sense, start, tol, max_iter)),
        Command::Certify {
            file,
            x,
            lambda,
            sense,
        } => ("certify", cmd_certify(file, x, lambda, sense)),
        Command::Oracle {
            file,
            mode,
            sense,
            seed,
            resolution,
        } => ("oracle", cmd_oracle(file, mode, sense, seed, resolution)),
        Command::Repro { case, corpus } => ("repro", cmd_repro(case, corpus)),
    };
    match result {
        Ok((payload, diagnostics)) => succeed(command, payload, diagnostics),
        Err(failure) => fail(command, failure),
    }
}

type CmdResult = Result<(serde_json::Value, Vec<String>), CliFailure>;

fn cmd_eval(file: PathBuf, lambda: Vec<f64>) -> CmdResult {
    let tol = tolerances()?;
    let p = read_problem(&file)?;
    check_lambda_len(&p, &lambda)?;
    let mut diagnostics = Vec::new();
    let ev = match dual::eval_dual(&p, &lambda, &tol) {
        Ok(ev) => ev,
        Err(DualError::DualUndefined) => {
            return Err(CliFailure::dual_undefined(
                "b(lambda) is outside the range of A(lambda); D(lambda) has no value",
            ))
        }
        Err(e) => return Err(CliFailure::input(e.to_string())),
    };
    if ev.gradient.is_none() {
        diagnostics.push(
            "gradient and hessian omitted: lambda is outside Y0 (A(lambda) singular)".to_string(),
        );
    }
    Ok((payload::dual_eval(&ev, &lambda), diagnostics))
}

fn cmd_solve(
    file: PathBuf,
    sense: SenseArg,
    start: Option<Vec<f64>>,
    tol_grad: Option<f64>,
    max_iter: Option<usize>,
) -> CmdResult {
    let tol = tolerances()?;
    let p = read_problem(&file)?;
    if let Some(s) = &start {
        check_lambda_len(&p, s)?;
    }
    let mut cfg = SolveConfig {
        sense: sense.into(),
        start,
        ..SolveConfig::default()
    };
    if let Some(t) = tol_grad {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliFailure::input("tol must be positive".into()));
        }
        cfg.tol_grad = t;
    }
    if let Some(mi) = max_iter {
        cfg.max_iter = mi;
    }
    let r = solver::maximize_dual(&p, &cfg, &tol);
    let payload = payload::solve_result(&r);
    match r.status {
        SolveStatus::InitNotFound => Err(CliFailure::solver_init(payload)),
        SolveStatus::Converged | SolveStatus::BoundaryLimit if r.certificate.grade != Grade::None => {
            let mut diagnostics = Vec::new();
            if r.status == SolveStatus::BoundaryLimit {
                diagnostics.push(
                    "optimum reached on the singular boundary; certificate uses range grading"
                        .to_string(),
                );
            }
            Ok((payload, diagnostics))
        }
        _ => Err(CliFailure::uncertified(payload)),
    }
}

fn cmd_certify(file: PathBuf, x: Vec<f64>, lambda: Vec<f64>, sense: SenseArg) -> CmdResult {
    let tol = tolerances()?;
    let p = read_problem(&file)?;
    check_lambda_len(&p, &lambda)?;
    if x.len() != p.n() {
        return Err(CliFailure::input(format!(
            "x has length {}, problem has n = {}",
            x.len(),
            p.n()
        )));
    }
    let sense: Sense = sense.into();
    let report = kkt::check_lkkt_sense(&p, &x, &lambda, sense, &tol);
    let cert = kkt::certify(&p, &x, &lambda, sense, &tol);
    let membership = dual::classify_membership(&p, &lambda, &tol);
    let mut diagnostics = Vec::new();
    if cert.grade == Grade::KktOnly {
        let shape = if membership.in_yminus {
            "A(lambda) negative definite"
        } else if membership.in_ycol_minus {
            "A(lambda) negative semidefinite"
        } else {
            "A(lambda) not semidefinite of the certifying sign"
        };
        diagnostics.push(format!("{shape}; no global claim"));
    }
    Ok((payload::certificate(&report, &cert, &membership), diagnostics))
}

fn cmd_oracle(
    file: PathBuf,
    mode: ModeArg,
    sense: SenseArg,
    seed: u64,
    resolution: usize,
) -> CmdResult {
    let tol = tolerances()?;
    let p = read_problem(&file)?;
    if resolution < 2 {
        return Err(CliFailure::input("resolution must be at least 2".into()));
    }
    let sense: Sense = sense.into();
    let result = match mode {
        ModeArg::Enum01 => oracle::enumerate_discrete(&p, DiscreteAlphabet::ZeroOne, sense, &tol),
        ModeArg::Enumpm1 => {
            oracle::enumerate_discrete(&p, DiscreteAlphabet::PlusMinusOne, sense, &tol)
        }
        ModeArg::Grid => {
            oracle::sample_continuous(&p, OracleMode::GridBox, resolution, sense, seed, &tol)
        }
        ModeArg::Circle => {
            oracle::sample_continuous(&p, OracleMode::CircleParam, resolution, sense, seed, &tol)
        }
        ModeArg::Random => {
            oracle::sample_continuous(&p, OracleMode::RandomFeasible, resolution, sense, seed, &tol)
        }
    }
    .map_err(|e| CliFailure::input(e.to_string()))?;
    Ok((payload::oracle_result(&result), Vec::new()))
}

fn cmd_repro(case: Option<String>, corpus_dir: Option<PathBuf>) -> CmdResult {
    let cases = match corpus_dir {
        Some(dir) => corpus::load_cases_from_dir(&dir)
            .map_err(|e| CliFailure::input(e.to_string()))?,
        None => corpus::all_cases(),
    };
    let reports: Vec<_> = match case {
        Some(id) => {
            let c = cases
                .iter()
                .find(|c| c.id == id)
                .ok_or_else(|| CliFailure::input(format!("unknown case id: {id}")))?;
            vec![corpus::run_case_with(c)]
        }
        None => cases.iter().map(corpus::run_case_with).collect(),
    };
    let all_passed = reports.iter().all(|r| r.passed);
    let payload = payload::repro_report(&reports);
    if all_passed {
        Ok((payload, Vec::new()))
    } else {
        Err(CliFailure::repro_failed(payload))
    }
}
