//! Conversion of library results into command payload JSON.

use serde_json::{json, Value};

use qdual_core::dual::{DualEval, SetMembership};
use qdual_core::kkt::{Certificate, LkktReport};
use qdual_core::linalg::SymMatrix;
use qdual_core::oracle::OracleResult;
use qdual_core::solver::SolveResult;
use qdual_core::corpus::CaseReport;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payload values are finite")
}

fn matrix_rows(m: &SymMatrix<f64>) -> Value {
    let n = m.dim();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j)).collect())
        .collect();
    to_value(&rows)
}

pub fn dual_eval(ev: &DualEval<f64>, lambda: &[f64]) -> Value {
    json!({
        "lambda": lambda,
        "value": ev.value,
        "gradient": ev.gradient,
        "hessian": ev.hessian.as_ref().map(matrix_rows),
        "x_lambda": ev.x_lambda,
        "x_residual": ev.x_residual,
        "membership": to_value(&ev.membership),
        "definiteness": to_value(&ev.definiteness),
    })
}

pub fn solve_result(r: &SolveResult<f64>) -> Value {
    json!({
        "lambda": r.lambda,
        "x": r.x,
        "status": to_value(&r.status),
        "iterations": r.iterations,
        "dual_value": r.dual_value,
        "certificate": to_value(&r.certificate),
    })
}

pub fn certificate(
    report: &LkktReport<f64>,
    cert: &Certificate<f64>,
    membership: &SetMembership,
) -> Value {
    json!({
        "lkkt": to_value(report),
        "certificate": to_value(cert),
        "membership": to_value(membership),
    })
}

pub fn oracle_result(r: &OracleResult<f64>) -> Value {
    to_value(r)
}

pub fn repro_report(reports: &[CaseReport]) -> Value {
    json!({
        "passed": reports.iter().all(|r| r.passed),
        "cases": reports.iter().map(to_value).collect::<Vec<_>>(),
    })
}
