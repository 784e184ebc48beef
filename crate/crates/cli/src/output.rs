//! Command output envelope and exit-code mapping.

use std::process::ExitCode;

use serde::Serialize;
use serde_json::Value;

use qdual_core::jsonfmt;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: &'static str,
    command: &'a str,
    payload: Value,
    diagnostics: Vec<String>,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    schema_version: &'static str,
    command: &'a str,
    error: ErrorBody,
}

#[derive(Serialize)]
struct ErrorBody {
    code: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload: Option<Value>,
}

/// A failed command: machine-readable error object plus exit code.
pub struct CliFailure {
    code: &'static str,
    message: String,
    exit: u8,
    payload: Option<Value>,
}

impl CliFailure {
    pub fn input(message: String) -> Self {
        CliFailure {
            code: "input_error",
            message,
            exit: 2,
            payload: None,
        }
    }

    pub fn dual_undefined(message: &str) -> Self {
        CliFailure {
            code: "dual_undefined",
            message: message.to_string(),
            exit: 3,
            payload: None,
        }
    }

    pub fn solver_init(payload: Value) -> Self {
        CliFailure {
            code: "init_not_found",
            message: "no multiplier with definite A(lambda) of the required sign was found".into(),
            exit: 4,
            payload: Some(payload),
        }
    }

    pub fn uncertified(payload: Value) -> Self {
        CliFailure {
            code: "not_certified",
            message: "solve finished without a certified optimum".into(),
            exit: 1,
            payload: Some(payload),
        }
    }

    pub fn repro_failed(payload: Value) -> Self {
        CliFailure {
            code: "repro_assertion_failed",
            message: "one or more corpus assertions failed".into(),
            exit: 5,
            payload: Some(payload),
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        jsonfmt::to_string_17(value).expect("command output serializes")
    );
}

pub fn succeed(command: &str, payload: Value, diagnostics: Vec<String>) -> ExitCode {
    print_json(&Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        payload,
        diagnostics,
    });
    ExitCode::SUCCESS
}

pub fn fail(command: &str, failure: CliFailure) -> ExitCode {
    print_json(&ErrorEnvelope {
        schema_version: SCHEMA_VERSION,
        command,
        error: ErrorBody {
            code: failure.code,
            message: failure.message,
            payload: failure.payload,
        },
    });
    ExitCode::from(failure.exit)
}
