use std::io::Write;
use std::process::ExitCode;

use kdveq::{CoframeError, Error, ExprError};
use serde_json::{json, Map, Value};

pub const OK: u8 = 0;
pub const USAGE: u8 = 2;
pub const NOT_APPLICABLE: u8 = 3;
pub const INCONSISTENT: u8 = 4;

/// Exit code plus the JSON lines destined for stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn json(code: u8, value: Value) -> Self {
        Outcome {
            code,
            lines: vec![value.to_string()],
        }
    }

    pub fn emit(self) -> ExitCode {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        for line in &self.lines {
            if writeln!(out, "{line}").is_err() {
                return ExitCode::from(USAGE);
            }
        }
        ExitCode::from(self.code)
    }
}

/// Adds `"id"` to an object when present.
pub fn with_id(mut value: Value, id: Option<&str>) -> Value {
    if let (Some(id), Value::Object(map)) = (id, &mut value) {
        map.insert("id".into(), Value::String(id.to_string()));
    }
    value
}

fn kind(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Expr(ExprError::Syntax { .. })
        | Error::Expr(ExprError::UnknownIdentifier { .. })
        | Error::Expr(ExprError::UnknownSymbol(_))
        | Error::Expr(ExprError::NonConstantExponent) => ("parse", USAGE),
        Error::Expr(ExprError::Unbound(_)) | Error::UnboundParameter(_) => {
            ("unbound_parameter", NOT_APPLICABLE)
        }
        Error::Expr(_) => ("singular_point", NOT_APPLICABLE),
        Error::ForbiddenSymbol(_) => ("parse", USAGE),
        Error::OutsideSubclass | Error::NotS2(_) => ("outside_subclass", NOT_APPLICABLE),
        Error::InsufficientSamples { .. } => ("insufficient_samples", NOT_APPLICABLE),
        Error::ArityMismatch { .. } | Error::Config(_) => ("usage", USAGE),
        Error::Coframe(CoframeError::UndeterminedResidual { .. }) => {
            ("undetermined_residual", NOT_APPLICABLE)
        }
        Error::Coframe(_) => ("model", USAGE),
    }
}

/// A complete JSON error object; the message is mirrored on stderr.
pub fn failure(e: &Error, id: Option<&str>) -> Outcome {
    let (k, code) = kind(e);
    usage_like(k, code, &e.to_string(), id)
}

pub fn usage_like(kind: &str, code: u8, message: &str, id: Option<&str>) -> Outcome {
    eprintln!("kdveq: {message}");
    let mut err = Map::new();
    err.insert("kind".into(), json!(kind));
    err.insert("message".into(), json!(message));
    Outcome::json(code, with_id(json!({ "error": err }), id))
}
