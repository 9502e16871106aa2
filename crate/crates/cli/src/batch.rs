//! JSON-lines batch mode. Each line `{id, cmd, ...}` is turned back into the
//! argv of the matching subcommand, so a batch line prints exactly what the
//! standalone command would.

use std::io::Read;

use clap::Parser;
use rayon::prelude::*;
use serde_json::Value;
use thiserror::Error;

use crate::commands;
use crate::output::{usage_like, Outcome, USAGE};
use crate::{Cli, Command};

/// Keys that describe a line rather than configure its command.
const METADATA_KEYS: &[&str] = &["id", "cmd", "expected_subclass", "notes"];

#[derive(Debug, Error)]
enum LineError {
    #[error("line is not a JSON object: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line must be a JSON object with a string `cmd`")]
    Shape,
    #[error("value of `{0}` must be a string, number, boolean or array of those")]
    Value(String),
    #[error("batch cannot be nested")]
    Nested,
}

fn scalar(key: &str, v: &Value) -> Result<Option<String>, LineError> {
    match v {
        Value::String(s) => Ok(Some(s.clone())),
        Value::Number(n) => Ok(Some(n.to_string())),
        Value::Bool(_) => Ok(None),
        _ => Err(LineError::Value(key.to_string())),
    }
}

/// argv for one batch line, plus its id.
fn to_argv(line: &str) -> Result<(Vec<String>, Option<String>), LineError> {
    let v: Value = serde_json::from_str(line)?;
    let obj = v.as_object().ok_or(LineError::Shape)?;
    let cmd = obj.get("cmd").and_then(Value::as_str).ok_or(LineError::Shape)?;
    if cmd == "batch" {
        return Err(LineError::Nested);
    }
    let id = obj.get("id").map(|v| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    });
    let mut argv = vec!["kdveq".to_string(), cmd.to_string()];
    if let Some(id) = &id {
        argv.push("--id".into());
        argv.push(id.clone());
    }
    for (key, value) in obj {
        if METADATA_KEYS.contains(&key.as_str()) {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let items: Vec<&Value> = match value {
            Value::Array(xs) => xs.iter().collect(),
            other => vec![other],
        };
        for item in items {
            match (item, scalar(key, item)?) {
                (Value::Bool(true), _) => argv.push(flag.clone()),
                (Value::Bool(false), _) => {}
                (_, Some(s)) => {
                    argv.push(flag.clone());
                    argv.push(s);
                }
                (_, None) => unreachable!(),
            }
        }
    }
    Ok((argv, id))
}

fn run_line(line: &str, verbose: bool) -> Outcome {
    let (argv, id) = match to_argv(line) {
        Ok(x) => x,
        Err(e) => return usage_like("usage", USAGE, &e.to_string(), None),
    };
    match Cli::try_parse_from(&argv) {
        Ok(Cli {
            command: Command::Batch { .. },
            ..
        }) => usage_like("usage", USAGE, "batch cannot be nested", id.as_deref()),
        Ok(cli) => commands::execute(cli.command, verbose),
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            usage_like("usage", USAGE, first.trim_start_matches("error: "), id.as_deref())
        }
    }
}

/// Runs every non-blank line, possibly in parallel, and emits the results in
/// input order. The exit code is the largest over all lines.
pub fn run(file: &str, verbose: bool) -> Outcome {
    let text = if file == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map(|_| s)
    } else {
        std::fs::read_to_string(file)
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => return usage_like("usage", USAGE, &format!("{file}: {e}"), None),
    };
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let results: Vec<Outcome> = lines.par_iter().map(|l| run_line(l, verbose)).collect();
    Outcome {
        code: results.iter().map(|o| o.code).max().unwrap_or(0),
        lines: results.into_iter().flat_map(|o| o.lines).collect(),
    }
}
