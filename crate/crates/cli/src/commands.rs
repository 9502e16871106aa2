use std::collections::BTreeMap;

use kdveq::classify::{classify_detailed, EquationSpec, Subclass};
use kdveq::coframe::{self, check_model, CoframeModel};
use kdveq::corpus::parse_assignment;
use kdveq::equivalence::{decide_equivalence, SampleConfig, DEFAULT_SEED};
use kdveq::expr::print_expr;
use kdveq::invariants::{invariants_with, InvariantMap, InvariantOptions, JetPoint};
use kdveq::{Error, Result};
use serde_json::{json, Value};

use crate::output::{failure, usage_like, with_id, Outcome, INCONSISTENT, NOT_APPLICABLE, OK, USAGE};
use crate::{Command, EquationArgs};

pub const SEED_VAR: &str = "KDVEQ_SEED";

pub fn execute(cmd: Command, verbose: bool) -> Outcome {
    match cmd {
        Command::Classify { eq, id } => run(id.as_deref(), || classify_cmd(&eq, verbose)),
        Command::Invariants {
            eq,
            at,
            alternate,
            id,
        } => run(id.as_deref(), || invariants_cmd(&eq, at.as_deref(), alternate, verbose)),
        Command::Equiv {
            qa,
            qb,
            params_a,
            params_b,
            seed,
            samples,
            tol,
            starts,
            id,
        } => run(id.as_deref(), || {
            let a = equation(&qa, &params_a, false)?;
            let b = equation(&qb, &params_b, false)?;
            let mut cfg = SampleConfig::with_seed(resolve_seed(seed)?);
            if let Some(k) = samples {
                cfg.samples = k;
            }
            if let Some(t) = tol {
                cfg.overlap_tol = t;
            }
            if let Some(s) = starts {
                cfg.starts = s;
            }
            let v = decide_equivalence(&a, &b, &cfg)?;
            if verbose {
                eprintln!("{qa} vs {qb}: {} ({})", v.verdict, v.reason);
            }
            let value = serde_json::to_value(&v).map_err(|e| Error::Config(e.to_string()))?;
            Ok((OK, value))
        }),
        Command::Structure {
            model,
            model_file,
            id,
        } => run(id.as_deref(), || structure_cmd(model.as_deref(), model_file.as_deref(), verbose)),
        Command::Batch { .. } => usage_like("usage", USAGE, "batch cannot be nested", None),
    }
}

fn run(id: Option<&str>, f: impl FnOnce() -> Result<(u8, Value)>) -> Outcome {
    match f() {
        Ok((code, value)) => Outcome::json(code, with_id(value, id)),
        Err(e) => failure(&e, id),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_VAR} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn equation(q: &str, params: &[String], generic: bool) -> Result<EquationSpec> {
    let mut eq = EquationSpec::parse(q)?;
    for p in params {
        let (s, v) = parse_assignment(p)?;
        eq = eq.with_param(s, v)?;
    }
    Ok(if generic { eq.generic() } else { eq })
}

fn classify_cmd(args: &EquationArgs, verbose: bool) -> Result<(u8, Value)> {
    let eq = equation(&args.q, &args.params, args.generic)?;
    let c = classify_detailed(&eq)?;
    if verbose {
        eprintln!("{}: {}", args.q, c.subclass);
    }
    let mut value = json!({
        "subclass": c.subclass,
        "second_partials": {
            "quu": print_expr(&c.quu),
            "quv": print_expr(&c.quv),
            "qvv": print_expr(&c.qvv),
        },
    });
    let code = if !c.diagnostics.is_empty() {
        value["diagnostics"] = json!(c.diagnostics);
        INCONSISTENT
    } else if c.subclass == Subclass::Outside {
        NOT_APPLICABLE
    } else {
        OK
    };
    Ok((code, value))
}

fn parse_point(text: &str) -> Result<JetPoint> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("--at expects five comma-separated numbers, got `{text}`"));
    if parts.len() != 5 {
        return Err(bad());
    }
    let mut x = [0.0; 5];
    for (slot, p) in x.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| bad())?;
    }
    Ok(JetPoint::from_array(x))
}

fn invariants_cmd(args: &EquationArgs, at: Option<&str>, alternate: bool, verbose: bool) -> Result<(u8, Value)> {
    let eq = equation(&args.q, &args.params, args.generic)?;
    let point = at.map(parse_point).transpose()?;
    let c = classify_detailed(&eq)?;
    if c.subclass == Subclass::Outside {
        return Err(Error::OutsideSubclass);
    }
    let inv = invariants_with(&eq, InvariantOptions { alternate_readings: alternate })?;
    let values = match point {
        Some(p) => Some(InvariantMap::new(&inv, &eq.param_bindings())?.eval(&p)?),
        None => None,
    };
    if verbose {
        eprintln!("{}: {} with {} invariants", args.q, inv.subclass, inv.len());
    }
    let items: Vec<Value> = inv
        .items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let mut v = json!({ "name": item.name, "symbolic": print_expr(&item.value) });
            if let Some(vals) = &values {
                v["value"] = json!(vals[i]);
            }
            v
        })
        .collect();
    let mut value = json!({ "subclass": inv.subclass, "invariants": items });
    if let Some(p) = point {
        value["at"] = json!(p.to_array());
    }
    let code = if c.diagnostics.is_empty() {
        OK
    } else {
        value["diagnostics"] = json!(c.diagnostics);
        INCONSISTENT
    };
    Ok((code, value))
}

fn load_model(name: Option<&str>, file: Option<&std::path::Path>) -> Result<CoframeModel> {
    match (name, file) {
        (Some(n), _) => Ok(coframe::builtin_model(n)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(coframe::parse_model(&stem, &text)?)
        }
        (None, None) => Err(Error::Config("one of --model or --model-file is required".into())),
    }
}

fn structure_cmd(name: Option<&str>, file: Option<&std::path::Path>, verbose: bool) -> Result<(u8, Value)> {
    let model = load_model(name, file)?;
    let report = check_model(&model);
    let mut residuals = BTreeMap::new();
    let mut undetermined = BTreeMap::new();
    for r in &report.results {
        match r {
            Ok(res) => {
                let terms: Vec<Value> = res
                    .terms
                    .iter()
                    .map(|t| {
                        json!({
                            "coeff": coframe_rational(&t.coeff),
                            "forms": model.term_names(t),
                        })
                    })
                    .collect();
                residuals.insert(res.form.clone(), Value::Array(terms));
            }
            Err(kdveq::CoframeError::UndeterminedResidual { form, terms }) => {
                undetermined.insert(form.clone(), Value::String(terms.clone()));
            }
            Err(e) => return Err(e.clone().into()),
        }
    }
    let consistent = report.consistent();
    if verbose {
        eprintln!(
            "{}: {} residuals checked, {} undetermined, consistent = {consistent}",
            model.name(),
            residuals.len(),
            undetermined.len()
        );
    }
    let mut value = json!({
        "model": model.name(),
        "residuals": residuals,
        "undetermined": undetermined,
        "consistent": consistent,
    });
    if name.is_some_and(|n| n.starts_with("s1-")) {
        value["note"] = json!(coframe::sign_discrepancy()?.note);
    }
    Ok((OK, value))
}

fn coframe_rational(c: &kdveq::expr::Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}
