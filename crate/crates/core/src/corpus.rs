//! Reference equations with known subclasses.
//!
//! The corpus ships as JSON lines in the CLI batch format, so the same file
//! can be fed to `kdveq batch`. Metadata keys `expected_subclass` and `notes`
//! are ignored by the CLI.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::calculus::simplify;
use crate::classify::{classify, EquationSpec, Subclass};
use crate::equivalence::Verdict;
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Rational, Symbol};

const BUILTIN: &str = include_str!("../data/corpus.jsonl");

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub q_text: String,
    pub params: BTreeMap<Symbol, Rational>,
    pub expected_subclass: Subclass,
    pub notes: String,
}

impl CorpusEntry {
    pub fn equation(&self) -> Result<EquationSpec> {
        let mut eq = EquationSpec::parse(&self.q_text)?;
        for (s, v) in &self.params {
            eq = eq.with_param(*s, v.clone())?;
        }
        Ok(eq)
    }
}

#[derive(Deserialize)]
struct Line {
    id: String,
    q: String,
    #[serde(default)]
    param: Vec<String>,
    expected_subclass: Subclass,
    #[serde(default)]
    notes: String,
}

/// Parses `NAME=VALUE` where VALUE is a constant expression such as `2`,
/// `-1/3` or `0.25`.
pub fn parse_assignment(text: &str) -> Result<(Symbol, Rational)> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got `{text}`")))?;
    let sym: Symbol = name
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("unknown parameter `{}`", name.trim())))?;
    if !sym.is_param() {
        return Err(Error::Config(format!("`{sym}` is not a parameter")));
    }
    let v = simplify(&parse_expr(value.trim())?);
    match v.as_constant() {
        Some(c) => Ok((sym, c.clone())),
        None => Err(Error::Config(format!("value of `{sym}` is not a rational constant"))),
    }
}

/// Parses corpus lines. Blank lines are skipped.
pub fn load_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw)
            .map_err(|e| Error::Config(format!("corpus line {}: {e}", n + 1)))?;
        let params = line
            .param
            .iter()
            .map(|p| parse_assignment(p))
            .collect::<Result<_>>()?;
        out.push(CorpusEntry {
            id: line.id,
            q_text: line.q,
            params,
            expected_subclass: line.expected_subclass,
            notes: line.notes,
        });
    }
    Ok(out)
}

/// The shipped corpus.
pub fn builtin_corpus() -> Vec<CorpusEntry> {
    load_corpus(BUILTIN).expect("built-in corpus parses")
}

pub fn builtin_text() -> &'static str {
    BUILTIN
}

pub fn corpus_entry(id: &str) -> Option<CorpusEntry> {
    builtin_corpus().into_iter().find(|e| e.id == id)
}

/// Entries whose computed subclass differs from the recorded one, with the
/// computed value.
pub fn validate(entries: &[CorpusEntry]) -> Vec<(String, Result<Subclass>)> {
    entries
        .iter()
        .filter_map(|e| {
            let got = e.equation().and_then(|eq| classify(&eq));
            match &got {
                Ok(s) if *s == e.expected_subclass => None,
                _ => Some((e.id.clone(), got)),
            }
        })
        .collect()
}

/// Pairs with a known verdict under the default configuration.
pub const EXPECTED_PAIRS: &[(&str, &str, Verdict)] = &[
    ("kdv", "mkdv", Verdict::Inequivalent),
    ("linear", "affine", Verdict::Equivalent),
    ("kdv", "kdv-forced", Verdict::Inequivalent),
    ("kdv", "kdv-scaled", Verdict::Equivalent),
];
