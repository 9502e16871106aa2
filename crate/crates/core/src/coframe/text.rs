//! Plain-text model format.
//!
//! ```text
//! # comment
//! forms w1 w2 w3          (optional; otherwise forms are declared on first use)
//! d w1 = -w2 ^ w3
//! d w2 = 1/2 * w3 ^ w1 - 2 * w1 ^ w2
//! d w3 = 0
//! ```
//!
//! Forms that never get a `d` line are undetermined.

use num_traits::One;

use super::CoframeModel;
use crate::error::CoframeError;
use crate::expr::Rational;

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(&'a str),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Wedge,
    Eq,
}

fn tokenize(line: &str) -> Result<Vec<Tok<'_>>, String> {
    let mut out = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '^' | '=' => {
                out.push(match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Wedge,
                    _ => Tok::Eq,
                });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'/') {
                    i += 1;
                }
                out.push(Tok::Num(&line[start..i]));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Tok::Ident(&line[start..i]));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>()
        .map_err(|_| format!("bad coefficient `{s}`"))
}

type Terms<'a> = Vec<(Rational, &'a str, &'a str)>;

fn parse_rhs<'a>(toks: &[Tok<'a>]) -> Result<Terms<'a>, String> {
    if let [Tok::Num(n)] = toks {
        if parse_rational(n)? == Rational::from_integer(0.into()) {
            return Ok(vec![]);
        }
    }
    let mut terms = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let mut c = Rational::one();
        match toks[i] {
            Tok::Plus => i += 1,
            Tok::Minus => {
                c = -c;
                i += 1;
            }
            _ if i > 0 => return Err("expected `+` or `-` between terms".into()),
            _ => {}
        }
        if let Some(Tok::Num(n)) = toks.get(i) {
            c *= parse_rational(n)?;
            i += 1;
            if toks.get(i) == Some(&Tok::Star) {
                i += 1;
            }
        }
        match toks.get(i..i + 3) {
            Some([Tok::Ident(a), Tok::Wedge, Tok::Ident(b)]) => {
                terms.push((c, *a, *b));
                i += 3;
            }
            _ => return Err("expected `NAME ^ NAME`".into()),
        }
    }
    Ok(terms)
}

pub fn parse_model(name: &str, text: &str) -> Result<CoframeModel, CoframeError> {
    let mut model = CoframeModel::new(name);
    let mut declared = false;
    let mut rules: Vec<(usize, &str, Terms<'_>)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let err = |message: String| CoframeError::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks = tokenize(line).map_err(err)?;
        match toks.as_slice() {
            [Tok::Ident("forms"), rest @ ..] => {
                if declared || !rules.is_empty() {
                    return Err(err("`forms` must come first and only once".into()));
                }
                for t in rest {
                    let Tok::Ident(f) = t else {
                        return Err(err("`forms` takes names only".into()));
                    };
                    if model.index(f).is_some() {
                        return Err(err(format!("form `{f}` declared twice")));
                    }
                    model.declare(f);
                }
                declared = true;
            }
            [Tok::Ident("d"), Tok::Ident(f), Tok::Eq, rest @ ..] => {
                let terms = parse_rhs(rest).map_err(err)?;
                rules.push((line_no, f, terms));
            }
            _ => return Err(err("expected `forms ...` or `d NAME = ...`".into())),
        }
    }
    for (line, f, terms) in &rules {
        for name in std::iter::once(*f).chain(terms.iter().flat_map(|(_, a, b)| [*a, *b])) {
            if model.index(name).is_none() {
                if declared {
                    return Err(CoframeError::Parse {
                        line: *line,
                        message: format!("undeclared form `{name}`"),
                    });
                }
                model.declare(name);
            }
        }
    }
    for (_, f, terms) in &rules {
        model.set_rule(f, terms)?;
    }
    Ok(model)
}
