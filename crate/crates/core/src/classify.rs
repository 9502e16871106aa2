//! Subclass decision by the vanishing pattern of the second partials of Q.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::calculus::{partial, simplify, zero_test, ZeroDiagnostic};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, substitute, Bindings, Expr, Rational, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subclass {
    S1,
    S2,
    S3,
    S4,
    Outside,
}

impl Subclass {
    /// Number of basic invariants carried by the subclass.
    pub fn arity(self) -> Option<usize> {
        match self {
            Subclass::S1 => Some(0),
            Subclass::S2 => Some(3),
            Subclass::S3 => Some(11),
            Subclass::S4 => Some(9),
            Subclass::Outside => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Subclass::S1 => "S1",
            Subclass::S2 => "S2",
            Subclass::S3 => "S3",
            Subclass::S4 => "S4",
            Subclass::Outside => "Outside",
        }
    }
}

impl fmt::Display for Subclass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Subclass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "S1" => Subclass::S1,
            "S2" => Subclass::S2,
            "S3" => Subclass::S3,
            "S4" => Subclass::S4,
            "Outside" => Subclass::Outside,
            other => return Err(format!("unknown subclass `{other}`")),
        })
    }
}

/// An equation `u_xxx = u_t + Q(u, u_x)`.
///
/// Parameters `A..D` occurring in Q must either be bound to exact values or
/// the equation must be marked generic, in which case unbound parameters are
/// treated as independent nonzero symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationSpec {
    q: Expr,
    params: BTreeMap<Symbol, Rational>,
    generic: bool,
}

impl EquationSpec {
    pub fn new(q: Expr) -> Result<Self> {
        for s in [Symbol::W, Symbol::Ut, Symbol::Vt] {
            if q.contains(s) {
                return Err(Error::ForbiddenSymbol(s));
            }
        }
        Ok(EquationSpec {
            q,
            params: BTreeMap::new(),
            generic: false,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_expr(text)?)
    }

    pub fn with_param(mut self, s: Symbol, value: Rational) -> Result<Self> {
        if !s.is_param() {
            return Err(Error::Config(format!("`{s}` is not a parameter")));
        }
        self.params.insert(s, value);
        Ok(self)
    }

    /// Treats unbound parameters as generic nonzero symbols.
    pub fn generic(mut self) -> Self {
        self.generic = true;
        self
    }

    pub fn is_generic(&self) -> bool {
        self.generic
    }

    pub fn q(&self) -> &Expr {
        &self.q
    }

    pub fn params(&self) -> &BTreeMap<Symbol, Rational> {
        &self.params
    }

    pub fn unbound_params(&self) -> Vec<Symbol> {
        self.q
            .free_symbols()
            .into_iter()
            .filter(|s| s.is_param() && !self.params.contains_key(s))
            .collect()
    }

    /// Q with bound parameters substituted; unbound ones stay symbolic.
    pub fn bound_q(&self) -> Expr {
        let mut q = self.q.clone();
        for (s, value) in &self.params {
            q = substitute(&q, *s, &Expr::Constant(value.clone()));
        }
        simplify(&q)
    }

    /// Q ready for zero testing: fails on unbound parameters unless generic.
    pub fn resolved_q(&self) -> Result<Expr> {
        if !self.generic {
            if let Some(s) = self.unbound_params().first() {
                return Err(Error::UnboundParameter(*s));
            }
        }
        Ok(self.bound_q())
    }

    pub fn param_bindings(&self) -> Bindings {
        self.params
            .iter()
            .map(|(s, v)| (*s, v.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// The equation satisfied by `lambda * u` when `u` solves this one:
    /// `Q'(u, v) = lambda * Q(u / lambda, v / lambda)`.
    pub fn scaled(&self, lambda: &Rational) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::Config("scaling factor must be nonzero".into()));
        }
        let inv = Expr::Constant(lambda.recip());
        let q = self.bound_q();
        let q = substitute(&q, Symbol::U, &(Expr::Sym(Symbol::U) * inv.clone()));
        let q = substitute(&q, Symbol::V, &(Expr::Sym(Symbol::V) * inv));
        let mut out = EquationSpec::new(simplify(&(Expr::Constant(lambda.clone()) * q)))?;
        out.generic = self.generic;
        Ok(out)
    }
}

/// `(Q_uu, Q_uv, Q_vv)`, simplified. Bound parameters are substituted.
pub fn second_partials(eq: &EquationSpec) -> (Expr, Expr, Expr) {
    let q = eq.bound_q();
    let qu = partial(&q, Symbol::U);
    let qv = partial(&q, Symbol::V);
    (
        partial(&qu, Symbol::U),
        partial(&qu, Symbol::V),
        partial(&qv, Symbol::V),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub subclass: Subclass,
    pub quu: Expr,
    pub quv: Expr,
    pub qvv: Expr,
    /// Zero-test disagreements between normal forms and numeric probes.
    pub diagnostics: Vec<ZeroDiagnostic>,
}

/// Subclass by which of `Q_uu`, `Q_uv`, `Q_vv` vanish identically.
pub fn subclass_of(quu_zero: bool, quv_zero: bool, qvv_zero: bool) -> Subclass {
    match (quu_zero, quv_zero, qvv_zero) {
        (true, true, true) => Subclass::S1,
        (true, false, true) => Subclass::S2,
        (_, false, false) => Subclass::S3,
        (false, false, true) => Subclass::S4,
        _ => Subclass::Outside,
    }
}

pub fn classify_detailed(eq: &EquationSpec) -> Result<Classification> {
    eq.resolved_q()?;
    let (quu, quv, qvv) = second_partials(eq);
    let tests = [zero_test(&quu), zero_test(&quv), zero_test(&qvv)];
    let subclass = subclass_of(tests[0].zero, tests[1].zero, tests[2].zero);
    let diagnostics = tests.into_iter().filter_map(|t| t.diagnostic).collect();
    Ok(Classification {
        subclass,
        quu,
        quv,
        qvv,
        diagnostics,
    })
}

pub fn classify(eq: &EquationSpec) -> Result<Subclass> {
    classify_detailed(eq).map(|c| c.subclass)
}

/// Coefficients of an S2 equation `Q = A u + B u_x + C u u_x + D`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCoeffs {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub d: Expr,
}

pub fn extract_affine(eq: &EquationSpec) -> Result<AffineCoeffs> {
    let subclass = classify(eq)?;
    if subclass != Subclass::S2 {
        return Err(Error::NotS2(subclass));
    }
    let q = eq.resolved_q()?;
    let zero = Expr::zero();
    let qu = partial(&q, Symbol::U);
    let qv = partial(&q, Symbol::V);
    Ok(AffineCoeffs {
        a: simplify(&substitute(&qu, Symbol::V, &zero)),
        b: simplify(&substitute(&qv, Symbol::U, &zero)),
        c: partial(&qu, Symbol::V),
        d: simplify(&substitute(&substitute(&q, Symbol::U, &zero), Symbol::V, &zero)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::is_zero;
    use crate::expr::int;

    fn eq(text: &str) -> EquationSpec {
        EquationSpec::parse(text).unwrap()
    }

    fn p(text: &str) -> Expr {
        simplify(&parse_expr(text).unwrap())
    }

    #[test]
    fn second_partial_examples() {
        assert_eq!(second_partials(&eq("u*ux")), (p("0"), p("1"), p("0")));
        assert_eq!(second_partials(&eq("u^2*ux")), (p("2*ux"), p("2*u"), p("0")));
        assert_eq!(second_partials(&eq("u*ux + ux^2")), (p("0"), p("1"), p("2")));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&eq("u*ux")).unwrap(), Subclass::S2);
        assert_eq!(classify(&eq("u^2*ux")).unwrap(), Subclass::S4);
        assert_eq!(classify(&eq("0")).unwrap(), Subclass::S1);
        assert_eq!(classify(&eq("u^2")).unwrap(), Subclass::Outside);
        assert_eq!(classify(&eq("ux^2")).unwrap(), Subclass::Outside);
        assert_eq!(classify(&eq("u*ux + ux^2")).unwrap(), Subclass::S3);
    }

    #[test]
    fn partition_is_exhaustive_and_exclusive() {
        let mut seen = std::collections::BTreeMap::new();
        for bits in 0..8u8 {
            let (a, b, c) = (bits & 1 != 0, bits & 2 != 0, bits & 4 != 0);
            *seen.entry(subclass_of(a, b, c)).or_insert(0) += 1;
        }
        // S3 covers Q_uu either way; Outside covers Q_uv = 0 with a nonzero pure second partial.
        assert_eq!(seen[&Subclass::S1], 1);
        assert_eq!(seen[&Subclass::S2], 1);
        assert_eq!(seen[&Subclass::S3], 2);
        assert_eq!(seen[&Subclass::S4], 1);
        assert_eq!(seen[&Subclass::Outside], 3);
    }

    #[test]
    fn forbidden_symbols_rejected() {
        assert_eq!(
            EquationSpec::parse("u*w"),
            Err(Error::ForbiddenSymbol(Symbol::W))
        );
        assert!(EquationSpec::parse("u_t").is_err());
    }

    #[test]
    fn parameters_must_be_bound_or_generic() {
        let e = eq("C*u*ux");
        assert_eq!(classify(&e), Err(Error::UnboundParameter(Symbol::C)));
        assert_eq!(classify(&e.clone().generic()).unwrap(), Subclass::S2);
        let zero_c = e.clone().with_param(Symbol::C, int(0)).unwrap();
        assert_eq!(classify(&zero_c).unwrap(), Subclass::S1);
        let two = e.with_param(Symbol::C, int(2)).unwrap();
        assert_eq!(classify(&two).unwrap(), Subclass::S2);
    }

    #[test]
    fn affine_examples() {
        let c = extract_affine(&eq("3*u + 2*ux + 5*u*ux + 7")).unwrap();
        assert_eq!((c.a, c.b, c.c, c.d), (p("3"), p("2"), p("5"), p("7")));
        let c = extract_affine(&eq("u*ux")).unwrap();
        assert_eq!((c.a, c.b, c.c, c.d), (p("0"), p("0"), p("1"), p("0")));
        let c = extract_affine(&eq("u + u*ux")).unwrap();
        assert_eq!((c.a, c.b, c.c, c.d), (p("1"), p("0"), p("1"), p("0")));
    }

    #[test]
    fn affine_reconstructs_q() {
        for text in ["3*u + 2*ux + 5*u*ux + 7", "u*ux", "(u + 1)*(ux - 2)"] {
            let e = eq(text);
            let c = extract_affine(&e).unwrap();
            let u = Expr::Sym(Symbol::U);
            let v = Expr::Sym(Symbol::V);
            let rebuilt = c.a * u.clone() + c.b * v.clone() + c.c * u * v + c.d;
            assert!(is_zero(&(e.bound_q() - rebuilt)), "{text}");
        }
    }

    #[test]
    fn affine_rejects_other_subclasses() {
        assert_eq!(
            extract_affine(&eq("u^2*ux")),
            Err(Error::NotS2(Subclass::S4))
        );
    }

    #[test]
    fn symbolic_affine_family() {
        let e = eq("A*u + B*ux + C*u*ux + D").generic();
        let c = extract_affine(&e).unwrap();
        assert_eq!((c.a, c.b, c.c, c.d), (p("A"), p("B"), p("C"), p("D")));
    }

    #[test]
    fn scaling_halves_kdv_into_doubled_coefficient() {
        let kdv = eq("u*ux");
        let scaled = kdv.scaled(&crate::expr::rat(1, 2)).unwrap();
        assert_eq!(scaled.bound_q(), p("2*u*ux"));
    }
}
