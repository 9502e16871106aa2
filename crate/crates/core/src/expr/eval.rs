use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use super::{print_expr, Expr, Rational, Symbol};
use crate::error::ExprError;

/// Numeric values for some or all of the nine symbols.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    values: [Option<f64>; 9],
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, s: Symbol, value: f64) -> Self {
        self.set(s, value);
        self
    }

    pub fn set(&mut self, s: Symbol, value: f64) {
        self.values[s.index()] = Some(value);
    }

    pub fn get(&self, s: Symbol) -> Option<f64> {
        self.values[s.index()]
    }

    /// Returns a copy with `s` shifted by `delta`. `s` must be bound.
    pub fn shifted(&self, s: Symbol, delta: f64) -> Result<Self, ExprError> {
        let base = self.get(s).ok_or(ExprError::Unbound(s))?;
        let mut out = *self;
        out.set(s, base + delta);
        Ok(out)
    }

    /// Dense value array; unbound slots are NaN.
    pub fn to_array(&self) -> [f64; 9] {
        self.values.map(|v| v.unwrap_or(f64::NAN))
    }
}

impl FromIterator<(Symbol, f64)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (Symbol, f64)>>(iter: I) -> Self {
        let mut b = Bindings::new();
        for (s, x) in iter {
            b.set(s, x);
        }
        b
    }
}

/// Evaluates `e` in double precision.
///
/// Rational powers with an odd denominator take the real root for negative
/// bases, so `(ux^2)^(1/3)` at `ux = -1` is 1. Even denominators require a
/// nonnegative base.
pub fn eval_expr(e: &Expr, b: &Bindings) -> Result<f64, ExprError> {
    for s in e.free_symbols() {
        if b.get(s).is_none() {
            return Err(ExprError::Unbound(s));
        }
    }
    CompiledExpr::new(e).eval(&b.to_array())
}

#[derive(Debug, Clone)]
struct Exponent {
    value: f64,
    int: Option<i32>,
    odd_numer: bool,
    even_denom: bool,
    negative: bool,
    text: String,
}

impl Exponent {
    fn new(q: &Rational) -> Self {
        let int = if q.is_integer() { q.numer().to_i32() } else { None };
        Exponent {
            value: q.to_f64().unwrap_or(f64::NAN),
            int,
            odd_numer: q.numer().is_odd(),
            even_denom: q.denom().is_even(),
            negative: q.is_negative(),
            text: super::printer::rational_text(q),
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Sym(usize),
    Sum(Vec<Node>),
    Product(Vec<Node>),
    /// Base, exponent, index into the denominator table when the exponent is negative.
    Pow(Box<Node>, Exponent, Option<usize>),
}

/// An expression lowered to `f64` constants for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    root: Node,
    denominators: Vec<String>,
    symbols: Vec<Symbol>,
}

impl CompiledExpr {
    pub fn new(e: &Expr) -> Self {
        let mut denominators = Vec::new();
        let root = lower(e, &mut denominators);
        CompiledExpr {
            root,
            denominators,
            symbols: e.free_symbols().into_iter().collect(),
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// `values` is indexed by [`Symbol::index`].
    pub fn eval(&self, values: &[f64; 9]) -> Result<f64, ExprError> {
        self.eval_node(&self.root, values, None)
    }

    /// Like [`Self::eval`] but fails with [`ExprError::Singular`] when any
    /// negative-exponent base has magnitude below `threshold`.
    pub fn eval_checked(&self, values: &[f64; 9], threshold: f64) -> Result<f64, ExprError> {
        self.eval_node(&self.root, values, Some(threshold))
    }

    fn eval_node(&self, n: &Node, x: &[f64; 9], guard: Option<f64>) -> Result<f64, ExprError> {
        Ok(match n {
            Node::Const(c) => *c,
            Node::Sym(i) => x[*i],
            Node::Sum(xs) => {
                let mut acc = 0.0;
                for t in xs {
                    acc += self.eval_node(t, x, guard)?;
                }
                acc
            }
            Node::Product(xs) => {
                let mut acc = 1.0;
                for t in xs {
                    acc *= self.eval_node(t, x, guard)?;
                }
                acc
            }
            Node::Pow(base, q, denom) => {
                let b = self.eval_node(base, x, guard)?;
                if let (Some(t), Some(d)) = (guard, denom) {
                    if b.abs() < t {
                        return Err(ExprError::Singular {
                            denominator: self.denominators[*d].clone(),
                            value: b,
                        });
                    }
                }
                real_pow(b, q)?
            }
        })
    }
}

fn lower(e: &Expr, denominators: &mut Vec<String>) -> Node {
    match e {
        Expr::Constant(c) => Node::Const(c.to_f64().unwrap_or(f64::NAN)),
        Expr::Sym(s) => Node::Sym(s.index()),
        Expr::Sum(xs) => Node::Sum(xs.iter().map(|x| lower(x, denominators)).collect()),
        Expr::Product(xs) => Node::Product(xs.iter().map(|x| lower(x, denominators)).collect()),
        Expr::Power(b, q) => {
            let denom = if q.is_negative() {
                denominators.push(print_expr(b));
                Some(denominators.len() - 1)
            } else {
                None
            };
            Node::Pow(Box::new(lower(b, denominators)), Exponent::new(q), denom)
        }
    }
}

fn real_pow(b: f64, q: &Exponent) -> Result<f64, ExprError> {
    if let Some(n) = q.int {
        if b == 0.0 && n < 0 {
            return Err(ExprError::DivisionByZero);
        }
        return Ok(b.powi(n));
    }
    if b == 0.0 {
        return if q.negative {
            Err(ExprError::DivisionByZero)
        } else {
            Ok(0.0)
        };
    }
    if b < 0.0 {
        if q.even_denom {
            return Err(ExprError::EvenRootOfNegative {
                base: b,
                exponent: q.text.clone(),
            });
        }
        let mag = (-b).powf(q.value);
        return Ok(if q.odd_numer { -mag } else { mag });
    }
    Ok(b.powf(q.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, rat};

    fn at(pairs: &[(Symbol, f64)]) -> Bindings {
        pairs.iter().copied().collect()
    }

    #[test]
    fn product_of_bound_symbols() {
        let e = parse_expr("u*ux").unwrap();
        let b = at(&[(Symbol::U, 2.0), (Symbol::V, 3.0)]);
        assert_eq!(eval_expr(&e, &b).unwrap(), 6.0);
    }

    #[test]
    fn real_odd_root_of_square() {
        let e = Expr::Sym(Symbol::V).powi(2).pow(rat(1, 3));
        let b = at(&[(Symbol::V, -1.0)]);
        assert_eq!(eval_expr(&e, &b).unwrap(), 1.0);
        let cube_root = Expr::Sym(Symbol::V).pow(rat(1, 3));
        let b = at(&[(Symbol::V, -8.0)]);
        assert!((eval_expr(&cube_root, &b).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_of_zero() {
        let e = Expr::Sym(Symbol::V).powi(-1);
        let b = at(&[(Symbol::V, 0.0)]);
        assert_eq!(eval_expr(&e, &b), Err(ExprError::DivisionByZero));
        let e = Expr::Sym(Symbol::V).pow(rat(-2, 3));
        assert_eq!(eval_expr(&e, &b), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn even_root_of_negative() {
        let e = Expr::Sym(Symbol::U).pow(rat(1, 2));
        let b = at(&[(Symbol::U, -4.0)]);
        assert!(matches!(
            eval_expr(&e, &b),
            Err(ExprError::EvenRootOfNegative { .. })
        ));
    }

    #[test]
    fn unbound_symbol_is_an_error() {
        let e = parse_expr("u + C").unwrap();
        let b = at(&[(Symbol::U, 1.0)]);
        assert_eq!(eval_expr(&e, &b), Err(ExprError::Unbound(Symbol::C)));
    }

    #[test]
    fn checked_eval_names_denominator() {
        let e = parse_expr("w*(C*ux^2)^(-1)").unwrap();
        let c = CompiledExpr::new(&e);
        let mut x = [1.0; 9];
        x[Symbol::V.index()] = 1e-4;
        match c.eval_checked(&x, 1e-6) {
            Err(ExprError::Singular { denominator, .. }) => assert_eq!(denominator, "C*ux^2"),
            other => panic!("{other:?}"),
        }
        x[Symbol::V.index()] = 1e-2;
        assert!(c.eval_checked(&x, 1e-6).is_ok());
    }
}
