//! Immutable symbolic expressions over the fixed symbol alphabet.
//!
//! Constants are exact rationals and powers carry exact rational exponents,
//! so `(C*ux^2)^(1/3)` is an ordinary `Power` node. Construction never
//! simplifies; see [`crate::calculus::simplify`] for the canonical form.

mod eval;
mod parser;
pub(crate) mod printer;
mod symbol;

use std::collections::BTreeSet;
use std::ops;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use eval::{eval_expr, Bindings, CompiledExpr};
pub use parser::parse_expr;
pub use printer::print_expr;
pub use symbol::Symbol;

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Constant(Rational),
    Sym(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, Rational),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Constant(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Constant(Rational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Constant(int(n))
    }

    pub fn rational(numer: i64, denom: i64) -> Expr {
        Expr::Constant(rat(numer, denom))
    }

    pub fn sym(s: Symbol) -> Expr {
        Expr::Sym(s)
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Sum(terms)
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        Expr::Product(factors)
    }

    pub fn pow(self, exponent: Rational) -> Expr {
        Expr::Power(Box::new(self), exponent)
    }

    pub fn powi(self, exponent: i64) -> Expr {
        self.pow(int(exponent))
    }

    pub fn recip(self) -> Expr {
        self.powi(-1)
    }

    pub fn is_constant_zero(&self) -> bool {
        matches!(self, Expr::Constant(c) if c.is_zero())
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        match self {
            Expr::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Sym(s) => {
                out.insert(*s);
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Expr::Power(b, _) => b.collect_symbols(out),
        }
    }

    pub fn contains(&self, s: Symbol) -> bool {
        match self {
            Expr::Constant(_) => false,
            Expr::Sym(t) => *t == s,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|x| x.contains(s)),
            Expr::Power(b, _) => b.contains(s),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Constant(_) | Expr::Sym(_) => 1,
            Expr::Sum(xs) | Expr::Product(xs) => 1 + xs.iter().map(Expr::size).sum::<usize>(),
            Expr::Power(b, _) => 1 + b.size(),
        }
    }
}

/// Replaces every occurrence of `s` in `e` by `r`. The result is not simplified.
pub fn substitute(e: &Expr, s: Symbol, r: &Expr) -> Expr {
    match e {
        Expr::Constant(_) => e.clone(),
        Expr::Sym(t) if *t == s => r.clone(),
        Expr::Sym(_) => e.clone(),
        Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| substitute(x, s, r)).collect()),
        Expr::Product(xs) => Expr::Product(xs.iter().map(|x| substitute(x, s, r)).collect()),
        Expr::Power(b, q) => Expr::Power(Box::new(substitute(b, s, r)), q.clone()),
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::Sym(s)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::Constant(c)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, rhs.recip()])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Constant(c) => Expr::Constant(-c),
            other => Expr::Product(vec![Expr::int(-1), other]),
        }
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_expr(self))
    }
}
