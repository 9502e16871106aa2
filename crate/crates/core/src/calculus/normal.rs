//! Canonical normal form: an expanded sum of monomials `c * prod(atom^q)`.
//!
//! Atoms are symbols, positive rational constants raised to a fractional
//! exponent in (0, 1), and opaque bases (multi-term sums) raised to any
//! exponent that is not a positive integer. Powers distribute over products
//! and positive integer powers of sums are expanded; other powers of sums are
//! kept, with the base scaled so its leading coefficient is 1.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::expr::printer::{factor_order, term_order};
use crate::expr::{Expr, Rational, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Const(Rational),
    Sym(Symbol),
    Base(Expr),
}

type Mono = BTreeMap<Atom, Rational>;

#[derive(Debug, Clone, Default, PartialEq)]
struct Poly {
    terms: BTreeMap<Mono, Rational>,
}

/// Canonical form of `e`. Equal results mean equal expressions; the result
/// prints through [`crate::expr::print_expr`] and parses back node-for-node.
pub fn simplify(e: &Expr) -> Expr {
    normalize(e).to_expr()
}

fn normalize(e: &Expr) -> Poly {
    match e {
        Expr::Constant(c) => Poly::constant(c.clone()),
        Expr::Sym(s) => Poly::monomial(Rational::one(), Mono::from([(Atom::Sym(*s), Rational::one())])),
        Expr::Sum(xs) => xs.iter().fold(Poly::zero(), |acc, x| acc.add(&normalize(x))),
        Expr::Product(xs) => {
            let mut acc = Poly::constant(Rational::one());
            for x in xs {
                if acc.is_zero() {
                    break;
                }
                acc = acc.mul(&normalize(x));
            }
            acc
        }
        Expr::Power(b, q) => normalize(b).pow(q),
    }
}

impl Poly {
    fn zero() -> Self {
        Poly::default()
    }

    fn constant(c: Rational) -> Self {
        Poly::monomial(c, Mono::new())
    }

    fn monomial(c: Rational, m: Mono) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    fn add(mut self, other: &Poly) -> Poly {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
        self
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = ma.clone();
                for (atom, q) in mb {
                    *m.entry(atom.clone()).or_insert_with(Rational::zero) += q;
                }
                for (mm, cc) in settle(ca * cb, m).terms {
                    out.add_term(mm, cc);
                }
            }
        }
        out
    }

    fn pow(&self, q: &Rational) -> Poly {
        if q.is_zero() {
            return Poly::constant(Rational::one());
        }
        if q.is_one() {
            return self.clone();
        }
        if self.is_zero() {
            return if q.is_positive() {
                Poly::zero()
            } else {
                opaque(Expr::zero(), q.clone())
            };
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let (coef, atoms) = const_power(c, q);
            let mut out_m: Mono = atoms.into_iter().collect();
            for (atom, e) in m {
                *out_m.entry(atom.clone()).or_insert_with(Rational::zero) += e * q;
            }
            return settle(coef, out_m);
        }
        if q.is_integer() && q.is_positive() {
            return self.pow_uint(q.numer().to_u64().expect("exponent fits in u64"));
        }
        // Multi-term base: scale to a unit leading coefficient.
        let lead = self.leading_coefficient();
        let scale = lead.abs();
        let mut base = self.scaled(&scale.recip());
        let (mut coef, atoms) = const_power(&scale, q);
        let mut m: Mono = atoms.into_iter().collect();
        if lead.is_negative() && q.denom().is_odd() {
            base = base.scaled(&-Rational::one());
            if q.numer().is_odd() {
                coef = -coef;
            }
        }
        *m.entry(Atom::Base(base.to_expr())).or_insert_with(Rational::zero) += q;
        settle(coef, m)
    }

    fn pow_uint(&self, mut n: u64) -> Poly {
        let mut result = Poly::constant(Rational::one());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    fn scaled(&self, k: &Rational) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    fn leading_coefficient(&self) -> Rational {
        let mut terms: Vec<(Expr, &Rational)> =
            self.terms.iter().map(|(m, c)| (mono_expr(&Rational::one(), m), c)).collect();
        terms.sort_by(|a, b| term_order(&a.0, &b.0));
        terms[0].1.clone()
    }

    fn to_expr(&self) -> Expr {
        let mut terms: Vec<Expr> = self.terms.iter().map(|(m, c)| mono_expr(c, m)).collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => {
                terms.sort_by(term_order);
                Expr::Sum(terms)
            }
        }
    }
}

fn opaque(base: Expr, q: Rational) -> Poly {
    Poly::monomial(Rational::one(), Mono::from([(Atom::Base(base), q)]))
}

fn atom_expr(a: &Atom) -> Expr {
    match a {
        Atom::Const(c) => Expr::Constant(c.clone()),
        Atom::Sym(s) => Expr::Sym(*s),
        Atom::Base(e) => e.clone(),
    }
}

fn mono_expr(c: &Rational, m: &Mono) -> Expr {
    let mut factors: Vec<Expr> = m
        .iter()
        .map(|(a, q)| {
            if q.is_one() {
                atom_expr(a)
            } else {
                atom_expr(a).pow(q.clone())
            }
        })
        .collect();
    factors.sort_by(factor_order);
    if c.is_one() {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.pop().unwrap(),
            _ => Expr::Product(factors),
        }
    } else if factors.is_empty() {
        Expr::Constant(c.clone())
    } else {
        factors.insert(0, Expr::Constant(c.clone()));
        Expr::Product(factors)
    }
}

/// Restores monomial invariants after exponents were combined: drops zero
/// exponents, moves integer parts of constant radicals into the coefficient
/// and expands sums raised to positive integer powers.
fn settle(mut coef: Rational, m: Mono) -> Poly {
    let mut kept = Mono::new();
    let mut expand: Vec<(Expr, u64)> = Vec::new();
    for (atom, q) in m {
        if q.is_zero() {
            continue;
        }
        match atom {
            Atom::Const(c) | Atom::Base(Expr::Constant(c)) if !c.is_zero() => {
                let (k, atoms) = const_power(&c, &q);
                coef *= k;
                for (a, e) in atoms {
                    *kept.entry(a).or_insert_with(Rational::zero) += e;
                }
            }
            Atom::Base(b) if b.is_constant_zero() && q.is_positive() => return Poly::zero(),
            Atom::Base(b) if q.is_integer() && q.is_positive() && !b.is_constant_zero() => {
                expand.push((b, q.numer().to_u64().expect("exponent fits in u64")));
            }
            other => {
                *kept.entry(other).or_insert_with(Rational::zero) += q;
            }
        }
    }
    kept.retain(|_, q| !q.is_zero());
    if coef.is_zero() {
        return Poly::zero();
    }
    let mut out = Poly::monomial(coef, kept);
    for (b, n) in expand {
        out = out.mul(&normalize(&b).pow_uint(n));
    }
    out
}

/// `c^q` as a rational coefficient times at most one constant radical atom.
fn const_power(c: &Rational, q: &Rational) -> (Rational, Vec<(Atom, Rational)>) {
    if q.is_zero() || c.is_one() {
        return (Rational::one(), vec![]);
    }
    if q.is_integer() {
        let n = q.numer().to_i32().expect("integer exponent fits in i32");
        return (c.pow(n), vec![]);
    }
    if c.is_zero() {
        return if q.is_positive() {
            (Rational::zero(), vec![])
        } else {
            (Rational::one(), vec![(Atom::Base(Expr::zero()), q.clone())])
        };
    }
    let mut sign = Rational::one();
    let mut mag = c.clone();
    if c.is_negative() {
        if q.denom().is_even() {
            return (
                Rational::one(),
                vec![(Atom::Base(Expr::Constant(c.clone())), q.clone())],
            );
        }
        mag = -mag;
        if q.numer().is_odd() {
            sign = -sign;
        }
    }
    if mag.is_one() {
        return (sign, vec![]);
    }
    let (root, m) = perfect_power(&mag);
    let e = q * Rational::from_integer(BigInt::from(m));
    let whole = e.floor();
    let frac = &e - &whole;
    let k = root.pow(whole.numer().to_i32().expect("exponent fits in i32"));
    if frac.is_zero() {
        return (sign * k, vec![]);
    }
    (sign * k, vec![(Atom::Const(root), frac)])
}

/// Writes a positive rational as `r^m` with the largest `m` it can find.
fn perfect_power(c: &Rational) -> (Rational, u32) {
    let (n, d) = (c.numer(), c.denom());
    let bits = n.bits().max(d.bits()).min(64) as u32;
    for m in (2..=bits).rev() {
        let rn = n.nth_root(m);
        if rn.pow(m) != *n {
            continue;
        }
        let rd = d.nth_root(m);
        if rd.pow(m) == *d {
            return (Rational::new(rn, rd), m);
        }
    }
    (c.clone(), 1)
}
