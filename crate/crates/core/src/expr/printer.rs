use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use super::{Expr, Rational, Symbol};

/// Prints `e` as text accepted by [`super::parse_expr`].
///
/// Summands are ordered by graded lexicographic order on the symbol order
/// `u < ux < w < u_t < v_t < A < B < C < D` (higher total degree first) and
/// factors by kind then symbol order. No algebraic rewriting happens here, so
/// printing a canonical form and parsing it back yields the same tree.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Constant(c) => out.push_str(&rational_text(c)),
        Expr::Sym(s) => out.push_str(s.name()),
        Expr::Sum(terms) => write_sum(terms, out),
        Expr::Product(factors) => write_product(factors, out),
        Expr::Power(base, q) => write_power(base, q, out),
    }
}

fn write_sum(terms: &[Expr], out: &mut String) {
    if terms.is_empty() {
        out.push('0');
        return;
    }
    let mut sorted: Vec<&Expr> = terms.iter().collect();
    sorted.sort_by(|a, b| term_order(a, b));
    for (i, t) in sorted.into_iter().enumerate() {
        if i == 0 {
            write_summand(t, out);
        } else if let Some(neg) = negated_if_negative(t) {
            out.push_str(" - ");
            write_summand(&neg, out);
        } else {
            out.push_str(" + ");
            write_summand(t, out);
        }
    }
}

fn write_summand(t: &Expr, out: &mut String) {
    if matches!(t, Expr::Sum(_)) {
        out.push('(');
        write_expr(t, out);
        out.push(')');
    } else {
        write_expr(t, out);
    }
}

/// For a summand whose printed form would start with a minus sign, returns
/// the tree that parses back to it after the parser's negation.
fn negated_if_negative(t: &Expr) -> Option<Expr> {
    match t {
        Expr::Constant(c) if c.is_negative() => Some(Expr::Constant(-c)),
        Expr::Product(fs) => {
            let sorted = sorted_factors(fs);
            let Some(Expr::Constant(c)) = sorted.first().copied() else {
                return None;
            };
            if !c.is_negative() {
                return None;
            }
            let rest: Vec<Expr> = sorted[1..].iter().map(|x| (*x).clone()).collect();
            let flipped = -c.clone();
            if flipped.is_one() {
                match rest.len() {
                    0 => Some(Expr::one()),
                    // A lone Product would be flattened by the parser, so keep it wrapped.
                    1 if !matches!(rest[0], Expr::Product(_) | Expr::Constant(_)) => {
                        Some(rest.into_iter().next().unwrap())
                    }
                    _ => Some(Expr::Product(rest)),
                }
            } else {
                let mut v = Vec::with_capacity(rest.len() + 1);
                v.push(Expr::Constant(flipped));
                v.extend(rest);
                Some(Expr::Product(v))
            }
        }
        _ => None,
    }
}

fn write_product(factors: &[Expr], out: &mut String) {
    if factors.is_empty() {
        out.push('1');
        return;
    }
    let sorted = sorted_factors(factors);
    let mut start = 0;
    if let (Some(Expr::Constant(c)), true) = (sorted.first(), sorted.len() > 1) {
        if (-c.clone()).is_one() {
            out.push('-');
            start = 1;
        }
    }
    for (i, f) in sorted.iter().enumerate().skip(start) {
        if i > start {
            out.push('*');
        }
        let leading = i == 0;
        match f {
            Expr::Constant(c) if !leading && (c.is_negative() || !c.is_integer()) => {
                out.push('(');
                out.push_str(&rational_text(c));
                out.push(')');
            }
            Expr::Sum(_) | Expr::Product(_) => {
                out.push('(');
                write_expr(f, out);
                out.push(')');
            }
            _ => write_expr(f, out),
        }
    }
}

fn write_power(base: &Expr, q: &Rational, out: &mut String) {
    let atomic = match base {
        Expr::Sym(_) => true,
        Expr::Constant(c) => c.is_integer() && !c.is_negative(),
        _ => false,
    };
    if atomic {
        write_expr(base, out);
    } else {
        out.push('(');
        write_expr(base, out);
        out.push(')');
    }
    out.push('^');
    if q.is_integer() && !q.is_negative() {
        out.push_str(&q.numer().to_string());
    } else {
        out.push('(');
        out.push_str(&rational_text(q));
        out.push(')');
    }
}

pub(crate) fn rational_text(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn sorted_factors(fs: &[Expr]) -> Vec<&Expr> {
    let mut v: Vec<&Expr> = fs.iter().collect();
    v.sort_by(|a, b| factor_order(a, b));
    v
}

fn factor_rank(e: &Expr) -> (u8, usize) {
    match e {
        Expr::Constant(_) => (0, 0),
        Expr::Power(b, _) if matches!(**b, Expr::Constant(_)) => (1, 0),
        Expr::Sym(s) if s.is_param() => (2, s.index()),
        Expr::Sym(s) => (3, s.index()),
        Expr::Power(b, _) => match **b {
            Expr::Sym(s) if s.is_param() => (2, s.index()),
            Expr::Sym(s) => (4, s.index()),
            _ => (5, 0),
        },
        _ => (5, 0),
    }
}

/// Total order on product factors: constants, constant radicals, parameters,
/// bare jet symbols, jet symbol powers, then everything else by printed text.
pub(crate) fn factor_order(a: &Expr, b: &Expr) -> Ordering {
    factor_rank(a)
        .cmp(&factor_rank(b))
        .then_with(|| print_expr(a).cmp(&print_expr(b)))
}

/// Exponent vector over the symbol alphabet plus the non-symbol residue text.
struct TermKey {
    exps: Vec<Rational>,
    degree: Rational,
    residue: String,
}

fn term_key(t: &Expr) -> TermKey {
    let mut exps = vec![Rational::zero(); Symbol::ALL.len()];
    let mut residue = Vec::new();
    let mut visit = |f: &Expr| match f {
        Expr::Sym(s) => exps[s.index()] += Rational::one(),
        Expr::Power(b, q) if matches!(**b, Expr::Sym(_)) => {
            if let Expr::Sym(s) = **b {
                exps[s.index()] += q.clone();
            }
        }
        Expr::Constant(_) => {}
        other => residue.push(print_expr(other)),
    };
    match t {
        Expr::Product(fs) => fs.iter().for_each(&mut visit),
        other => visit(other),
    }
    residue.sort();
    let degree = exps.iter().fold(Rational::zero(), |acc, x| acc + x);
    TermKey {
        exps,
        degree,
        residue: residue.join("*"),
    }
}

fn coefficient(t: &Expr) -> Rational {
    match t {
        Expr::Constant(c) => c.clone(),
        Expr::Product(fs) => fs
            .iter()
            .filter_map(Expr::as_constant)
            .fold(Rational::one(), |acc, c| acc * c),
        _ => Rational::one(),
    }
}

/// Graded lexicographic order on summands: higher total degree first, then
/// the larger exponent on the earlier symbol, then the non-symbol residue,
/// then the coefficient.
pub(crate) fn term_order(a: &Expr, b: &Expr) -> Ordering {
    let ka = term_key(a);
    let kb = term_key(b);
    kb.degree
        .cmp(&ka.degree)
        .then_with(|| {
            for (x, y) in ka.exps.iter().zip(&kb.exps) {
                match y.cmp(x) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
        .then_with(|| ka.residue.cmp(&kb.residue))
        .then_with(|| coefficient(a).cmp(&coefficient(b)))
        .then_with(|| print_expr(a).cmp(&print_expr(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn u() -> Expr {
        Expr::Sym(Symbol::U)
    }
    fn v() -> Expr {
        Expr::Sym(Symbol::V)
    }

    #[test]
    fn product_is_ordered() {
        assert_eq!(print_expr(&Expr::Product(vec![v(), u()])), "u*ux");
    }

    #[test]
    fn sum_is_ordered() {
        assert_eq!(print_expr(&Expr::Sum(vec![v(), u()])), "u + ux");
    }

    #[test]
    fn radical_of_product() {
        let e = Expr::Product(vec![Expr::Sym(Symbol::C), v().powi(2)]).pow(rat(1, 3));
        assert_eq!(print_expr(&e), "(C*ux^2)^(1/3)");
    }

    #[test]
    fn graded_order_puts_higher_degree_first() {
        let e = Expr::Sum(vec![
            Expr::int(7),
            Expr::Product(vec![Expr::int(3), u()]),
            Expr::Product(vec![Expr::int(5), u(), v()]),
            Expr::Product(vec![Expr::int(2), v()]),
        ]);
        assert_eq!(print_expr(&e), "5*u*ux + 3*u + 2*ux + 7");
    }

    #[test]
    fn negative_terms_use_minus() {
        let e = Expr::Sum(vec![
            u(),
            Expr::Product(vec![Expr::int(-1), v()]),
            Expr::Product(vec![Expr::Constant(rat(-2, 3)), Expr::Sym(Symbol::W)]),
            Expr::int(-4),
        ]);
        assert_eq!(print_expr(&e), "u - ux - 2/3*w - 4");
    }

    #[test]
    fn exponents() {
        assert_eq!(print_expr(&v().pow(rat(-2, 3))), "ux^(-2/3)");
        assert_eq!(print_expr(&v().powi(-2)), "ux^(-2)");
        assert_eq!(print_expr(&Expr::Sym(Symbol::Ut).powi(3)), "u_t^3");
    }

    #[test]
    fn non_leading_rational_is_parenthesized() {
        let e = Expr::Product(vec![u(), Expr::Constant(rat(2, 3)), Expr::int(5)]);
        assert_eq!(print_expr(&e), "2/3*5*u");
    }
}
