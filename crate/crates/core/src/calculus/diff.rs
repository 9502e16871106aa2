use num_traits::{One, Zero};

use crate::expr::{Expr, Rational, Symbol};

/// Exact partial derivative of `e` with respect to `s`. The result is not
/// simplified; branches that do not contain `s` are pruned to zero.
pub fn diff(e: &Expr, s: Symbol) -> Expr {
    if !e.contains(s) {
        return Expr::zero();
    }
    match e {
        Expr::Constant(_) => Expr::zero(),
        Expr::Sym(t) => {
            if *t == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(xs) => Expr::Sum(
            xs.iter()
                .filter(|x| x.contains(s))
                .map(|x| diff(x, s))
                .collect(),
        ),
        Expr::Product(xs) => {
            let mut terms = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                if !x.contains(s) {
                    continue;
                }
                let mut factors = Vec::with_capacity(xs.len());
                factors.extend(xs[..i].iter().cloned());
                factors.push(diff(x, s));
                factors.extend(xs[i + 1..].iter().cloned());
                terms.push(Expr::Product(factors));
            }
            Expr::Sum(terms)
        }
        Expr::Power(b, q) => {
            if q.is_zero() {
                return Expr::zero();
            }
            let lowered = q - Rational::one();
            let outer = if lowered.is_zero() {
                Expr::one()
            } else {
                Expr::Power(b.clone(), lowered)
            };
            Expr::Product(vec![Expr::Constant(q.clone()), outer, diff(b, s)])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::simplify;
    use crate::expr::parse_expr;

    fn d(text: &str, s: Symbol) -> Expr {
        simplify(&diff(&parse_expr(text).unwrap(), s))
    }

    fn p(text: &str) -> Expr {
        simplify(&parse_expr(text).unwrap())
    }

    #[test]
    fn product_rule() {
        assert_eq!(d("u*ux", Symbol::U), p("ux"));
        assert_eq!(d("u^2*ux", Symbol::V), p("u^2"));
    }

    #[test]
    fn rational_power_rule() {
        assert_eq!(
            d("(C*ux^2)^(1/3)", Symbol::V),
            p("(2/3)*C*ux*(C*ux^2)^(-2/3)")
        );
    }

    #[test]
    fn absent_symbol_gives_zero() {
        assert_eq!(diff(&parse_expr("u*ux").unwrap(), Symbol::W), Expr::zero());
    }

    #[test]
    fn quotient() {
        assert_eq!(d("w/ux", Symbol::V), p("-w*ux^(-2)"));
    }
}
