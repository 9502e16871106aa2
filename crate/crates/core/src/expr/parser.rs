//! Recursive-descent parser for the Q surface syntax.
//!
//! ```text
//! expr     := term (("+"|"-") term)*
//! term     := factor (("*"|"/") factor)*
//! factor   := "-" factor | atom ("^" exponent)?
//! atom     := number | ident | "(" expr ")"
//! exponent := ["-"] integer | "(" ["-"] integer ["/" integer] ")"
//! ident    := "u" | "ux" | "w" | "u_t" | "v_t" | "A" | "B" | "C" | "D"
//! ```
//!
//! Sums and products are flattened, a minus applied to a literal or to a
//! product with a leading literal folds into that literal, and `lit / lit`
//! folds to one rational. Everything else is kept as written.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Expr, Rational, Symbol};
use crate::error::ExprError;

pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = Vec::new();
        push_flat_sum(&mut terms, self.term()?);
        loop {
            if self.eat(b'+') {
                push_flat_sum(&mut terms, self.term()?);
            } else if self.eat(b'-') {
                let t = self.term()?;
                push_flat_sum(&mut terms, negate(t));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut factors = Vec::new();
        push_flat_product(&mut factors, self.factor()?);
        loop {
            if self.eat(b'*') {
                push_flat_product(&mut factors, self.factor()?);
            } else if self.eat(b'/') {
                let f = self.factor()?;
                match (factors.last_mut(), &f) {
                    (Some(Expr::Constant(num)), Expr::Constant(den)) if !den.is_zero() => {
                        *num = &*num / den;
                    }
                    _ => factors.push(f.recip()),
                }
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(negate(self.factor()?));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let q = self.exponent()?;
            Ok(base.pow(q))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Expr::Constant(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let token = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        let sym = match token {
            "u" => Symbol::U,
            "ux" => Symbol::V,
            "w" => Symbol::W,
            "u_t" => Symbol::Ut,
            "v_t" => Symbol::Vt,
            "A" => Symbol::A,
            "B" => Symbol::B,
            "C" => Symbol::C,
            "D" => Symbol::D,
            _ => {
                return Err(ExprError::UnknownIdentifier {
                    offset: start,
                    token: token.to_string(),
                })
            }
        };
        Ok(Expr::Sym(sym))
    }

    fn digits(&mut self) -> Result<&str, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected digits"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    /// Decimal literal, converted exactly: `0.25` is 1/4.
    fn number(&mut self) -> Result<Rational, ExprError> {
        self.skip_ws();
        let whole: BigInt = self.digits()?.parse().unwrap();
        let mut value = Rational::from_integer(whole);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let frac = self.digits()?.to_string();
            let scale = BigInt::from(10).pow(frac.len() as u32);
            let frac: BigInt = frac.parse().unwrap();
            value += Rational::new(frac, scale);
        }
        Ok(value)
    }

    fn integer(&mut self) -> Result<BigInt, ExprError> {
        let negative = self.eat(b'-');
        self.skip_ws();
        let n: BigInt = self.digits()?.parse().unwrap();
        Ok(if negative { -n } else { n })
    }

    fn exponent(&mut self) -> Result<Rational, ExprError> {
        if self.eat(b'(') {
            let numer = self.integer()?;
            let q = if self.eat(b'/') {
                let denom = self.integer()?;
                if denom.is_zero() {
                    return Err(self.error("zero exponent denominator"));
                }
                Rational::new(numer, denom)
            } else {
                Rational::from_integer(numer)
            };
            self.expect(b')')?;
            Ok(q)
        } else {
            Ok(Rational::from_integer(self.integer()?))
        }
    }
}

fn push_flat_sum(terms: &mut Vec<Expr>, t: Expr) {
    match t {
        Expr::Sum(xs) => terms.extend(xs),
        other => terms.push(other),
    }
}

fn push_flat_product(factors: &mut Vec<Expr>, f: Expr) {
    match f {
        Expr::Product(xs) => factors.extend(xs),
        other => factors.push(other),
    }
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Constant(c) => Expr::Constant(-c),
        Expr::Product(mut fs) => {
            if let Some(Expr::Constant(c)) = fs.first_mut() {
                *c = -c.clone();
                Expr::Product(fs)
            } else {
                let mut v = Vec::with_capacity(fs.len() + 1);
                v.push(Expr::Constant(-Rational::one()));
                v.extend(fs);
                Expr::Product(v)
            }
        }
        other => Expr::Product(vec![Expr::Constant(-Rational::one()), other]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{print_expr, rat};

    fn u() -> Expr {
        Expr::Sym(Symbol::U)
    }
    fn v() -> Expr {
        Expr::Sym(Symbol::V)
    }

    #[test]
    fn product_of_symbols() {
        assert_eq!(parse_expr("u*ux").unwrap(), Expr::Product(vec![u(), v()]));
    }

    #[test]
    fn power_then_product() {
        assert_eq!(
            parse_expr("u^2*ux").unwrap(),
            Expr::Product(vec![u().powi(2), v()])
        );
    }

    #[test]
    fn incomplete_input_reports_offset() {
        assert_eq!(
            parse_expr("u +"),
            Err(ExprError::Syntax {
                offset: 3,
                message: "unexpected end of input".into()
            })
        );
    }

    #[test]
    fn unknown_identifier_is_named() {
        match parse_expr("u*x + 1") {
            Err(ExprError::UnknownIdentifier { offset, token }) => {
                assert_eq!(offset, 2);
                assert_eq!(token, "x");
            }
            other => panic!("{other:?}"),
        }
        // `v` is internal only; the surface name is `ux`.
        assert!(matches!(
            parse_expr("v"),
            Err(ExprError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        assert_eq!(
            parse_expr("-u^2").unwrap(),
            Expr::Product(vec![Expr::int(-1), u().powi(2)])
        );
    }

    #[test]
    fn rational_exponents() {
        assert_eq!(parse_expr("ux^(2/3)").unwrap(), v().pow(rat(2, 3)));
        assert_eq!(parse_expr("ux^(-2/3)").unwrap(), v().pow(rat(-2, 3)));
        assert_eq!(parse_expr("ux^-1").unwrap(), v().powi(-1));
    }

    #[test]
    fn literals_fold() {
        assert_eq!(parse_expr("2/3").unwrap(), Expr::Constant(rat(2, 3)));
        assert_eq!(parse_expr("-2/3").unwrap(), Expr::Constant(rat(-2, 3)));
        assert_eq!(parse_expr("0.25").unwrap(), Expr::Constant(rat(1, 4)));
        assert_eq!(
            parse_expr("u - 2*ux").unwrap(),
            Expr::Sum(vec![u(), Expr::Product(vec![Expr::int(-2), v()])])
        );
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(
            parse_expr(" u *  ux ").unwrap(),
            parse_expr("u*ux").unwrap()
        );
    }

    #[test]
    fn unbalanced_paren() {
        assert!(matches!(
            parse_expr("(u + ux"),
            Err(ExprError::Syntax { offset: 7, .. })
        ));
        assert!(matches!(
            parse_expr("u)"),
            Err(ExprError::Syntax { offset: 1, .. })
        ));
    }

    #[test]
    fn prints_back() {
        for text in ["u*ux", "u + ux", "(C*ux^2)^(1/3)", "3/2*w - u*ux^(-2)"] {
            let e = parse_expr(text).unwrap();
            assert_eq!(parse_expr(&print_expr(&e)).unwrap(), e, "{text}");
        }
    }
}
