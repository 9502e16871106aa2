//! Differentiation, canonical simplification and zero testing.

mod diff;
mod normal;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::ExprError;
use crate::expr::{eval_expr, print_expr, Bindings, CompiledExpr, Expr, Symbol};

pub use diff::diff;
pub use normal::simplify;

/// Number of numeric probes run alongside every symbolic zero test.
pub const ZERO_PROBES: usize = 8;
/// Relative magnitude below which a probe counts as zero.
pub const PROBE_TOL: f64 = 1e-9;
const PROBE_SEED: u64 = 0x6b64_7665_7130;

/// `diff` followed by `simplify`.
pub fn partial(e: &Expr, s: Symbol) -> Expr {
    simplify(&diff(e, s))
}

/// Disagreement between the normal form and the numeric probes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroDiagnostic {
    pub expr: String,
    pub normal_form_zero: bool,
    /// Largest relative probe magnitude observed.
    pub max_probe: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTest {
    pub zero: bool,
    pub diagnostic: Option<ZeroDiagnostic>,
}

/// Decides whether `e` is identically zero by its normal form and
/// cross-checks the verdict at [`ZERO_PROBES`] deterministic points with every
/// symbol drawn from [0.5, 2].
pub fn zero_test(e: &Expr) -> ZeroTest {
    let normal = simplify(e);
    let zero = normal.is_constant_zero();
    let compiled = CompiledExpr::new(e);
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut max_probe: f64 = 0.0;
    let mut usable = 0;
    for _ in 0..ZERO_PROBES {
        let mut x = [0.0; 9];
        for slot in x.iter_mut() {
            *slot = rng.random_range(0.5..=2.0);
        }
        let (Ok(val), Ok(mag)) = (compiled.eval(&x), abs_eval(e, &x)) else {
            continue;
        };
        usable += 1;
        let rel = if mag > 0.0 { val.abs() / mag } else { val.abs() };
        max_probe = max_probe.max(rel);
    }
    let disagree = usable > 0 && (zero == (max_probe > PROBE_TOL));
    let diagnostic = disagree.then(|| {
        let d = ZeroDiagnostic {
            expr: print_expr(e),
            normal_form_zero: zero,
            max_probe,
        };
        log::warn!(
            "zero test disagreement on `{}`: normal form zero = {}, max probe = {:e}",
            d.expr,
            d.normal_form_zero,
            d.max_probe
        );
        d
    });
    ZeroTest { zero, diagnostic }
}

pub fn is_zero(e: &Expr) -> bool {
    zero_test(e).zero
}

/// Central difference `(e(b + h e_s) - e(b - h e_s)) / 2h`.
pub fn numeric_partial(e: &Expr, s: Symbol, b: &Bindings, h: f64) -> Result<f64, ExprError> {
    let plus = eval_expr(e, &b.shifted(s, h)?)?;
    let minus = eval_expr(e, &b.shifted(s, -h)?)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Magnitude bound: `e` evaluated with every sum replaced by the sum of the
/// absolute values of its terms.
fn abs_eval(e: &Expr, x: &[f64; 9]) -> Result<f64, ExprError> {
    Ok(match e {
        Expr::Constant(_) | Expr::Sym(_) | Expr::Power(..) => {
            CompiledExpr::new(e).eval(x)?.abs()
        }
        Expr::Sum(xs) => {
            let mut acc = 0.0;
            for t in xs {
                acc += abs_eval(t, x)?;
            }
            acc
        }
        Expr::Product(xs) => {
            let mut acc = 1.0;
            for t in xs {
                acc *= abs_eval(t, x)?;
            }
            acc
        }
    })
}
