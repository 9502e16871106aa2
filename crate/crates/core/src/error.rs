use thiserror::Error;

use crate::classify::Subclass;
use crate::expr::Symbol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{token}` at offset {offset}")]
    UnknownIdentifier { offset: usize, token: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{0}` is unbound")]
    Unbound(Symbol),
    #[error("even root of negative base {base} (exponent {exponent})")]
    EvenRootOfNegative { base: f64, exponent: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("singular point: denominator `{denominator}` evaluates to {value:e}")]
    Singular { denominator: String, value: f64 },
    #[error("cannot differentiate power with non-constant exponent")]
    NonConstantExponent,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("Q must not contain `{0}`; it is a function of u and ux only")]
    ForbiddenSymbol(Symbol),
    #[error("parameter `{0}` occurs in Q but is not bound")]
    UnboundParameter(Symbol),
    #[error("equation lies outside the four subclasses")]
    OutsideSubclass,
    #[error("expected an S2 equation, got {0}")]
    NotS2(Subclass),
    #[error("only {accepted} of {requested} samples survived singular-point rejection")]
    InsufficientSamples { accepted: usize, requested: usize },
    #[error("invariant arity mismatch: points have {points}, target has {target}")]
    ArityMismatch { points: usize, target: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Coframe(#[from] CoframeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoframeError {
    #[error("unknown form `{0}`")]
    UnknownForm(String),
    #[error("form `{0}` has no structure equation")]
    NoRule(String),
    #[error("form `{0}` is both ruled and undetermined")]
    Conflicting(String),
    #[error("unknown differentials survive in d^2 {form}: {terms}")]
    UndeterminedResidual { form: String, terms: String },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model text line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
