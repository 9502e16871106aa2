//! Contact classification of KdV-type equations `u_xxx = u_t + Q(u, u_x)`.
//!
//! The crate sorts an equation into one of four contact-invariant subclasses
//! by the vanishing pattern of `Q_uu`, `Q_uv`, `Q_vv`, produces the symbolic
//! differential invariants of that subclass, and tests two equations for
//! contact equivalence by comparing the images of their invariant maps. A
//! small exterior-algebra engine checks `d(d w) = 0` for constant-coefficient
//! structure equations.

pub mod calculus;
pub mod classify;
pub mod coframe;
pub mod corpus;
pub mod equivalence;
pub mod error;
pub mod expr;
pub mod invariants;

pub use error::{CoframeError, Error, ExprError, Result};
