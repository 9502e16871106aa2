use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ExprError;

/// The fixed symbol alphabet.
///
/// `U`, `V`, `W` are the jet coordinates `u`, `u_x`, `u_xx` of the first-order
/// system `u_x = v, v_x = w, w_x = u_t + Q(u, v)`; `Ut` and `Vt` are the
/// t-derivatives `u_t` and `v_t`. `A`..`D` are the coefficients of the affine
/// family `Q = A u + B u_x + C u u_x + D`.
///
/// The declaration order is the canonical symbol order used for printing and
/// monomial ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    U,
    V,
    W,
    Ut,
    Vt,
    A,
    B,
    C,
    D,
}

impl Symbol {
    pub const ALL: [Symbol; 9] = [
        Symbol::U,
        Symbol::V,
        Symbol::W,
        Symbol::Ut,
        Symbol::Vt,
        Symbol::A,
        Symbol::B,
        Symbol::C,
        Symbol::D,
    ];

    /// Jet coordinates in `JetPoint` order.
    pub const JET: [Symbol; 5] = [Symbol::U, Symbol::V, Symbol::W, Symbol::Ut, Symbol::Vt];

    pub const PARAMS: [Symbol; 4] = [Symbol::A, Symbol::B, Symbol::C, Symbol::D];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Surface name used by the parser and printer. `v` is spelled `ux`.
    pub fn name(self) -> &'static str {
        match self {
            Symbol::U => "u",
            Symbol::V => "ux",
            Symbol::W => "w",
            Symbol::Ut => "u_t",
            Symbol::Vt => "v_t",
            Symbol::A => "A",
            Symbol::B => "B",
            Symbol::C => "C",
            Symbol::D => "D",
        }
    }

    pub fn is_param(self) -> bool {
        matches!(self, Symbol::A | Symbol::B | Symbol::C | Symbol::D)
    }

    pub fn is_jet(self) -> bool {
        !self.is_param()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Symbol {
    type Err = ExprError;

    /// Accepts the surface names plus the internal name `v` for `u_x`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "u" => Symbol::U,
            "ux" | "v" => Symbol::V,
            "w" => Symbol::W,
            "u_t" | "ut" => Symbol::Ut,
            "v_t" | "vt" => Symbol::Vt,
            "A" => Symbol::A,
            "B" => Symbol::B,
            "C" => Symbol::C,
            "D" => Symbol::D,
            other => return Err(ExprError::UnknownSymbol(other.to_string())),
        })
    }
}
