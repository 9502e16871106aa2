//! Basic differential invariants of the subclasses S2, S3 and S4.
//!
//! S2 carries three invariants `I1..I3` built from the affine coefficients,
//! S3 carries `L1..L11` and S4 carries `M1..M9`, both built from partials of
//! Q up to third order. S1 has none: all of its members are equivalent to
//! `u_xxx = u_t`.
//!
//! The formulas are transcribed as published, including spots that look
//! typographically doubtful. Alternative readings of those spots are listed
//! in [`ALTERNATE_READINGS`] and can be switched on per call.

use serde::Serialize;

use crate::calculus::{partial, simplify};
use crate::classify::{classify, extract_affine, EquationSpec, Subclass};
use crate::error::{Error, ExprError, Result};
use crate::expr::{rat, CompiledExpr, Expr, Symbol};

/// Denominators smaller than this in magnitude make a jet point singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-6;

/// A point `(u, v, w, u_t, v_t)` of the first-order jet space of
/// `u_x = v, v_x = w, w_x = u_t + Q(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JetPoint {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub u_t: f64,
    pub v_t: f64,
}

impl JetPoint {
    pub fn new(u: f64, v: f64, w: f64, u_t: f64, v_t: f64) -> Self {
        JetPoint { u, v, w, u_t, v_t }
    }

    pub fn from_array(x: [f64; 5]) -> Self {
        JetPoint::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.u, self.v, self.w, self.u_t, self.v_t]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invariant {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSet {
    pub subclass: Subclass,
    pub items: Vec<Invariant>,
}

impl InvariantSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.items.iter().find(|i| i.name == name).map(|i| &i.value)
    }
}

/// An alternative reading of a doubtful spot in the published formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AlternateReading {
    pub name: &'static str,
    pub printed: &'static str,
    pub alternate: &'static str,
}

pub const ALTERNATE_READINGS: &[AlternateReading] = &[
    AlternateReading {
        name: "L2",
        printed: "Q_vvv*Q_uv^2/Q_vv^4",
        alternate: "Q_vvv*Q_uv^2/(Q_v^2)^4",
    },
    AlternateReading {
        name: "L4",
        printed: "Q_vv*(u*Q_v*Q_uuv + u_t*Q_uuv + w*Q_v*Q_uvv + v_t*Q_uvv)/Q_uv^4",
        alternate: "Q_vv*(w*Q_v*Q_uuv + u_t*Q_uuv + w*Q_v*Q_uvv + v_t*Q_uvv)/Q_uv^4",
    },
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InvariantOptions {
    pub alternate_readings: bool,
}

/// Partial derivatives of Q up to third order.
#[derive(Debug, Clone, PartialEq)]
pub struct QPartials<T> {
    pub q_u: T,
    pub q_v: T,
    pub q_uu: T,
    pub q_uv: T,
    pub q_vv: T,
    pub q_uuu: T,
    pub q_uuv: T,
    pub q_uvv: T,
    pub q_vvv: T,
}

impl QPartials<Expr> {
    pub fn symbolic(q: &Expr) -> Self {
        let q_u = partial(q, Symbol::U);
        let q_v = partial(q, Symbol::V);
        let q_uu = partial(&q_u, Symbol::U);
        let q_uv = partial(&q_u, Symbol::V);
        let q_vv = partial(&q_v, Symbol::V);
        QPartials {
            q_uuu: partial(&q_uu, Symbol::U),
            q_uuv: partial(&q_uu, Symbol::V),
            q_uvv: partial(&q_uv, Symbol::V),
            q_vvv: partial(&q_vv, Symbol::V),
            q_u,
            q_v,
            q_uu,
            q_uv,
            q_vv,
        }
    }
}

fn s(sym: Symbol) -> Expr {
    Expr::Sym(sym)
}

/// `I1..I3` for `Q = A u + B u_x + C u u_x + D`.
pub fn s2_formulas(a: &Expr, b: &Expr, c: &Expr) -> Vec<(&'static str, Expr)> {
    let (u, v, w, vt) = (s(Symbol::U), s(Symbol::V), s(Symbol::W), s(Symbol::Vt));
    let cv2 = c.clone() * v.clone().powi(2);
    vec![
        ("I1", w.clone() / cv2.clone().pow(rat(1, 3))),
        (
            "I2",
            -(b.clone() * w + c.clone() * u * v.clone() + vt) / cv2,
        ),
        ("I3", a.clone() / (c.clone() * v)),
    ]
}

/// `L1..L11` in terms of the partials of Q.
pub fn s3_formulas(p: &QPartials<Expr>, opts: InvariantOptions) -> Vec<(&'static str, Expr)> {
    let (u, v, w, ut, vt) = (
        s(Symbol::U),
        s(Symbol::V),
        s(Symbol::W),
        s(Symbol::Ut),
        s(Symbol::Vt),
    );
    let QPartials {
        q_u,
        q_v,
        q_uu,
        q_uv,
        q_vv,
        q_uuv,
        q_uvv,
        q_vvv,
        ..
    } = p.clone();
    let l2_denominator = if opts.alternate_readings {
        q_v.clone().powi(2).powi(4)
    } else {
        q_vv.clone().powi(4)
    };
    let l4_lead = if opts.alternate_readings {
        w.clone()
    } else {
        u.clone()
    };
    vec![
        ("L1", q_uvv.clone() * q_uv.clone() / q_vv.clone().powi(3)),
        ("L2", q_vvv.clone() * q_uv.clone().powi(2) / l2_denominator),
        ("L3", q_u * q_v.clone().powi(2) / q_uv.clone().powi(3)),
        (
            "L4",
            q_vv.clone()
                * Expr::Sum(vec![
                    l4_lead * q_v.clone() * q_uuv.clone(),
                    ut.clone() * q_uuv.clone(),
                    w.clone() * q_v.clone() * q_uvv.clone(),
                    vt.clone() * q_uvv.clone(),
                ])
                / q_uv.clone().powi(4),
        ),
        (
            "L5",
            q_vv.clone().powi(2)
                * Expr::Sum(vec![
                    v.clone() * q_v.clone() * q_uvv.clone(),
                    ut * q_uvv.clone(),
                    w.clone() * q_v * q_vvv.clone(),
                    vt * q_vvv.clone(),
                ])
                / q_uv.clone().powi(3),
        ),
        (
            "L6",
            q_vv.clone() * (u * q_uuv.clone() + v.clone() * q_uvv.clone())
                / q_uv.clone().powi(2),
        ),
        (
            "L7",
            (w.clone() * q_vvv + v.clone() * q_uvv) / q_uv.clone(),
        ),
        ("L8", q_uuv / q_vv.clone().powi(2)),
        (
            "L9",
            q_vv.clone().powi(3) * (w.clone() * q_vv.clone() + v.clone() * q_uv.clone())
                / q_uv.clone().powi(3),
        ),
        (
            "L10",
            q_vv.clone().powi(4) * (w * q_uv.clone() + v * q_uu.clone()) / q_uv.clone().powi(4),
        ),
        ("L11", q_vv * q_uu / q_uv.powi(2)),
    ]
}

/// `M1..M9` in terms of the partials of Q.
pub fn s4_formulas(p: &QPartials<Expr>) -> Vec<(&'static str, Expr)> {
    let (v, w, ut, vt) = (s(Symbol::V), s(Symbol::W), s(Symbol::Ut), s(Symbol::Vt));
    let QPartials {
        q_u,
        q_v,
        q_uu,
        q_uv,
        q_uuu,
        q_uuv,
        ..
    } = p.clone();
    vec![
        (
            "M1",
            q_uuv.clone() * q_uu.clone().powi(2) / q_uv.clone().powi(4),
        ),
        (
            "M2",
            q_uuv.clone() * q_uv.clone().powi(2) * (v.clone() * q_v.clone() + ut.clone())
                / q_uu.clone().powi(3),
        ),
        (
            "M3",
            q_uv.clone().powi(3)
                * Expr::Sum(vec![
                    vt * q_uuv.clone(),
                    v.clone() * q_v.clone() * q_uuu.clone(),
                    w.clone() * q_v * q_uuv.clone(),
                    ut * q_uuu.clone(),
                ])
                / q_uu.clone().powi(4),
        ),
        ("M4", q_u * q_uv.clone().powi(3) / q_uu.clone().powi(3)),
        (
            "M5",
            q_uv.clone() * (v.clone() * q_uuu.clone() + w.clone() * q_uuv.clone())
                / q_uu.clone().powi(2),
        ),
        ("M6", v.clone() * q_uuv / q_uu.clone()),
        ("M7", q_uu.clone() * q_uuu / q_uv.clone().powi(3)),
        ("M8", v * q_uv.clone().powi(4) / q_uu.clone().powi(3)),
        ("M9", w * q_uv.powi(5) / q_uu.powi(4)),
    ]
}

pub fn invariants_for(eq: &EquationSpec) -> Result<InvariantSet> {
    invariants_with(eq, InvariantOptions::default())
}

pub fn invariants_with(eq: &EquationSpec, opts: InvariantOptions) -> Result<InvariantSet> {
    let subclass = classify(eq)?;
    let raw = match subclass {
        Subclass::Outside => return Err(Error::OutsideSubclass),
        Subclass::S1 => vec![],
        Subclass::S2 => {
            let c = extract_affine(eq)?;
            s2_formulas(&c.a, &c.b, &c.c)
        }
        Subclass::S3 => s3_formulas(&QPartials::symbolic(&eq.resolved_q()?), opts),
        Subclass::S4 => s4_formulas(&QPartials::symbolic(&eq.resolved_q()?)),
    };
    Ok(InvariantSet {
        subclass,
        items: raw
            .into_iter()
            .map(|(name, value)| Invariant {
                name: name.to_string(),
                value: simplify(&value),
            })
            .collect(),
    })
}

/// Compiled invariant map and its Jacobian with respect to the jet
/// coordinates, for repeated numeric evaluation.
#[derive(Debug, Clone)]
pub struct InvariantMap {
    names: Vec<String>,
    values: Vec<CompiledExpr>,
    jacobian: Vec<[CompiledExpr; 5]>,
    params: [f64; 9],
}

impl InvariantMap {
    /// `params` supplies the values of any parameter symbols left in the items.
    pub fn new(inv: &InvariantSet, params: &crate::expr::Bindings) -> Result<Self> {
        let used: std::collections::BTreeSet<Symbol> =
            inv.items.iter().flat_map(|i| i.value.free_symbols()).collect();
        if let Some(sym) = used.into_iter().find(|s| s.is_param() && params.get(*s).is_none()) {
            return Err(Error::UnboundParameter(sym));
        }
        let mut fixed = params.to_array();
        for sym in Symbol::JET {
            fixed[sym.index()] = f64::NAN;
        }
        Ok(InvariantMap {
            names: inv.items.iter().map(|i| i.name.clone()).collect(),
            values: inv.items.iter().map(|i| CompiledExpr::new(&i.value)).collect(),
            jacobian: inv
                .items
                .iter()
                .map(|i| Symbol::JET.map(|s| CompiledExpr::new(&partial(&i.value, s))))
                .collect(),
            params: fixed,
        })
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn point(&self, p: &JetPoint) -> [f64; 9] {
        let mut x = self.params;
        for (sym, val) in Symbol::JET.iter().zip(p.to_array()) {
            x[sym.index()] = val;
        }
        x
    }

    pub fn eval(&self, p: &JetPoint) -> Result<Vec<f64>, ExprError> {
        let x = self.point(p);
        self.values
            .iter()
            .map(|c| c.eval_checked(&x, SINGULAR_THRESHOLD))
            .collect()
    }

    /// Row-major `arity x 5` Jacobian.
    pub fn jacobian(&self, p: &JetPoint) -> Result<Vec<[f64; 5]>, ExprError> {
        let x = self.point(p);
        self.jacobian
            .iter()
            .map(|row| {
                let mut out = [0.0; 5];
                for (slot, c) in out.iter_mut().zip(row) {
                    *slot = c.eval_checked(&x, SINGULAR_THRESHOLD)?;
                }
                Ok(out)
            })
            .collect()
    }
}

/// Invariant values at `p`, in the set's name order.
pub fn eval_invariants(inv: &InvariantSet, params: &crate::expr::Bindings, p: &JetPoint) -> Result<Vec<f64>> {
    Ok(InvariantMap::new(inv, params)?.eval(p)?)
}
