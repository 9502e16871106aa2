//! Exterior algebra for constant-coefficient structure equations.
//!
//! A model declares an ordered list of 1-forms and, for some of them, a
//! structure equation `d(form) = sum c * a ^ b` with exact rational `c`.
//! Forms without an equation are undetermined: their differentials are
//! unknown and may only drop out of `d(d form)` by syntactic cancellation.

mod text;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::CoframeError;
use crate::expr::Rational;

pub use text::parse_model;

/// Canonical 2-form: `(i, j)` with `i < j` maps to a nonzero coefficient.
pub type TwoForm = BTreeMap<(usize, usize), Rational>;
/// Canonical 3-form: `(i, j, k)` with `i < j < k` maps to a nonzero coefficient.
pub type ThreeForm = BTreeMap<(usize, usize, usize), Rational>;

/// Sorts a 2-form index pair, returning the sign of the permutation, or
/// `None` when the wedge vanishes.
pub fn canonical2(i: usize, j: usize) -> Option<(i8, (usize, usize))> {
    match i.cmp(&j) {
        std::cmp::Ordering::Less => Some((1, (i, j))),
        std::cmp::Ordering::Greater => Some((-1, (j, i))),
        std::cmp::Ordering::Equal => None,
    }
}

/// Sorts a 3-form index triple, returning the sign of the permutation, or
/// `None` when an index repeats.
pub fn canonical3(i: usize, j: usize, k: usize) -> Option<(i8, (usize, usize, usize))> {
    if i == j || j == k || i == k {
        return None;
    }
    let mut v = [i, j, k];
    let mut sign = 1;
    for a in 0..3 {
        for b in 0..2 - a {
            if v[b] > v[b + 1] {
                v.swap(b, b + 1);
                sign = -sign;
            }
        }
    }
    Some((sign, (v[0], v[1], v[2])))
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, c: Rational) {
    let sum = map.remove(&key).unwrap_or_else(Rational::zero) + c;
    if !sum.is_zero() {
        map.insert(key, sum);
    }
}

fn add2(form: &mut TwoForm, c: Rational, i: usize, j: usize) {
    if let Some((sign, key)) = canonical2(i, j) {
        accumulate(form, key, if sign < 0 { -c } else { c });
    }
}

fn add3(form: &mut ThreeForm, c: Rational, i: usize, j: usize, k: usize) {
    if let Some((sign, key)) = canonical3(i, j, k) {
        accumulate(form, key, if sign < 0 { -c } else { c });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoframeModel {
    name: String,
    forms: Vec<String>,
    rules: BTreeMap<usize, TwoForm>,
}

impl CoframeModel {
    pub fn new(name: impl Into<String>) -> Self {
        CoframeModel {
            name: name.into(),
            forms: Vec::new(),
            rules: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn forms(&self) -> &[String] {
        &self.forms
    }

    /// Declares `form` if new and returns its index.
    pub fn declare(&mut self, form: &str) -> usize {
        match self.index(form) {
            Some(i) => i,
            None => {
                self.forms.push(form.to_string());
                self.forms.len() - 1
            }
        }
    }

    pub fn index(&self, form: &str) -> Option<usize> {
        self.forms.iter().position(|f| f == form)
    }

    fn require(&self, form: &str) -> Result<usize, CoframeError> {
        self.index(form)
            .ok_or_else(|| CoframeError::UnknownForm(form.to_string()))
    }

    /// Sets `d(form) = sum c * a ^ b`. Terms are sign-normalized and merged.
    pub fn set_rule(&mut self, form: &str, terms: &[(Rational, &str, &str)]) -> Result<(), CoframeError> {
        let f = self.require(form)?;
        if self.rules.contains_key(&f) {
            return Err(CoframeError::Conflicting(form.to_string()));
        }
        let mut rule = TwoForm::new();
        for (c, a, b) in terms {
            add2(&mut rule, c.clone(), self.require(a)?, self.require(b)?);
        }
        self.rules.insert(f, rule);
        Ok(())
    }

    pub fn rule(&self, form: &str) -> Option<&TwoForm> {
        self.index(form).and_then(|i| self.rules.get(&i))
    }

    pub fn is_ruled(&self, form: &str) -> bool {
        self.rule(form).is_some()
    }

    /// Forms without a structure equation, in declaration order.
    pub fn undetermined(&self) -> Vec<&str> {
        (0..self.forms.len())
            .filter(|i| !self.rules.contains_key(i))
            .map(|i| self.forms[i].as_str())
            .collect()
    }

    /// Forms with a structure equation, in declaration order.
    pub fn ruled(&self) -> Vec<&str> {
        self.rules.keys().map(|&i| self.forms[i].as_str()).collect()
    }

    /// `d(a ^ b) = da ^ b - a ^ db` for declared 1-forms `a`, `b`.
    pub fn d_wedge(&self, a: &str, b: &str) -> Result<Expansion, CoframeError> {
        let (i, j) = (self.require(a)?, self.require(b)?);
        let mut out = Expansion::default();
        self.expand_wedge(&mut out, Rational::one(), i, j);
        Ok(out)
    }

    /// Exterior derivative of a 2-form by bilinearity over its terms.
    pub fn d_two_form(&self, omega: &TwoForm) -> Expansion {
        let mut out = Expansion::default();
        for (&(i, j), c) in omega {
            self.expand_wedge(&mut out, c.clone(), i, j);
        }
        out
    }

    fn expand_wedge(&self, out: &mut Expansion, c: Rational, i: usize, j: usize) {
        // da_i ^ a_j
        self.push_d(out, c.clone(), i, j);
        // -a_i ^ da_j, and a 1-form commutes with a 2-form
        self.push_d(out, -c, j, i);
    }

    /// Adds `c * d(a_form) ^ a_other`.
    fn push_d(&self, out: &mut Expansion, c: Rational, form: usize, other: usize) {
        match self.rules.get(&form) {
            Some(rule) => {
                for (&(p, q), e) in rule {
                    add3(&mut out.determined, &c * e, p, q, other);
                }
            }
            None => accumulate(&mut out.unknown, (form, other), c),
        }
    }

    /// `d(d form)` as a canonical 3-form.
    pub fn d_squared(&self, form: &str) -> Result<ThreeFormResidual, CoframeError> {
        let f = self.require(form)?;
        let rule = self
            .rules
            .get(&f)
            .ok_or_else(|| CoframeError::NoRule(form.to_string()))?;
        let exp = self.d_two_form(rule);
        if !exp.unknown.is_empty() {
            let terms = exp
                .unknown
                .iter()
                .map(|(&(u, k), c)| format!("{} d({}) ^ {}", rational_text(c), self.forms[u], self.forms[k]))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(CoframeError::UndeterminedResidual {
                form: form.to_string(),
                terms,
            });
        }
        Ok(ThreeFormResidual {
            form: form.to_string(),
            terms: exp
                .determined
                .into_iter()
                .map(|((i, j, k), coeff)| ResidualTerm {
                    coeff,
                    forms: [i, j, k],
                })
                .collect(),
        })
    }

    /// Names of the forms in a residual term.
    pub fn term_names(&self, t: &ResidualTerm) -> [&str; 3] {
        t.forms.map(|i| self.forms[i].as_str())
    }
}

/// Result of expanding `d` of a 2-form: the determined 3-form plus the
/// surviving `c * d(u) ^ a_k` terms for undetermined `u`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expansion {
    pub determined: ThreeForm,
    pub unknown: BTreeMap<(usize, usize), Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualTerm {
    pub coeff: Rational,
    pub forms: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeFormResidual {
    pub form: String,
    pub terms: Vec<ResidualTerm>,
}

impl ThreeFormResidual {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the canonical term on `names`, if present.
    pub fn coefficient(&self, model: &CoframeModel, names: [&str; 3]) -> Option<Rational> {
        let idx = names.map(|n| model.index(n));
        let [Some(i), Some(j), Some(k)] = idx else {
            return None;
        };
        let (sign, key) = canonical3(i, j, k)?;
        self.terms
            .iter()
            .find(|t| (t.forms[0], t.forms[1], t.forms[2]) == key)
            .map(|t| if sign < 0 { -t.coeff.clone() } else { t.coeff.clone() })
    }

    pub fn display<'a>(&'a self, model: &'a CoframeModel) -> impl fmt::Display + 'a {
        ResidualDisplay { r: self, model }
    }
}

struct ResidualDisplay<'a> {
    r: &'a ThreeFormResidual,
    model: &'a CoframeModel,
}

impl fmt::Display for ResidualDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.r.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, t) in self.r.terms.iter().enumerate() {
            let [a, b, c] = self.model.term_names(t);
            let mag = rational_text(&t.coeff.abs());
            let sign = if t.coeff.is_negative() { "-" } else { "+" };
            if n == 0 {
                if t.coeff.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{mag} {a} ^ {b} ^ {c}")?;
        }
        Ok(())
    }
}

pub(crate) fn rational_text(c: &Rational) -> String {
    crate::expr::printer::rational_text(c)
}

/// Per-form outcome of checking every structure equation of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelReport {
    pub model: String,
    pub results: Vec<Result<ThreeFormResidual, CoframeError>>,
}

impl ModelReport {
    /// Forms whose residual could be computed.
    pub fn residuals(&self) -> impl Iterator<Item = &ThreeFormResidual> {
        self.results.iter().filter_map(|r| r.as_ref().ok())
    }

    /// Forms whose residual involves unknown differentials.
    pub fn undetermined(&self) -> impl Iterator<Item = &CoframeError> {
        self.results.iter().filter_map(|r| r.as_ref().err())
    }

    pub fn residual(&self, form: &str) -> Option<&ThreeFormResidual> {
        self.residuals().find(|r| r.form == form)
    }

    /// Every computable residual vanishes and at least one was computed.
    pub fn consistent(&self) -> bool {
        let mut any = false;
        for r in self.residuals() {
            if !r.is_empty() {
                return false;
            }
            any = true;
        }
        any
    }
}

/// `d(d form)` for every ruled form, in declaration order. Failures are
/// recorded per form without stopping the others.
pub fn check_model(model: &CoframeModel) -> ModelReport {
    ModelReport {
        model: model.name().to_string(),
        results: model.ruled().into_iter().map(|f| model.d_squared(f)).collect(),
    }
}

/// Names of the built-in models.
pub const BUILTIN_MODELS: &[&str] = &[
    "so3",
    "abelian",
    "s1-structure",
    "s1-prolonged",
    "s1-prolonged-altsign",
];

pub fn builtin_model(name: &str) -> Result<CoframeModel, CoframeError> {
    let text = match name {
        "so3" => include_str!("../../data/models/so3.cf"),
        "abelian" => include_str!("../../data/models/abelian.cf"),
        "s1-structure" => include_str!("../../data/models/s1-structure.cf"),
        "s1-prolonged" => include_str!("../../data/models/s1-prolonged.cf"),
        "s1-prolonged-altsign" => include_str!("../../data/models/s1-prolonged-altsign.cf"),
        _ => return Err(CoframeError::UnknownModel(name.to_string())),
    };
    parse_model(name, text)
}

/// The eight forms of the unprolonged coframe.
pub const BASE_FORMS: &[&str] = &[
    "theta1", "theta2", "theta3", "xi1", "xi2", "sigma1_1", "sigma1_2", "sigma1_3",
];

/// Outcome of comparing the two printed signs of `sigma1_3 ^ (eta4 - 3 eta5)`
/// in `d sigma1_3`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignDiscrepancy {
    /// The model whose eight base forms all have `d^2 = 0`, if exactly one does.
    pub consistent_model: Option<&'static str>,
    pub minus_sign_clean: bool,
    pub plus_sign_clean: bool,
    /// `d^2 theta3` under the `+` sign.
    pub plus_sign_theta3: String,
    pub note: String,
}

fn base_clean(report: &ModelReport) -> bool {
    BASE_FORMS
        .iter()
        .all(|f| report.residual(f).is_some_and(ThreeFormResidual::is_empty))
}

/// Decides by computation which sign in `d sigma1_3` is integrable. The
/// prolonged system prints `-sigma1_3 ^ (eta4 - 3 eta5)`, the unprolonged
/// structure equations print `+`.
pub fn sign_discrepancy() -> Result<SignDiscrepancy, CoframeError> {
    let minus = builtin_model("s1-prolonged")?;
    let plus = builtin_model("s1-prolonged-altsign")?;
    let (rm, rp) = (check_model(&minus), check_model(&plus));
    let (minus_sign_clean, plus_sign_clean) = (base_clean(&rm), base_clean(&rp));
    let plus_sign_theta3 = plus.d_squared("theta3")?.display(&plus).to_string();
    let consistent_model = match (minus_sign_clean, plus_sign_clean) {
        (true, false) => Some("s1-prolonged"),
        (false, true) => Some("s1-prolonged-altsign"),
        _ => None,
    };
    let verdict = match consistent_model {
        Some("s1-prolonged") => "the '-' sign (prolonged system) is consistent",
        Some(_) => "the '+' sign (unprolonged structure equations) is consistent",
        None => "neither sign is singled out",
    };
    let note = format!(
        "d sigma1_3 is printed with -sigma1_3 ^ (eta4 - 3 eta5) in the prolonged system \
         and with + in the unprolonged structure equations; {verdict}; \
         under '+', d^2 theta3 = {plus_sign_theta3}"
    );
    Ok(SignDiscrepancy {
        consistent_model,
        minus_sign_clean,
        plus_sign_clean,
        plus_sign_theta3,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::int;

    fn broken() -> CoframeModel {
        parse_model(
            "broken",
            "d w1 = w2 ^ w3\nd w2 = w1 ^ w2\nd w3 = 0\n",
        )
        .unwrap()
    }

    #[test]
    fn canonicalization_signs() {
        assert_eq!(canonical2(2, 1), Some((-1, (1, 2))));
        assert_eq!(canonical2(1, 1), None);
        assert_eq!(canonical3(2, 0, 1), Some((1, (0, 1, 2))));
        assert_eq!(canonical3(1, 0, 2), Some((-1, (0, 1, 2))));
        assert_eq!(canonical3(1, 1, 2), None);
    }

    #[test]
    fn so3_closes() {
        let m = builtin_model("so3").unwrap();
        let r = check_model(&m);
        assert_eq!(r.results.len(), 3);
        assert!(r.consistent());
        assert!(r.residuals().all(ThreeFormResidual::is_empty));
    }

    #[test]
    fn broken_model_residual() {
        let m = broken();
        let r = m.d_squared("w1").unwrap();
        assert_eq!(
            r.terms,
            vec![ResidualTerm {
                coeff: int(1),
                forms: [0, 1, 2]
            }]
        );
        assert_eq!(r.display(&m).to_string(), "1 w1 ^ w2 ^ w3");
    }

    #[test]
    fn prolonged_base_forms_close() {
        let m = builtin_model("s1-prolonged").unwrap();
        let r = check_model(&m);
        for f in BASE_FORMS {
            assert!(r.residual(f).unwrap().is_empty(), "{f}");
        }
        assert!(r.consistent());
    }

    #[test]
    fn eta_equations_need_beta_differentials() {
        let m = builtin_model("s1-prolonged").unwrap();
        assert!(matches!(
            m.d_squared("eta1"),
            Err(CoframeError::UndeterminedResidual { .. })
        ));
        assert!(m.d_squared("eta4").unwrap().is_empty());
    }

    #[test]
    fn altsign_leaves_theta3_residual() {
        let m = builtin_model("s1-prolonged-altsign").unwrap();
        let r = m.d_squared("theta3").unwrap();
        assert_eq!(r.coefficient(&m, ["xi1", "sigma1_3", "eta4"]), Some(int(-2)));
        assert!(!check_model(&m).consistent());
    }

    #[test]
    fn sign_discrepancy_prefers_minus() {
        let s = sign_discrepancy().unwrap();
        assert_eq!(s.consistent_model, Some("s1-prolonged"));
        assert!(s.minus_sign_clean && !s.plus_sign_clean);
        assert!(s.note.contains("sigma1_3"));
    }

    #[test]
    fn undetermined_forms() {
        let m = builtin_model("s1-prolonged").unwrap();
        assert_eq!(m.undetermined(), ["beta1", "beta2", "beta3"]);
        let m = builtin_model("s1-structure").unwrap();
        assert_eq!(m.undetermined().len(), 5);
    }

    #[test]
    fn errors() {
        let m = builtin_model("so3").unwrap();
        assert_eq!(m.d_squared("w9"), Err(CoframeError::UnknownForm("w9".into())));
        let m = builtin_model("s1-prolonged").unwrap();
        assert_eq!(m.d_squared("beta1"), Err(CoframeError::NoRule("beta1".into())));
        assert_eq!(
            builtin_model("nope"),
            Err(CoframeError::UnknownModel("nope".into()))
        );
    }

    #[test]
    fn abelian_closes() {
        assert!(check_model(&builtin_model("abelian").unwrap()).consistent());
    }
}
