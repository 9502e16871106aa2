use std::collections::BTreeMap;

use kdveq::coframe::{builtin_model, canonical2, canonical3, check_model, CoframeModel, ThreeForm, BUILTIN_MODELS};
use kdveq::expr::Rational;
use num_traits::Zero;
use proptest::prelude::*;

/// Sign of the permutation sorting `xs`, by counting inversions.
fn parity(xs: &[usize]) -> i64 {
    let mut inv = 0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[i] > xs[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn push(out: &mut ThreeForm, c: Rational, mut idx: [usize; 3]) {
    if idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2] {
        return;
    }
    let s = parity(&idx);
    idx.sort();
    let e = out.entry((idx[0], idx[1], idx[2])).or_insert_with(Rational::zero);
    *e += c * Rational::from_integer(s.into());
    if e.is_zero() {
        out.remove(&(idx[0], idx[1], idx[2]));
    }
}

/// `d(a ^ b) = da ^ b - a ^ db` written out term by term.
fn leibniz(m: &CoframeModel, a: usize, b: usize) -> ThreeForm {
    let mut out = ThreeForm::new();
    let name = |i: usize| m.forms()[i].clone();
    for (&(p, q), c) in m.rule(&name(a)).unwrap() {
        push(&mut out, c.clone(), [p, q, b]);
    }
    for (&(p, q), c) in m.rule(&name(b)).unwrap() {
        push(&mut out, -c.clone(), [a, p, q]);
    }
    out
}

fn models() -> Vec<CoframeModel> {
    BUILTIN_MODELS.iter().map(|n| builtin_model(n).unwrap()).collect()
}

proptest! {
    #[test]
    fn two_form_canonicalizer_is_an_involution(i in 0usize..12, j in 0usize..12) {
        match (canonical2(i, j), canonical2(j, i)) {
            (None, None) => prop_assert_eq!(i, j),
            (Some((s, k)), Some((t, l))) => {
                prop_assert_eq!(k, l);
                prop_assert_eq!(s, -t);
                let (s2, k2) = canonical2(k.0, k.1).unwrap();
                prop_assert_eq!((s2, k2), (1, k));
            }
            _ => prop_assert!(false),
        }
    }

    #[test]
    fn three_form_sign_is_permutation_parity(i in 0usize..8, j in 0usize..8, k in 0usize..8) {
        match canonical3(i, j, k) {
            None => prop_assert!(i == j || j == k || i == k),
            Some((s, key)) => {
                prop_assert_eq!(i64::from(s), parity(&[i, j, k]));
                prop_assert!(key.0 < key.1 && key.1 < key.2);
            }
        }
    }
}

#[test]
fn leibniz_agrees_with_engine() {
    for m in models() {
        let ruled: Vec<usize> = m.ruled().iter().map(|f| m.index(f).unwrap()).collect();
        for &a in &ruled {
            for &b in &ruled {
                let (fa, fb) = (&m.forms()[a], &m.forms()[b]);
                let direct = m.d_wedge(fa, fb).unwrap();
                assert!(direct.unknown.is_empty());
                assert_eq!(direct.determined, leibniz(&m, a, b), "{}: d({fa} ^ {fb})", m.name());
                let mut omega = BTreeMap::new();
                if let Some((s, key)) = canonical2(a, b) {
                    omega.insert(key, Rational::from_integer(s.into()));
                }
                let via_terms = m.d_two_form(&omega);
                assert_eq!(via_terms.determined, direct.determined, "{}: d({fa} ^ {fb})", m.name());
            }
        }
    }
}

#[test]
fn d_two_form_is_linear() {
    for m in models() {
        for f in m.ruled() {
            let rule = m.rule(f).unwrap().clone();
            let doubled: BTreeMap<_, _> = rule.iter().map(|(k, c)| (*k, c * Rational::from_integer(2.into()))).collect();
            let once = m.d_two_form(&rule);
            let twice = m.d_two_form(&doubled);
            for (k, c) in &once.determined {
                assert_eq!(twice.determined[k], c * Rational::from_integer(2.into()));
            }
            assert_eq!(once.determined.len(), twice.determined.len());
        }
    }
}

#[test]
fn reference_models_are_closed() {
    for name in ["so3", "abelian"] {
        let report = check_model(&builtin_model(name).unwrap());
        assert!(report.consistent(), "{name}");
        assert!(report.residuals().all(|r| r.is_empty()));
        assert_eq!(report.undetermined().count(), 0);
    }
}

#[test]
fn abelian_rules_are_zero() {
    let m = builtin_model("abelian").unwrap();
    for f in m.ruled() {
        assert!(m.rule(f).unwrap().is_empty(), "{f}");
    }
}
