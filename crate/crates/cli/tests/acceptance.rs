//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kdveq::calculus::{is_zero, numeric_partial, partial, simplify};
use kdveq::classify::{classify, EquationSpec, Subclass};
use kdveq::coframe::{builtin_model, check_model};
use kdveq::corpus::corpus_entry;
use kdveq::equivalence::{decide_equivalence, Reason, SampleConfig, Verdict};
use kdveq::expr::{parse_expr, Bindings, Symbol};
use kdveq::invariants::{eval_invariants, invariants_for, JetPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_eq(id: &str) -> EquationSpec {
    corpus_entry(id).unwrap().equation().unwrap()
}

fn classification_table() -> Check {
    for (id, want) in [
        ("kdv", Subclass::S2),
        ("mkdv", Subclass::S4),
        ("gkdv-cubic", Subclass::S4),
        ("linear", Subclass::S1),
        ("affine", Subclass::S1),
        ("kdv-forced", Subclass::S2),
        ("s3-example", Subclass::S3),
        ("outside-example", Subclass::Outside),
    ] {
        let got = classify(&corpus_eq(id)).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{id}: {got} != {want}"))?;
    }
    Ok(())
}

fn kdv_invariants() -> Check {
    let eq = corpus_eq("kdv");
    let inv = invariants_for(&eq).map_err(|e| e.to_string())?;
    for (name, want) in [
        ("I1", "w*ux^(-2/3)"),
        ("I2", "-(u*ux + v_t)*ux^(-2)"),
        ("I3", "0"),
    ] {
        let got = inv.get(name).ok_or(format!("{name} missing"))?;
        let diff = simplify(&(got.clone() - parse_expr(want).unwrap()));
        ensure(is_zero(&diff), || format!("{name} differs from {want}"))?;
    }
    let vals = eval_invariants(&inv, &eq.param_bindings(), &JetPoint::new(1.0, 1.0, 1.0, 0.0, 0.0))
        .map_err(|e| e.to_string())?;
    let want = [1.0, -1.0, 0.0];
    ensure(vals.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-12), || {
        format!("values {vals:?}")
    })
}

/// Recomputes every invariant from the symbolic formula with Q-partials
/// replaced by central differences of the exact lower-order partials.
fn finite_difference_oracle() -> Check {
    use Symbol::{U, V};
    for id in ["mkdv", "s3-example"] {
        let eq = corpus_eq(id);
        let inv = invariants_for(&eq).map_err(|e| e.to_string())?;
        let q = eq.bound_q();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let x: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.5..2.0));
            let p = JetPoint::from_array(x);
            let b: Bindings = [Symbol::U, Symbol::V, Symbol::W, Symbol::Ut, Symbol::Vt]
                .into_iter()
                .zip(x)
                .collect();
            let n = |e: &kdveq::expr::Expr, s| numeric_partial(e, s, &b, 1e-4).unwrap();
            let (qu, qv) = (partial(&q, U), partial(&q, V));
            let (quu, quv, qvv) = (partial(&qu, U), partial(&qu, V), partial(&qv, V));
            let d = [
                n(&q, U),
                n(&q, V),
                n(&qu, U),
                n(&qu, V),
                n(&qv, V),
                n(&quu, U),
                n(&quu, V),
                n(&quv, V),
                n(&qvv, V),
            ];
            let want = oracle(id, &d, &p);
            let got = eval_invariants(&inv, &eq.param_bindings(), &p).map_err(|e| e.to_string())?;
            for (k, (g, w)) in got.iter().zip(&want).enumerate() {
                ensure((g - w).abs() <= 1e-5 * g.abs().max(w.abs()).max(1e-12), || {
                    format!("{id} {} at {x:?}: {g} vs {w}", inv.items[k].name)
                })?;
            }
        }
    }
    Ok(())
}

fn oracle(id: &str, d: &[f64; 9], x: &JetPoint) -> Vec<f64> {
    let [q_u, q_v, q_uu, q_uv, q_vv, q_uuu, q_uuv, q_uvv, q_vvv] = *d;
    let (u, v, w, ut, vt) = (x.u, x.v, x.w, x.u_t, x.v_t);
    if id == "mkdv" {
        return vec![
            q_uuv * q_uu.powi(2) / q_uv.powi(4),
            q_uuv * q_uv.powi(2) * (v * q_v + ut) / q_uu.powi(3),
            q_uv.powi(3) * (vt * q_uuv + v * q_v * q_uuu + w * q_v * q_uuv + ut * q_uuu) / q_uu.powi(4),
            q_u * q_uv.powi(3) / q_uu.powi(3),
            q_uv * (v * q_uuu + w * q_uuv) / q_uu.powi(2),
            v * q_uuv / q_uu,
            q_uu * q_uuu / q_uv.powi(3),
            v * q_uv.powi(4) / q_uu.powi(3),
            w * q_uv.powi(5) / q_uu.powi(4),
        ];
    }
    vec![
        q_uvv * q_uv / q_vv.powi(3),
        q_vvv * q_uv.powi(2) / q_vv.powi(4),
        q_u * q_v.powi(2) / q_uv.powi(3),
        q_vv * (u * q_v * q_uuv + ut * q_uuv + w * q_v * q_uvv + vt * q_uvv) / q_uv.powi(4),
        q_vv.powi(2) * (v * q_v * q_uvv + ut * q_uvv + w * q_v * q_vvv + vt * q_vvv) / q_uv.powi(3),
        q_vv * (u * q_uuv + v * q_uvv) / q_uv.powi(2),
        (w * q_vvv + v * q_uvv) / q_uv,
        q_uuv / q_vv.powi(2),
        q_vv.powi(3) * (w * q_vv + v * q_uv) / q_uv.powi(3),
        q_vv.powi(4) * (w * q_uv + v * q_uu) / q_uv.powi(4),
        q_vv * q_uu / q_uv.powi(2),
    ]
}

fn s1_pairs() -> Check {
    let cfg = SampleConfig::default();
    let mut pairs = vec![(corpus_eq("linear"), corpus_eq("affine"))];
    let qs = ["0", "u", "3*ux + 1"].map(|q| EquationSpec::parse(q).unwrap());
    for i in 0..3 {
        for j in i + 1..3 {
            pairs.push((qs[i].clone(), qs[j].clone()));
        }
    }
    for (a, b) in pairs {
        let v = decide_equivalence(&a, &b, &cfg).map_err(|e| e.to_string())?;
        ensure(v.verdict == Verdict::Equivalent && v.reason == Reason::BothS1, || {
            format!("{} vs {}: {} ({})", a.q(), b.q(), v.verdict, v.reason)
        })?;
    }
    Ok(())
}

fn kdveq(args: &[&str]) -> Result<(Option<i32>, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_kdveq"))
        .args(args)
        .env_remove("KDVEQ_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code(), out.stdout))
}

const POSITIVE: &[&str] = &["equiv", "--qa", "u*ux", "--qb", "2*u*ux", "--seed", "7", "--samples", "200"];

fn positive_pair() -> Check {
    let (code, stdout) = kdveq(POSITIVE)?;
    let v: serde_json::Value = serde_json::from_slice(&stdout).map_err(|e| e.to_string())?;
    ensure(code == Some(0), || format!("exit code {code:?}"))?;
    ensure(v["verdict"] == "Equivalent" && v["reason"] == "OverlapPassed", || v.to_string())?;
    for key in ["residual_ab", "residual_ba"] {
        let r = v[key].as_f64().ok_or(format!("{key} missing"))?;
        ensure(r <= 1e-6, || format!("{key} = {r}"))?;
    }
    Ok(())
}

fn negative_pairs() -> Check {
    let cfg = SampleConfig::default();
    let v = decide_equivalence(&corpus_eq("kdv"), &corpus_eq("mkdv"), &cfg).map_err(|e| e.to_string())?;
    ensure(v.verdict == Verdict::Inequivalent && v.reason == Reason::SubclassMismatch, || {
        format!("kdv/mkdv: {} ({})", v.verdict, v.reason)
    })?;
    let v = decide_equivalence(&corpus_eq("kdv"), &corpus_eq("kdv-forced"), &cfg).map_err(|e| e.to_string())?;
    ensure(
        v.verdict == Verdict::Inequivalent && v.reason == Reason::RankMismatch && (v.rank_a, v.rank_b) == (2, 3),
        || format!("kdv/kdv-forced: {} ({}) ranks {} {}", v.verdict, v.reason, v.rank_a, v.rank_b),
    )
}

fn structure_equations() -> Check {
    let so3 = check_model(&builtin_model("so3").map_err(|e| e.to_string())?);
    ensure(so3.consistent() && so3.residuals().all(|r| r.is_empty()), || "so3 not closed".into())?;

    let model = builtin_model("s1-prolonged").map_err(|e| e.to_string())?;
    let report = check_model(&model);
    for form in ["theta1", "theta2", "theta3", "xi1", "xi2", "sigma1_1", "sigma1_2", "sigma1_3"] {
        let r = report.residual(form).ok_or(format!("no residual for {form}"))?;
        ensure(r.is_empty(), || format!("{form}: {}", r.display(&model)))?;
    }

    let alt = builtin_model("s1-prolonged-altsign").map_err(|e| e.to_string())?;
    let alt_report = check_model(&alt);
    let theta3 = alt_report.residual("theta3").ok_or("no residual for theta3")?;
    ensure(!theta3.is_empty(), || "altsign theta3 residual is empty".into())?;
    let c = theta3.coefficient(&alt, ["xi1", "sigma1_3", "eta4"]);
    ensure(c == Some(kdveq::expr::rat(-2, 1)), || format!("xi1^sigma1_3^eta4 coefficient {c:?}"))?;

    let (code, stdout) = kdveq(&["structure", "--model", "s1-prolonged"])?;
    let v: serde_json::Value = serde_json::from_slice(&stdout).map_err(|e| e.to_string())?;
    let note = v["note"].as_str().unwrap_or("");
    ensure(code == Some(0) && note.contains("sign") && note.contains("eta4"), || {
        format!("note: {note}")
    })
}

fn determinism() -> Check {
    let (_, first) = kdveq(POSITIVE)?;
    let (_, second) = kdveq(POSITIVE)?;
    ensure(first == second, || "two runs differ".into())?;
    for threads in ["1", "3"] {
        let args: Vec<&str> = ["--threads", threads].iter().chain(POSITIVE).copied().collect();
        let (_, other) = kdveq(&args)?;
        ensure(other == first, || format!("--threads {threads} differs"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 classification table", classification_table, Duration::from_secs(1)),
        ("2 kdv invariants", kdv_invariants, Duration::from_secs(5)),
        ("3 finite-difference oracle", finite_difference_oracle, Duration::from_secs(10)),
        ("4 S1 pairs", s1_pairs, Duration::from_secs(1)),
        ("5 equivalence positive", positive_pair, Duration::from_secs(30)),
        ("6 equivalence negatives", negative_pairs, Duration::from_secs(30)),
        ("7 structure equations", structure_equations, Duration::from_secs(1)),
        ("8 determinism", determinism, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = result.and_then(|()| {
            ensure(took <= limit, || format!("took {took:.2?}, limit {limit:?}"))
        });
        match result {
            Ok(()) => println!("PASS {name} ({took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({took:.2?}): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
