//! Golden-file tests for every CLI subcommand. Set `DULAC_UPDATE_GOLDEN=1`
//! to rewrite the files under `tests/golden/` after an intended change.

use std::path::PathBuf;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dulac").chain(args.iter().copied());
    let code = dulac::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn golden(name: &str, args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{name}: {err}");
    let (_, again, _) = run(args);
    assert_eq!(out, again, "{name}: report is not reproducible");
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"));
    if std::env::var_os("DULAC_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &out).unwrap();
    } else {
        let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(out, expected, "{name}: output differs from golden file");
    }
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["command"], args[0]);
    v["result"].clone()
}

fn exps(v: &Value) -> Vec<Vec<u64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|e| e.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect())
        .collect()
}

/// Nonzero terms of a serialized map as `(target, exponents, re, im)`.
fn terms(map: &Value) -> Vec<(u64, Vec<u64>, f64, f64)> {
    let mut out = Vec::new();
    for c in map["components"].as_array().unwrap() {
        for t in c["terms"].as_array().unwrap() {
            out.push((
                c["target"].as_u64().unwrap(),
                t["exponents"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect(),
                t["re"].as_f64().unwrap(),
                t["im"].as_f64().unwrap(),
            ));
        }
    }
    out
}

fn assert_terms(map: &Value, expected: &[(u64, &[u64], f64)], tol: f64) {
    let got = terms(map);
    let significant: Vec<_> = got.iter().filter(|t| t.2.abs() > tol || t.3.abs() > tol).collect();
    assert_eq!(significant.len(), expected.len(), "{got:?}");
    for (target, e, re) in expected {
        let t = got
            .iter()
            .find(|t| t.0 == *target && t.1 == *e)
            .unwrap_or_else(|| panic!("missing term {target} {e:?} in {got:?}"));
        assert!((t.2 - re).abs() <= tol && t.3.abs() <= tol, "{t:?} vs {re}");
    }
}

#[test]
fn resonances_odd_powers() {
    let r = golden("resonances_odd_powers", &["resonances", "--spectrum", "tests/data/odd_powers_spectrum.json"]);
    assert_eq!(r["max_length"], 5);
    assert_eq!(r["lengths"], serde_json::json!([1, 3, 5]));
    let p = &r["p_sets"];
    assert!(exps(&p[0]).is_empty());
    assert_eq!(exps(&p[1]), vec![vec![3, 0, 0]]);
    let mut p3 = exps(&p[2]);
    p3.sort();
    assert_eq!(p3, vec![vec![2, 1, 0], vec![5, 0, 0]]);
    let mut q2 = exps(&r["q_sets"][1]);
    q2.sort();
    assert_eq!(q2, vec![vec![1, 0, 0], vec![2, 0, 0], vec![3, 0, 0]]);
    let mut q3 = exps(&r["q_sets"][2]);
    q3.sort();
    let mut expected: Vec<Vec<u64>> = (1..=5).map(|i| vec![i, 0, 0]).collect();
    expected.extend([vec![0, 1, 0], vec![1, 1, 0], vec![2, 1, 0]]);
    expected.sort();
    assert_eq!(q3, expected);
}

#[test]
fn pattern_fixtures() {
    let a = golden("pattern_half_third_quarter", &["pattern", "--spectrum", "tests/data/half_third_quarter.json"]);
    assert_eq!(a["pattern"], serde_json::json!(["*00", "0*0", "*0*"]));
    let b = golden("pattern_half_third_sixth", &["pattern", "--spectrum", "tests/data/half_third_sixth.json"]);
    assert_eq!(b["pattern"], serde_json::json!(["*00", "0*0", "***"]));
    let c = golden("pattern_jordan4", &["pattern", "--spectrum", "tests/data/jordan4.json"]);
    assert_eq!(c["pattern"], serde_json::json!(["*000", "**00", "***0", "****"]));
    assert_eq!(c["multiplicities"], serde_json::json!([2, 1, 1]));
}

#[test]
fn flags_half_third_quarter() {
    let r = golden("flags_half_third_quarter", &["flags", "--spectrum", "tests/data/half_third_quarter.json"]);
    let bases: Vec<Vec<u64>> = r["flags"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["basis"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect())
        .collect();
    assert_eq!(bases, vec![vec![2, 3], vec![1, 3], vec![2]]);
}

#[test]
fn normalize_worked_cubic() {
    let r = golden(
        "normalize_worked_cubic",
        &["normalize", "--map", "tests/data/worked_cubic.json", "--order", "3", "--mode", "resonant"],
    );
    assert_terms(&r["conjugator"], &[(1, &[1, 0], 1.0), (2, &[0, 1], 1.0), (2, &[3, 0], -8.0)], 1e-12);
    assert_terms(&r["normal_form"], &[(1, &[1, 0], 0.5), (2, &[0, 1], 0.25), (2, &[2, 0], 1.0)], 1e-12);
    assert!(r["roundtrip_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn normalize_linearizable() {
    let r = golden("normalize_linearizable", &["normalize", "--map", "tests/data/worked_linearizable.json"]);
    let third = 0.3333333333333333;
    assert_terms(&r["normal_form"], &[(1, &[1, 0], 0.5), (2, &[0, 1], third)], 1e-12);
    // 1 / (1/2 - third^2), with third as read from the input file.
    let c = -1.0 / (0.5 - third * third);
    assert_terms(&r["conjugator"], &[(1, &[1, 0], 1.0), (1, &[0, 2], c), (2, &[0, 1], 1.0)], 1e-12);
    assert!((c + 18.0 / 7.0).abs() < 1e-12);
}

#[test]
fn verify_worked_cubic() {
    let r = golden(
        "verify_worked_cubic",
        &[
            "verify",
            "--map",
            "tests/data/worked_cubic.json",
            "--conjugator",
            "tests/data/worked_cubic_conjugator.json",
            "--normal",
            "tests/data/worked_cubic_normal.json",
        ],
    );
    assert_eq!(r["passed"], true);
    assert_eq!(r["residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn verify_reports_constructed_defect() {
    let (code, out, _) = run(&[
        "verify",
        "--map",
        "tests/data/worked_cubic.json",
        "--conjugator",
        "tests/data/worked_cubic_conjugator.json",
        "--normal",
        "tests/data/worked_cubic_wrong_normal.json",
    ]);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(&out).unwrap();
    let r = &v["result"];
    assert_eq!(r["passed"], false);
    assert!((r["residual"].as_f64().unwrap() - 1e-3).abs() < 1e-15);
    assert_eq!(r["worst"]["component"], 2);
    assert_eq!(r["worst"]["exponents"], serde_json::json!([2, 0]));
}

#[test]
fn group_operations_on_odd_powers() {
    let spectrum = "tests/data/odd_powers_spectrum.json";
    let map = "tests/data/odd_powers_map.json";
    let c = golden("compose_odd_powers", &["compose", "--map", map, "--map", map, "--spectrum", spectrum]);
    assert_eq!(c["mode"], "group");
    let i = golden("invert_odd_powers", &["invert", "--map", map, "--spectrum", spectrum]);
    // P^{-1}: z2 - 2 z1 + z1^3 in the second component.
    let t = terms(&i["map"]);
    let find = |target: u64, e: &[u64]| t.iter().find(|x| x.0 == target && x.1 == e).map(|x| x.2);
    assert_eq!(find(2, &[1, 0, 0]), Some(-2.0));
    assert_eq!(find(2, &[3, 0, 0]), Some(1.0));
    let j = golden("conjugate_odd_powers", &[
        "conjugate",
        "--map",
        map,
        "--spectrum",
        spectrum,
        "--translation",
        "[[0.1, 0.0], [0.0, 0.0], [0.0, 0.0]]",
    ]);
    assert_eq!(j["mode"], "translation");
}

#[test]
fn jet_compose_and_conjugate() {
    let c = golden(
        "compose_jet_worked",
        &["compose", "--map", "tests/data/worked_cubic_conjugator.json", "--map", "tests/data/worked_cubic.json"],
    );
    assert_eq!(c["mode"], "jet");
    let k = golden(
        "conjugate_worked_cubic",
        &["conjugate", "--map", "tests/data/worked_cubic.json", "--conjugator", "tests/data/worked_cubic_conjugator.json"],
    );
    assert_terms(&k["map"], &[(1, &[1, 0], 0.5), (2, &[0, 1], 0.25), (2, &[2, 0], 1.0)], 1e-14);
    let inv = golden("invert_jet_conjugator", &["invert", "--map", "tests/data/worked_cubic_conjugator.json"]);
    assert_terms(&inv["map"], &[(1, &[1, 0], 1.0), (2, &[0, 1], 1.0), (2, &[3, 0], 8.0)], 0.0);
}

#[test]
fn sample_is_seeded() {
    let r = golden(
        "sample_half_quarter",
        &["sample", "--spectrum", "tests/data/half_quarter.json", "--seed", "42", "--conj-degree", "3", "--noise", "0.2"],
    );
    assert_eq!(r["seed"], 42);
    assert!(r["roundtrip_residual"].as_f64().unwrap() < 1e-12);
    let (_, other, _) = run(&["sample", "--spectrum", "tests/data/half_quarter.json", "--seed", "43"]);
    let other: Value = serde_json::from_str(&other).unwrap();
    assert_ne!(other["result"]["germ"], r["germ"]);
}
