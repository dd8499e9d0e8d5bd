use std::path::PathBuf;
use std::process::{Command, Output};

use mds_core::corpus::named;
use mds_core::problem::{problem_from_json, problem_to_json};
use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn mds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mds")).args(args).output().expect("run mds")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn path(name: &str) -> String {
    corpus(name).to_string_lossy().into_owned()
}

#[test]
fn shipped_corpus_matches_named_problems() {
    for (name, p) in named() {
        let file = corpus(&format!("{name}.json"));
        if std::env::var_os("MDS_WRITE_CORPUS").is_some() {
            let text = serde_json::to_string_pretty(&problem_to_json(&p)).unwrap();
            std::fs::write(&file, text + "\n").unwrap();
        }
        let text = std::fs::read_to_string(&file).unwrap_or_else(|e| panic!("{}: {e}", file.display()));
        let q = problem_from_json(&text).unwrap();
        assert_eq!(problem_to_json(&q), problem_to_json(&p), "{name}");
    }
}

#[test]
fn validate_reports_violations() {
    let ok = mds(&["validate", &path("free_sl.json")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout_json(&ok)["schema"], 1);

    let bad = mds(&["validate", &path("bad_w.json")]);
    assert_eq!(bad.status.code(), Some(2));
    let v = stdout_json(&bad);
    assert_eq!(v["valid"], false);
    assert!(!v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn dtn_of_free_string() {
    let o = mds(&["dtn", &path("free_sl.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v = stdout_json(&o);
    let m = &v["status"]["matrix"];
    let get = |i: usize, j: usize| m[i][j].as_f64().unwrap();
    // -y'' = 0 on (0, 1): N = [[1, -1], [-1, 1]] D
    let expect = [[1.0, -1.0], [-1.0, 1.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((get(i, j) - expect[i][j]).abs() < 1e-8, "{m}");
        }
    }
}

#[test]
fn eig_of_free_dirac_with_dirichlet() {
    let o = mds(&["eig", &path("free_dirac.json"), "--bc", &path("dirichlet.json"), "--range", "-3.5,3.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v = stdout_json(&o);
    let ev: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|e| e["lambda"].as_f64().unwrap()).collect();
    assert_eq!(ev.len(), 7, "{ev:?}");
    for (k, x) in ev.iter().enumerate() {
        assert!((x - (k as f64 - 3.0)).abs() < 1e-8, "{ev:?}");
    }
}

#[test]
fn kvn_density_needs_assertion() {
    let o = mds(&["kvn", &path("free_sl.json")]);
    assert_eq!(o.status.code(), Some(3));
    let o = mds(&["kvn", &path("free_sl.json"), "--assume-nonnegative"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(stdout_json(&o)["result"]["hypothesis_unverified"], true);
}

#[test]
fn kvn_and_classify_on_atomic_problem() {
    let o = mds(&["kvn", &path("delta_coupling.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v = stdout_json(&o);
    assert_eq!(v["cross_validation"]["oracle_match"], true);

    let o = mds(&["classify", &path("trichotomy1.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["n_plus"], 1);
    assert_eq!(v["n_minus"], 1);
}

#[test]
fn relations_and_solve() {
    let o = mds(&["relations", &path("single_mass.json"), "--op", "tmin"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout_json(&o)["relation"]["dim"].is_number());

    let o = mds(&["solve", &path("free_sl.json"), "--lambda", "0", "--ivp", "0,0,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v = stdout_json(&o);
    let last = v["traces"].as_array().unwrap().last().unwrap().clone();
    // u1 = -x for -y'' = 0 with u2 = -y' = 1
    let u1 = last["minus"][0][0].as_f64().unwrap();
    assert!((u1.abs() - 1.0).abs() < 1e-10, "{last}");
}

#[test]
fn exit_codes() {
    assert_eq!(mds(&["validate", "--no-such-flag", &path("free_sl.json")]).status.code(), Some(64));
    assert_eq!(mds(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(mds(&["--help"]).status.code(), Some(0));
    assert_eq!(mds(&["validate", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(mds(&["eig", &path("free_dirac.json"), "--bc", "maximal", "--range", "x"]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = mds(&["selftest", "--format", "text"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 10, "{text}");
}
