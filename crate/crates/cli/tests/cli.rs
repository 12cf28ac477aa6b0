use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn sft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sft")).args(args).env_remove("SFT_OUTPUT_DIR").output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn verify_builtins_pass() {
    for model in ["circle", "sphere3", "lens:2"] {
        let out = sft(&["verify", "--model", model, "--weight", "5"]);
        assert_eq!(out.status.code(), Some(0), "{model}");
        let r = json(&out);
        assert_eq!(r["hh_residual"], "zero");
        assert_eq!(r["degree_check"], "pass");
        assert_eq!(r["d_squared"], "pass");
    }
}

#[test]
fn corrupted_model_exits_with_witness() {
    let out = sft(&["verify", "--model", &fixture("corrupted.json")]);
    assert_eq!(out.status.code(), Some(3));
    let r = json(&out);
    assert_eq!(r["hh_residual"]["monomial"], "p_1*q_1^2*a*b");
    assert_eq!(r["passed"], false);
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(sft(&["verify", "--model", "no-such-model"]).status.code(), Some(2));
    assert_eq!(sft(&["verify", "--model", "lens:x"]).status.code(), Some(2));
    assert_eq!(sft(&["satellite", "--g", "1", "--n", "0", "--K", "0"]).status.code(), Some(2));
    assert_eq!(sft(&["grading", "brieskorn", "--p", "7", "--n", "5"]).status.code(), Some(2));
    assert_eq!(sft(&["gw", "--n", "4", "--order", "3"]).status.code(), Some(2));
    assert_eq!(sft(&["homology", "--model", "circle"]).status.code(), Some(2));
    assert_eq!(sft(&["bogus"]).status.code(), Some(2));
}

#[test]
fn custom_file_loads() {
    let r = json(&sft(&["verify", "--model", &fixture("circle_rational.json")]));
    assert_eq!(r["passed"], true);
    assert_eq!(r["weight"], 4);
    let r = json(&sft(&["verify", "--model", &fixture("sphere3_builtin.json")]));
    assert_eq!((r["model"].as_str(), r["weight"].as_u64()), (Some("sphere3"), Some(5)));
}

#[test]
fn homology_tables() {
    let r = json(&sft(&["homology", "--model", &fixture("acyclic_pair.json")]));
    assert!(r["table"].as_array().unwrap().iter().all(|row| row["betti"] == 0));

    let r = json(&sft(&["homology", "--model", "ellipsoid:2", "--weight", "5"]));
    let rows = r["table"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["degree"], format!("{}/1", 2 * (i + 1)));
        assert_eq!(row["betti"], 1);
    }

    let r = json(&sft(&["homology", "--model", "sphere3", "--weight", "4"]));
    let cycles: Vec<(String, bool)> =
        r["cycles"].as_array().unwrap().iter().map(|c| (c["name"].as_str().unwrap().to_string(), c["is_cycle"].as_bool().unwrap())).collect();
    assert_eq!(cycles, vec![("g1".into(), true), ("q1_0".into(), false), ("q1_2".into(), false)]);
}

#[test]
fn gw_tables() {
    let r = json(&sft(&["gw", "--n", "1", "--order", "6"]));
    let f: Vec<(String, String)> = r["f_cpn"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["monomial"].as_str().unwrap().into(), t["coeff"].as_str().unwrap().into()))
        .collect();
    assert!(f.contains(&("t0^2*t2".into(), "1/2".into())));
    assert!(f.contains(&("t2^3*z".into(), "1/6".into())));
    assert!(f.contains(&("z".into(), "1/1".into())));

    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sft"))
        .args(["--save", "gw", "--n", "2", "--order", "11", "--oracle"])
        .env("SFT_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("gw.csv")).unwrap();
    assert_eq!(csv, "d,n_d,oracle,agree\n1,1,1,true\n2,1,1,true\n3,12,12,true\n4,620,620,true\n");
    let saved = std::fs::read(dir.path().join("gw.json")).unwrap();
    assert_eq!(saved, out.stdout);
}

#[test]
fn grading_examples() {
    let r = json(&sft(&["grading", "pq", "--cz", "3", "--n", "2"]));
    assert_eq!((r["deg_p"].as_i64(), r["deg_q"].as_i64()), (Some(-4), Some(2)));
    let r = json(&sft(&["grading", "bott", "--k", "1", "--l", "1", "--c1", "2", "--delta-deg", "0"]));
    assert_eq!((r["deg_p"].as_str(), r["deg_q"].as_str()), (Some("-6/1"), Some("2/1")));
    let r = json(&sft(&["grading", "brieskorn", "--p", "9", "--n", "5", "--k-max", "30"]));
    assert_eq!(r["table"].as_array().unwrap().len(), 31);
    let r = json(&sft(&["grading", "yau", "--n", "2", "--class", "pt:0", "--i-max", "3"]));
    assert_eq!(r["ellipsoid_agrees"], true);
}

#[test]
fn satellites() {
    let r = json(&sft(&["satellite", "--g", "0", "--n", "2", "--K", "3"]));
    assert_eq!(r["matches_divided_differential"], true);
    assert_eq!(r["points"], 3);
    let r = json(&sft(&["satellite", "--g", "1", "--n", "0"]));
    assert!(r["terms"].as_array().unwrap().is_empty());
}

#[test]
fn output_is_deterministic() {
    let args = ["laws", "--seed", "7", "--cases", "40"];
    let (a, b) = (sft(&args), sft(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["passed"], true);
    let a = sft(&["homology", "--model", "sphere3", "--weight", "3"]);
    assert_eq!(a.stdout, sft(&["homology", "--model", "sphere3", "--weight", "3"]).stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let keys: Vec<&str> = text.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim().split('"').nth(1).unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}
