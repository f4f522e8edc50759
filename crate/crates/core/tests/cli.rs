//! The command-line surface: documents, exit codes, determinism.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gjms-residue")).args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn odd_or_unsupported_dimensions_are_usage_errors() {
    assert_eq!(run(&["bn-flat", "--dim", "3"]).status.code(), Some(2));
    assert_eq!(run(&["pn", "--dim", "6", "--curved"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn flat_table_document() {
    let o = run(&["bn-flat", "--dim", "4", "--format", "json"]);
    assert!(o.status.success());
    let d = json(&o);
    assert_eq!(d["dimension"], 4);
    assert_eq!(d["kind"], "coeff-table");
    assert!(d["conventions"]["laplacian"].is_string());
    let terms = d["terms"].as_array().unwrap();
    assert!(!terms.is_empty());
    for t in terms {
        let c = t["coeff"].as_str().unwrap();
        assert!(c.contains('/'), "{}", c);
        assert_eq!(t["f_jet"].as_array().unwrap().len(), 4);
    }
    assert_eq!(o.stdout, run(&["bn-flat", "--dim", "4", "--format", "json"]).stdout);
}

#[test]
fn flat_latex_uses_semicolon_jets() {
    let o = run(&["bn-flat", "--dim", "6", "--format", "latex"]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("f_{;abc} h_{;abc}"), "{}", s);
}

#[test]
fn operator_documents() {
    let d = json(&run(&["pn", "--dim", "6"]));
    assert_eq!(d["kind"], "operator");
    assert_eq!(d["metadata"]["leading_coefficient"], "-4/1");
    assert!(d["terms"][0]["f_jet"].is_null());
    let d = json(&run(&["pn", "--dim", "4", "--curved"]));
    assert_eq!(d["metadata"]["leading_coefficient"], "4/1");
    assert!(d["terms"].as_array().unwrap().iter().any(|t| !t["curvature"].as_array().unwrap().is_empty()));
    assert!(d["metadata"]["delta_S_d"].is_object());
}

#[test]
fn verify_traces_passes() {
    let o = run(&["verify", "traces"]);
    assert_eq!(o.status.code(), Some(0));
    let d = json(&o);
    assert_eq!(d["pass"], true);
    assert_eq!(d["checks"][0]["id"], 1);
}
