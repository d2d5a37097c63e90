use std::path::Path;
use std::process::{Command, Output};

use treecut::budget::Budgets;
use treecut::generators::MaxCutInstance;
use treecut::lp::SolverOptions;
use treecut::sa_gap::gap_experiment;

fn treecut(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treecut"))
        .args(args)
        .current_dir(dir)
        .env_remove("TREECUT_BUDGET")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn block_then_oracle() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("k3.gr"), "p tw 3 3\n1 2\n2 3\n1 3\n").unwrap();
    stdout(&treecut(dir.path(), &["gen", "block", "--maxcut", "k3.gr", "--st-demand", "-o", "k3.ssc"]));
    for f in ["k3.ssc", "k3.td", "k3.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let o = stdout(&treecut(dir.path(), &["oracle", "k3.ssc", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&o).unwrap();
    assert_eq!(v["sparsity"], "3/5");

    let o = stdout(&treecut(dir.path(), &["solve", "k3.ssc", "--td", "k3.td", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&o).unwrap();
    assert_eq!(v["within_factor_two"], true);
    let lp: treecut::Rational = treecut::rational::parse_rational(v["lp_ratio"].as_str().unwrap()).unwrap();
    assert!(lp <= treecut::rational::ratio(3, 5));
}

#[test]
fn gap_json_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let o = stdout(&treecut(dir.path(), &["gap", "--base", "p3", "--rounds", "2", "--levels", "2", "--format", "json"]));
    let h = MaxCutInstance::named("p3").unwrap();
    let rep = gap_experiment("p3", &h, 2, 2, &Budgets::default(), &SolverOptions::default());
    let want = serde_json::to_value(&rep).unwrap();
    let got: serde_json::Value = serde_json::from_str(&o).unwrap();
    assert_eq!(got, want);
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&treecut(dir.path(), &["gen", "power", "--base", "p3", "--levels", "2", "-o", "g.ssc"]));
    let a = stdout(&treecut(dir.path(), &["embed", "g.ssc", "--td", "g.td", "--samples", "50", "--seed", "3"]));
    let b = stdout(&treecut(dir.path(), &["embed", "g.ssc", "--td", "g.td", "--samples", "50", "--seed", "3"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 23);
    let r1 = stdout(&treecut(dir.path(), &["round", "g.ssc", "--td", "g.td", "--samples", "20", "--format", "json"]));
    let r2 = stdout(&treecut(dir.path(), &["round", "g.ssc", "--td", "g.td", "--samples", "20", "--format", "json"]));
    assert_eq!(r1, r2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.ssc"), "p ssc 2\ne 1 5 1\n").unwrap();
    let o = treecut(dir.path(), &["oracle", "bad.ssc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = treecut(dir.path(), &["gen", "power", "--base", "k5", "--levels", "3", "--budget", "generated_vertices=100"]);
    assert_eq!(o.status.code(), Some(3));

    let o = Command::new(env!("CARGO_BIN_EXE_treecut"))
        .args(["gen", "power", "--base", "k5", "--levels", "3"])
        .env("TREECUT_BUDGET", "generated_vertices=100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));

    let o = treecut(dir.path(), &["oracle", "missing.ssc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn decompose_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&treecut(dir.path(), &["gen", "block", "--base", "c5", "-o", "c5.ssc"]));
    let td = stdout(&treecut(dir.path(), &["decompose", "c5.ssc"]));
    assert!(td.starts_with("s td "));
    let o = stdout(&treecut(dir.path(), &["verify", "k3"]));
    assert!(o.lines().all(|l| l.starts_with("PASS")), "{o}");
}
