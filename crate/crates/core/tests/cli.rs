use std::path::PathBuf;
use std::process::Command;

use monodromy::cli;
use monodromy::extpan::{self, CocycleFile, FinAbGroup, TorsorReport};
use monodromy::pairing::{IntSymMatrix, PairingMatrix};
use monodromy::realizations::{HodgeTable, MonodromyOperator, TorsionDims};
use monodromy::selftest::SelftestReport;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).expect("golden file")
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("monodromy").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let r = run(args);
    assert_eq!(r.code, 0, "{args:?} failed: {}", r.err);
    r.out
}

#[test]
fn pairing_of_theta_graph_matches_golden_and_pattern() {
    let out = ok(&["pairing", &data("theta.json")]);
    assert_eq!(out, golden("pairing_theta.json"));
    let pm = PairingMatrix::from_json(&out).unwrap();
    // Lengths a, b, c are the three generators: [[a+b, a], [a, a+c]].
    let e = |i, j| pm.entry(i, j).0.clone();
    assert_eq!(e(0, 0), vec![1, 1, 0]);
    assert_eq!(e(0, 1), vec![1, 0, 0]);
    assert_eq!(e(1, 0), vec![1, 0, 0]);
    assert_eq!(e(1, 1), vec![1, 0, 1]);
}

#[test]
fn picard_lefschetz_on_loop_matches_golden() {
    let out = ok(&["pl", &data("loop.json"), "--weights", "3", "--winding", "1"]);
    assert_eq!(out, golden("pl_loop.json"));
    let op = MonodromyOperator::from_json(&out).unwrap();
    assert_eq!(op.matrix.to_rows(), vec![vec![1, 3], vec![0, 1]]);
}

#[test]
fn negative_winding_and_modulus() {
    let out = ok(&["pl", &data("loop.json"), "--weights", "3", "--winding", "-1", "--mod", "5"]);
    let op = MonodromyOperator::from_json(&out).unwrap();
    assert_eq!(op.matrix.to_rows(), vec![vec![1, 2], vec![0, 1]]);
    assert_eq!(op.modulus, 5);
}

#[test]
fn component_group_and_specialization() {
    let out = ok(&["compgroup", &data("theta.json"), "--weights", "1,1,1"]);
    assert_eq!(out, golden("compgroup_theta.json"));
    let out = ok(&["specialize", &data("theta.json"), "--weights", "1,2,3"]);
    let b = IntSymMatrix::from_json(&out).unwrap();
    assert_eq!(b.matrix().to_rows(), vec![vec![3, 1], vec![1, 4]]);
}

#[test]
fn hodge_and_torsion_reports() {
    let out = ok(&["hodge", &data("genus.json")]);
    assert_eq!(out, golden("hodge_genus.json"));
    let t: HodgeTable = serde_json::from_str(&out).unwrap();
    assert_eq!(t.rows(), [[1, 0], [6, 3], [1, 1]]);
    assert_eq!(ok(&["--format", "text", "hodge", &data("genus.json")]), golden("hodge_genus.txt"));

    let out = ok(&["torsion", &data("genus.json"), "--mod", "3"]);
    let d: TorsionDims = serde_json::from_str(&out).unwrap();
    assert_eq!(d.as_triple(), (1, 6, 1));
}

#[test]
fn validate_lists_every_violation_and_exits_one() {
    let r = run(&["validate", &data("broken.json")]);
    assert_eq!(r.code, 1);
    assert_eq!(r.out, golden("validate_broken.json"));
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 5);

    let r = run(&["validate", &data("theta.json")]);
    assert_eq!(r.code, 0);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["valid"], Value::Bool(true));
}

#[test]
fn input_errors_name_their_locus() {
    let r = run(&["pairing", &data("malformed.json")]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("malformed.json") && r.err.contains("line"), "{}", r.err);

    let r = run(&["pairing", "/nonexistent/curve.json"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("cannot read /nonexistent/curve.json"), "{}", r.err);

    let r = run(&["pairing", &data("broken.json")]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("edge e"), "{}", r.err);
}

#[test]
fn flag_errors_exit_two() {
    for args in [
        vec!["pairing", "x.json", "--bogus"],
        vec!["specialize", "x.json"],
        vec!["selftest", "--count", "0"],
        vec!["--format", "yaml", "hodge", "x.json"],
        vec!["extpan", "--p", "0", "--q", "2", "--r", "2", "--e", "split", "--f", "split"],
        vec!["extpan", "--p", "3", "--q", "2", "--r", "2", "--e", "split", "--f", "nonsplit"],
    ] {
        assert_eq!(run(&args).code, 2, "{args:?}");
    }
    let r = run(&["specialize", &data("theta.json"), "--weights", "1,1"]);
    assert_eq!(r.code, 2);
    let r = run(&["specialize", &data("theta.json"), "--weights", "1,0,1"]);
    assert_eq!(r.code, 2);
    let r = run(&["torsion", &data("theta.json"), "--mod", "1"]);
    assert_eq!(r.code, 2);
}

#[test]
fn budget_errors_exit_two() {
    let r = run(&["extpan", "--p", "4,4", "--q", "2", "--r", "2", "--e", "split", "--f", "split"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("limit"), "{}", r.err);
}

#[test]
fn help_exits_zero() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("extpan"));
}

#[test]
fn extpan_nonsplit_over_z2() {
    let out = ok(&["extpan", "--p", "2", "--q", "2", "--r", "2", "--e", "nonsplit", "--f", "nonsplit"]);
    assert_eq!(out, golden("extpan_nonsplit.json"));
    let report: TorsorReport = serde_json::from_str(&out).unwrap();
    assert_eq!(report.fiber_size, 1);
    assert_eq!(report.ext1_order, 2);
    assert_eq!(report.fiber_size * report.stabilizer_order, report.ext1_order);
}

#[test]
fn extpan_accepts_cocycle_files() {
    let dir = tempfile::tempdir().unwrap();
    let q = FinAbGroup::new(vec![4]).unwrap();
    let r = FinAbGroup::new(vec![2]).unwrap();
    let class = extpan::ext1_classes(&q, &r).unwrap()[1].clone();
    let path = dir.path().join("e.json");
    std::fs::write(&path, serde_json::to_string(&CocycleFile::from_class(&class)).unwrap()).unwrap();
    let e = path.to_string_lossy().into_owned();
    let out = ok(&["extpan", "--p", "2", "--q", "4", "--r", "2", "--e", &e, "--f", "split"]);
    let report: TorsorReport = serde_json::from_str(&out).unwrap();
    assert_eq!(report.ext1_order, 2);
    assert!(report.transitive && report.section_ok);

    // Same file offered where a class in Ext¹(Z/2, Z/2) is expected.
    let r = run(&["extpan", "--p", "2", "--q", "2", "--r", "2", "--e", &e, "--f", "split"]);
    assert_eq!(r.code, 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"q":[2],"p":[2],"table":[[[0],[0]],[[0],[5]]]}"#).unwrap();
    let b = bad.to_string_lossy().into_owned();
    let r = run(&["extpan", "--p", "2", "--q", "2", "--r", "2", "--e", &b, "--f", "split"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("--e"), "{}", r.err);
}

#[test]
fn selftest_is_green_and_deterministic() {
    let a = ok(&["selftest", "--seed", "0", "--count", "10"]);
    let b = ok(&["selftest", "--seed", "0", "--count", "10"]);
    assert_eq!(a, b);
    let report: SelftestReport = serde_json::from_str(&a).unwrap();
    assert!(report.all_passed);
    assert_eq!(report.seed, 0);
    assert!(report.properties.iter().all(|p| p.passed && p.cases > 0));
}

#[test]
fn every_command_is_byte_deterministic() {
    let theta = data("theta.json");
    let genus = data("genus.json");
    let commands: Vec<Vec<&str>> = vec![
        vec!["pairing", &theta],
        vec!["specialize", &theta, "--weights", "2,1,5"],
        vec!["compgroup", &genus, "--weights", "4"],
        vec!["pl", &genus, "--weights", "2", "--winding", "3"],
        vec!["hodge", &genus],
        vec!["torsion", &genus, "--mod", "7"],
        vec!["extpan", "--p", "2", "--q", "2,2", "--r", "2", "--e", "split", "--f", "nonsplit"],
        vec!["--format", "text", "pairing", &theta],
        vec!["--format", "text", "selftest", "--count", "3"],
    ];
    for args in commands {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first.code, 0, "{args:?}: {}", first.err);
        assert_eq!(first.out, second.out, "{args:?}");
    }
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_monodromy");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let o = status(&["pairing", &data("theta.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), golden("pairing_theta.json"));
    assert_eq!(status(&["validate", &data("broken.json")]).status.code(), Some(1));
    assert_eq!(status(&["selftest", "--count", "0"]).status.code(), Some(2));
}
