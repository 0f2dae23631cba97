mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture_path;

fn stepwave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stepwave"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn fx(name: &str) -> String {
    fixture_path(name).to_str().unwrap().to_owned()
}

#[test]
fn plot_matches_golden_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = stepwave(dir.path(), &["plot", "-p", &fx("ex3_3"), "-o", "ex3_3.gp", "--csv", "ex3_3.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let script = std::fs::read_to_string(dir.path().join("ex3_3.gp")).unwrap();
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/ex3_3.gp")).unwrap();
    assert_eq!(script, golden);
    assert_eq!(script.matches("splot").count(), 1);
    let csv = std::fs::read_to_string(dir.path().join("ex3_3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 21 * 21);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(stepwave(d, &["validate", "-p", &fx("ex3_3")]).status.code(), Some(0));
    assert_eq!(stepwave(d, &["validate", "-p", &fx("ex3_5")]).status.code(), Some(2));
    assert_eq!(stepwave(d, &["residual", "-p", &fx("ex3_7"), "--samples", "50"]).status.code(), Some(0));
    assert_eq!(stepwave(d, &["compare", "-p", &fx("heat")]).status.code(), Some(0));
    // The oracle only handles order <= 2.
    assert_eq!(stepwave(d, &["compare", "-p", &fx("ex3_3")]).status.code(), Some(1));
    assert_eq!(stepwave(d, &["solve", "-p", "missing.json"]).status.code(), Some(66));
    assert_eq!(stepwave(d, &["solve", "--bogus"]).status.code(), Some(64));
    assert_eq!(stepwave(d, &[]).status.code(), Some(64));
    assert_eq!(stepwave(d, &["--help"]).status.code(), Some(0));

    let bad = common::fixture_text("heat").replacen("\"l\": 3.141592653589793", "\"l\": -1, \"extra\": 3", 1);
    std::fs::write(d.join("bad.json"), bad).unwrap();
    let out = stepwave(d, &["validate", "-p", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/l"), "{stderr}");
    assert!(stderr.contains("extra"), "{stderr}");

    std::fs::write(d.join("syntax.json"), "{\n  \"l\": 1,\n  oops\n}").unwrap();
    let out = stepwave(d, &["solve", "-p", "syntax.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn solve_writes_file_and_restricts_strip() {
    let dir = tempfile::tempdir().unwrap();
    let out = stepwave(
        dir.path(),
        &["solve", "-p", &fx("ex3_4"), "-o", "f.csv", "--nt", "5", "--nx", "4", "--strip-x0", "-1", "--strip-x1", "1"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    let xs: Vec<f64> = csv.lines().skip(1).take(4).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5]);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve", "-p", "FX"],
        vec!["validate", "-p", "FX"],
        vec!["residual", "-p", "FX", "--samples", "100"],
    ] {
        for name in ["ex3_3", "ex3_5", "rem3_10"] {
            let path = fx(name);
            let args: Vec<&str> = args.iter().map(|a| if *a == "FX" { path.as_str() } else { a }).collect();
            let a = stepwave(dir.path(), &args);
            let b = stepwave(dir.path(), &args);
            assert_eq!(a.stdout, b.stdout, "{args:?}");
            assert_eq!(a.stderr, b.stderr, "{args:?}");
            assert_eq!(a.status.code(), b.status.code());
        }
    }
}
