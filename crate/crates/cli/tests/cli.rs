use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    p.display().to_string()
}

fn dunkl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dunkl")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let o = dunkl(&[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = config("n1g05.cfg");
    for args in [
        vec!["transform", "--bogus"],
        vec!["transform", "--out", out],
        vec!["transform", "--setup", "/does/not/exist.cfg", "--out", out],
        vec!["translate", "--setup", &cfg, "--x", "1,2", "--out", out],
        vec!["transform", "--setup", &cfg, "--function", "nope", "--out", out],
        vec!["selftest", "--setup", &cfg, "--criteria", "12", "--out", out],
        vec!["poly-check", "--setup", &cfg, "--tol", "-1", "--out", out],
    ] {
        assert_eq!(code(&dunkl(&args)), 2, "{args:?}");
    }
}

#[test]
fn transform_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dunkl(&["transform", "--setup", &config("n1g05.cfg"), "--function", "modulated", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(dir.path().join("transform.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("xi_1,re,im"));
    assert!(csv.lines().count() > 100);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("transform.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["command"], "transform");
    assert_eq!(report["config"]["setup"]["multiplicities"][0], 0.5);
    assert_eq!(report["config"]["params"]["function"], "modulated");
    assert!(report["report"]["plancherel_defect"].as_f64().unwrap() < 1e-6);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("n1g25.cfg");
    for d in [&a, &b] {
        let out = d.path().to_str().unwrap();
        assert_eq!(code(&dunkl(&["cz-decompose", "--setup", &cfg, "--function", "random", "--seed", "7", "--out", out])), 0);
        assert_eq!(code(&dunkl(&["translate", "--setup", &cfg, "--x", "-0.6", "--out", out])), 0);
    }
    for name in ["cz.json", "translate.csv", "translate.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn failed_assertion_exits_1_and_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dunkl(&["cz-decompose", "--setup", &config("n1g05.cfg"), "--tol", "0.5", "--out", out]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("assertion failed: (i) sup|h| / lambda"), "{err}");
    // The report is still written.
    assert!(dir.path().join("cz.json").exists());
}

#[test]
fn hormander_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dunkl(&["hormander-check", "--setup", &config("n1g25.cfg"), "--samples", "3", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("hormander.json")).unwrap()).unwrap();
    let r = &v["report"];
    assert_eq!(r["pairs"].as_array().unwrap().len(), 3);
    assert_eq!(r["values"].as_array().unwrap().len(), 3);
    assert_eq!(r["tail_bounds"].as_array().unwrap().len(), 3);
    let sup = r["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).fold(0.0, f64::max);
    assert_eq!(r["sup"].as_f64().unwrap(), sup);
}

#[test]
fn poly_check_and_quick_selftest_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dunkl(&["poly-check", "--setup", &config("n2.cfg"), "--count", "10", "--out", out]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("poly-check PASS"));
    let o = dunkl(&["selftest", "--quick", "--criteria", "3,5,9", "--setup", &config("n1g05.cfg"), "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("criterion ")).count(), 3);
}

#[test]
fn lp_scan_summary_has_every_p() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dunkl(&["lp-scan", "--setup", &config("n1g05.cfg"), "--p", "1.5,2", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("lp_scan.json")).unwrap()).unwrap();
    let sup = v["report"]["sup_ratio_per_p"].as_object().unwrap();
    assert_eq!(sup.keys().collect::<Vec<_>>(), ["1.5", "2"]);
    let two = sup["2"].as_f64().unwrap();
    assert!(two > 0.5 && two <= 1.0 + 1e-6, "{two}");
}
