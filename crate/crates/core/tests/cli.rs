use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn leglab(out: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_leglab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("LEGLAB_THREADS", "2")
        .status()
        .unwrap()
        .code()
        .unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn num(r: &Value, key: &str) -> f64 {
    r[key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn verify_flat_torus() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(leglab(dir.path(), &["verify", "--surface", "legendrian-torus", "--theta", "0", "--grid", "32"]), 0);
    let r = report(dir.path());
    assert!(num(&r, "S_max_dev") <= 1e-9);
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn verify_clifford_is_not_legendrian() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(leglab(dir.path(), &["verify", "--surface", "clifford-s3"]), 0);
    assert_eq!(report(dir.path())["legendrian"], Value::Bool(false));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify", "--grid", "7"][..],
        &["verify", "--surface", "klein-bottle"],
        &["flow", "--scheme", "fd6"],
        &["flow", "--tau0=-1"],
        &["integrals", "--bogus"],
    ] {
        assert_eq!(leglab(dir.path(), args), 2, "{args:?}");
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = Command::new(env!("CARGO_BIN_EXE_leglab"))
        .args(["verify", "--out"])
        .arg(dir.path())
        .env("LEGLAB_THREADS", "many")
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));
}

#[test]
fn integrals_on_catalog() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(leglab(dir.path(), &["integrals", "--surface", "legendrian-torus"]), 0);
    let r = report(dir.path());
    assert!(num(&r, "I1").abs() <= 1e-8 && num(&r, "Sigma_Simons").abs() <= 1e-8);

    assert_eq!(leglab(dir.path(), &["integrals", "--surface", "legendrian-torus", "--epsilon", "0.02"]), 0);
    assert!(num(&report(dir.path()), "I1").is_finite());

    assert_eq!(leglab(dir.path(), &["integrals", "--surface", "clifford-s3"]), 0);
    assert!(num(&report(dir.path()), "I3").abs() <= 1e-8);
}

#[test]
fn flow_converges_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(leglab(dir.path(), &["flow", "--epsilon", "0.02", "--grid", "32", "--tol", "1e-4"]), 0);
    let csv = std::fs::read_to_string(dir.path().join("flow.csv")).unwrap();
    assert!(csv.starts_with("step,tau,area,div_JH_l2,legendrian_residual,el_residual_sup\n"));
    assert!(csv.lines().count() > 2);
}

#[test]
fn stationary_flow_stops_at_step_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(leglab(dir.path(), &["flow", "--epsilon", "0"]), 0);
    assert_eq!(num(&report(dir.path()), "flow.steps"), 0.0);
}

#[test]
fn unfinished_flow_exits_one_and_keeps_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(leglab(dir.path(), &["flow", "--epsilon", "0.02", "--grid", "16", "--max-steps", "1"]), 1);
    let csv = std::fs::read_to_string(dir.path().join("flow.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["flow", "--epsilon", "0.02", "--grid", "16", "--seed", "1"];
    assert_eq!(leglab(a.path(), &args), leglab(b.path(), &args));
    let read = |d: &Path| std::fs::read(d.join("report.json")).unwrap();
    // the echoed output directory differs; everything else must match
    let strip = |bytes: Vec<u8>| {
        let mut v: Value = serde_json::from_slice(&bytes).unwrap();
        v.as_object_mut().unwrap().remove("config.out");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(read(a.path())), strip(read(b.path())));
    assert_eq!(
        std::fs::read(a.path().join("flow.csv")).unwrap(),
        std::fs::read(b.path().join("flow.csv")).unwrap()
    );
}
