//! End-to-end CLI checks: exit-code contract, deterministic outputs, config
//! errors with key paths.

use std::path::Path;
use std::process::Command;

fn gsf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gsf"))
}

#[test]
fn classify_reports_and_exits_zero() {
    let out = gsf()
        .args(["classify", "drho^2 + drho"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Infinitesimal"));
    assert!(text.contains("order"));
}

#[test]
fn classify_parse_error_exits_two() {
    let out = gsf().args(["classify", "drho^2 +"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("position"));
}

#[test]
fn classify_gauge_dependence() {
    let out = gsf()
        .args(["classify", "exp(1/eps)", "--gauge", "identity"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("non_moderate_suspected : true"));
    let out = gsf()
        .args(["classify", "exp(1/eps)", "--gauge", "exp_inv"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("Infinite"));
}

#[test]
fn unknown_scenario_exits_two() {
    let out = gsf().args(["simulate", "warp_drive"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_two() {
    let out = gsf().args(["verify", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_ring_is_seed_deterministic() {
    let run = |seed: &str| {
        let out = gsf().args(["verify", "ring", "--seed", seed]).output().unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("7"), run("7"));
}

#[test]
fn config_error_names_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[scenario.pendulum]\nl1 = not_a_number\n").unwrap();
    let out = gsf()
        .args(["simulate", "pendulum", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("scenario.pendulum.l1"), "got: {err}");
}

#[test]
fn simulate_writes_deterministic_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    let run = |out: &Path| {
        let st = gsf()
            .args(["simulate", "snell", "--grid-n", "12"])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(st.success());
    };
    run(&out1);
    run(&out2);
    for name in ["snell_path.csv", "snell_events.csv", "report.txt"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} must be byte-identical");
    }
    let head = std::fs::read_to_string(out1.join("snell_path.csv")).unwrap();
    assert!(head.starts_with("epsilon,t,y1,y2,y3,y4,dy1,dy2,dy3,dy4\n"));
}

#[test]
fn embed_export_mollifier() {
    let dir = tempfile::tempdir().unwrap();
    let st = gsf()
        .args(["embed-export", "mollifier", "--samples", "21"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(dir.path().join("mollifier.csv")).unwrap();
    assert!(text.starts_with("x,mu,mu_prime\n"));
    assert_eq!(text.lines().count(), 22);
}
