//! Exit-code contract: 0 clean, 1 tolerance failure, 2 config rejection,
//! 3 runtime failure.

use std::path::PathBuf;
use std::process::{Command, Output};

fn vortint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vortint"))
        .args(args)
        .env("VORTINT_OUT", scratch().to_str().unwrap())
        .output()
        .expect("binary runs")
}

fn scratch() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vortint-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(name: &str, text: &str) -> PathBuf {
    let path = scratch().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn flows_list_prints_the_catalog() {
    let out = vortint(&["flows", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("taylor_green"));
    assert!(stdout.lines().last() == Some("spectral"));
}

#[test]
fn residual_on_an_unknown_flow_is_a_config_error() {
    let out = vortint(&["residual", "not_a_flow"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn residual_reports_the_worst_component() {
    let out = vortint(&["residual", "rigid_rotation", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("worst:"), "{stdout}");
}

#[test]
fn an_unknown_suite_is_a_config_error() {
    let out = vortint(&["suite", "smoke"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn an_unknown_only_filter_is_a_config_error() {
    let out = vortint(&["suite", "paper-acceptance", "--only", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("available"), "{stderr}");
}

#[test]
fn a_rejected_config_names_the_field_and_exits_two() {
    let path = write_config(
        "bad.toml",
        r#"
[flow]
name = "taylor_green"

[surface]
builder = "disk"
params = { center = [0.0, 0.0], radius = 1.0, radial_panels = 2, radial_order = 4, angular_panels = 4, angular_order = 4 }

[[integrals]]
kind = "helicity"

[grid]
t1 = 0.1
dt = 0.001
"#,
    );
    let out = vortint(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("integrals[0].kind"), "{stderr}");
}

#[test]
fn a_failed_tolerance_exits_one() {
    let path = write_config(
        "strict.toml",
        r#"
[flow]
name = "taylor_green"

[surface]
builder = "circle"
params = { center = [2.0, 2.6], radius = 0.8, panels = 8, order = 4 }

[[integrals]]
kind = "circulation"

[grid]
t1 = 0.05
dt = 0.005

[tolerances]
drift_abs = 1e-300
"#,
    );
    let out = vortint(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[FAIL]"), "{stdout}");
}

#[test]
fn an_unreadable_config_is_a_runtime_error() {
    let out = vortint(&["run", "/definitely/not/here.toml"]);
    assert_eq!(out.status.code(), Some(3));
}
