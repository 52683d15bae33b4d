use std::path::Path;
use std::process::{Command, Output};

use moyal_lab::{recipes_dir, ExperimentConfig};

fn moyal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moyal")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

fn shear() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&recipes_dir().join("free-shear.json")).unwrap();
    cfg.time.t_final = 0.2;
    cfg
}

#[test]
fn validate_accepts_every_recipe() {
    for e in std::fs::read_dir(recipes_dir()).unwrap() {
        let path = e.unwrap().path();
        let out = moyal(&["validate", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = shear();
    cfg.time.dt = -1.0;
    let path = write_config(dir.path(), &cfg);
    let out = moyal(&["simulate", &path]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("time.dt"));

    std::fs::write(dir.path().join("junk.json"), "{ not json").unwrap();
    let out = moyal(&["validate", dir.path().join("junk.json").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &shear());
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"").unwrap();
    let out = moyal(&["simulate", &path, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_writes_the_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &shear());
    let run = dir.path().join("run");
    let out = moyal(&["simulate", &path, "--out", run.to_str().unwrap(), "--snapshots", "on"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["config.json", "diagnostics.ndjson", "report.json", "snapshots/quantum-00000020.bin"] {
        assert!(run.join(f).is_file(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["format_version"], 1);
}

#[test]
fn lyapunov_reports_the_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = shear();
    cfg.system.potential = vec![0.0, 0.0, -0.5];
    cfg.lyapunov = Some(serde_json::from_value(serde_json::json!({ "dt": 0.001, "n_steps": 10000, "renorm_every": 10, "tangent": [1.0, 1.0] })).unwrap());
    cfg.initial_state = serde_json::from_value(serde_json::json!({ "kind": "coherent", "x0": 0.0, "p0": 0.0 })).unwrap();
    let path = write_config(dir.path(), &cfg);
    let out = moyal(&["lyapunov", &path, "--out", dir.path().join("l").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("lyapunov exponent: 1.0000"), "{stdout}");
}
