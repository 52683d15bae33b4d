use std::collections::BTreeSet;
use std::path::Path;

use moyal_lab::config::SweepParameter;
use moyal_lab::output::read_snapshot;
use moyal_lab::{recipes_dir, run_experiment, run_sweep, EngineKind, ExperimentConfig, LabError, RunOptions};

fn recipe(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&recipes_dir().join(format!("{name}.json"))).unwrap()
}

/// Small, fast variant of the shear recipe.
fn small_shear() -> ExperimentConfig {
    let mut cfg = recipe("free-shear");
    cfg.time.t_final = 1.0;
    cfg
}

fn files_under(dir: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out
}

#[test]
fn every_recipe_validates() {
    for name in ["quadratic-equivalence", "free-shear", "quartic-oracle", "chaotic-break-time", "decoherence-restoration"] {
        let cfg = recipe(name);
        moyal_lab::validate(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(cfg.name, name);
    }
}

#[test]
fn config_round_trips_through_json() {
    let cfg = recipe("chaotic-break-time");
    let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn unknown_keys_are_rejected() {
    let mut value: serde_json::Value = serde_json::from_str(&recipe("free-shear").to_json()).unwrap();
    value["grid"]["n_z"] = 3.into();
    let err = ExperimentConfig::from_json(&value.to_string()).unwrap_err();
    assert!(matches!(err, LabError::Validation { .. }), "{err}");
    assert!(err.to_string().contains("n_z"), "{err}");
}

#[test]
fn coarse_quantum_grid_names_the_resolvability_rule() {
    let mut cfg = small_shear();
    cfg.grid.n_x = 8;
    cfg.grid.n_p = 8;
    let err = moyal_lab::validate(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("resolvability"), "{err}");

    // The classical engine alone has no such rule.
    cfg.engines = vec![EngineKind::Classical];
    cfg.diagnostics.retain(|d| !d.needs_classical());
    moyal_lab::validate(&cfg).unwrap();
}

#[test]
fn free_shear_moments_follow_the_straight_line_flow() {
    // ⟨x⟩ = x0 + p0·t and var_x = σx² + σp²t² for free motion with m = 1;
    // momentum is untouched.
    let cfg = recipe("free-shear");
    let r = run_experiment(&cfg, &RunOptions::default()).unwrap();
    for engine in ["classical", "quantum"] {
        let mean = r.series(engine, "mean_x").unwrap();
        let var = r.series(engine, "var_x").unwrap();
        let var_p = r.series(engine, "var_p").unwrap();
        for ((&t, &m), (&v, &vp)) in mean.times().iter().zip(mean.values()).zip(var.values().iter().zip(var_p.values())) {
            assert!((m - (-2.0 + t)).abs() < 1e-6, "{engine} t={t}: {m}");
            assert!((v - (0.25 + 0.25 * t * t)).abs() < 1e-6, "{engine} t={t}: {v}");
            assert!((vp - 0.25).abs() < 1e-6, "{engine} t={t}: {vp}");
        }
    }
    let l2 = r.series("quantum", "l2_to_classical").unwrap();
    assert!(l2.values().iter().all(|&v| v < 1e-12));
}

#[test]
fn run_writes_only_the_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_shear();
    cfg.time.snapshot_stride = Some(50);
    let out = dir.path().join("run");
    run_experiment(
        &cfg,
        &RunOptions {
            out_dir: Some(out.clone()),
            snapshots: true,
        },
    )
    .unwrap();
    let mut expected: BTreeSet<String> = ["config.json", "diagnostics.ndjson", "report.json"].map(String::from).into();
    for engine in ["classical", "quantum"] {
        for step in [0, 50, 100] {
            for ext in ["bin", "json"] {
                expected.insert(format!("snapshots/{engine}-{step:08}.{ext}"));
            }
        }
    }
    assert_eq!(files_under(&out), expected);

    // The resolved config records where it was written.
    let replay = ExperimentConfig::load(&out.join("config.json")).unwrap();
    assert_eq!(replay.output_dir.as_deref(), Some(out.as_path()));
    assert_eq!(ExperimentConfig { output_dir: None, ..replay }, cfg);
}

#[test]
fn snapshot_reads_back_and_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_shear();
    let r = run_experiment(
        &cfg,
        &RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            snapshots: true,
        },
    )
    .unwrap();
    let bin = dir.path().join("snapshots/quantum-00000100.bin");
    let (header, values) = read_snapshot(&bin).unwrap();
    assert_eq!((header.n_x, header.n_p, header.step), (256, 128, 100));
    assert!((header.time - 1.0).abs() < 1e-12);
    assert_eq!(header.layout, "x-major");
    assert_eq!(values, r.final_field(EngineKind::Quantum).unwrap().values());

    let mut bytes = std::fs::read(&bin).unwrap();
    bytes[17] ^= 1;
    std::fs::write(&bin, bytes).unwrap();
    let err = read_snapshot(&bin).unwrap_err();
    assert!(err.to_string().contains("checksum"), "{err}");
}

#[test]
fn ndjson_lines_are_ordered_records() {
    let r = run_experiment(&small_shear(), &RunOptions::default()).unwrap();
    let text = r.to_ndjson();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    // 11 samples; the classical engine has no distance to itself.
    assert_eq!(lines.len(), 11 * (5 + 4));
    let times: Vec<f64> = lines.iter().map(|l| l["t"].as_f64().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
    for l in &lines {
        let keys: Vec<&str> = l.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 4);
        for k in ["t", "engine", "diagnostic", "value"] {
            assert!(keys.contains(&k));
        }
    }
}

#[test]
fn sweep_runs_one_member_per_value_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_shear();
    cfg.time.t_final = 0.5;
    cfg.sweep = Some(serde_json::from_value(serde_json::json!({ "parameter": "mass", "values": [1.0, 2.0, 4.0] })).unwrap());
    let one = run_sweep(&cfg, 1, Some(dir.path().join("a")), false).unwrap();
    let three = run_sweep(&cfg, 3, Some(dir.path().join("b")), false).unwrap();
    assert_eq!(one.parameter, SweepParameter::Mass);
    assert_eq!(one.runs.len(), 3);
    assert_eq!(one.aggregate, three.aggregate);
    for (row, m) in one.aggregate.iter().zip([1.0, 2.0, 4.0]) {
        assert_eq!(row.status, "ok");
        // ⟨x⟩ moves at p0/m.
        let x = row.final_values["classical/mean_x"];
        assert!((x - (-2.0 + 0.5 / m)).abs() < 1e-6, "m={m}: {x}");
    }
    for (i, r) in one.runs.iter().enumerate() {
        let r = r.as_ref().unwrap();
        let a = std::fs::read(dir.path().join(format!("a/run-{i:03}/diagnostics.ndjson"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b/run-{i:03}/diagnostics.ndjson"))).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, r.to_ndjson().into_bytes());
    }
    let agg: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a/aggregate.json")).unwrap()).unwrap();
    assert_eq!(agg["parameter"], "mass");
    assert_eq!(agg["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn empty_sweep_is_a_validation_error() {
    let mut cfg = small_shear();
    cfg.sweep = Some(serde_json::from_value(serde_json::json!({ "parameter": "hbar", "values": [] })).unwrap());
    let err = run_sweep(&cfg, 1, None, false).unwrap_err();
    assert!(err.to_string().contains("sweep.values"), "{err}");
}

#[test]
fn invalid_sweep_member_stops_before_any_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_shear();
    cfg.sweep = Some(serde_json::from_value(serde_json::json!({ "parameter": "hbar", "values": [1.0, -1.0] })).unwrap());
    let err = run_sweep(&cfg, 2, Some(dir.path().join("s")), false).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(!dir.path().join("s").exists());
}
