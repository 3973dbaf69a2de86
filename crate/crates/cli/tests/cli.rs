//! Exit-code contract and output-format checks, driving the real binary.

use std::path::Path;
use std::process::Command;

fn mstab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mstab"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const SYNTH_SMALL: &str = r#"{
  "command": "synth",
  "process": {
    "kernel": "levy_compact",
    "t_max": 1.0,
    "alpha": { "variant": "linear", "from": 1.02, "to": 1.98, "over": [0.0, 1.0] },
    "b": { "variant": "constant", "value": 1.0 }
  },
  "grid": { "start": 0.0, "end": 1.0, "points": 50 },
  "mc": { "n_paths": 1, "n_terms": 500 },
  "seed": 42,
  "output": { "csv": "path.csv", "svg": "path.svg" }
}"#;

#[test]
fn synth_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    write(&cfg, SYNTH_SMALL);
    let st = mstab()
        .args(["synth", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());

    let csv = std::fs::read_to_string(dir.path().join("path.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,value"));
    assert_eq!(lines.count(), 50);

    let svg = std::fs::read_to_string(dir.path().join("path.svg")).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<polyline").count(), 1);
    let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
    assert_eq!(pts.split_whitespace().count(), 50);
}

#[test]
fn rerun_is_byte_identical_and_seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    write(&cfg, SYNTH_SMALL);
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    let out3 = dir.path().join("c");
    for out in [&out1, &out2] {
        assert!(mstab()
            .args(["synth", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
            .success());
    }
    assert!(mstab()
        .args(["synth", "--config"])
        .arg(&cfg)
        .args(["--seed", "43", "--out"])
        .arg(&out3)
        .status()
        .unwrap()
        .success());
    let a = std::fs::read(out1.join("path.csv")).unwrap();
    let b = std::fs::read(out2.join("path.csv")).unwrap();
    let c = std::fs::read(out3.join("path.csv")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn draw_dump_has_stable_field_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    write(
        &cfg,
        &SYNTH_SMALL.replace(
            r#""csv": "path.csv", "svg": "path.svg""#,
            r#""csv": "path.csv", "draw_json": "draw.json""#,
        ),
    );
    assert!(mstab()
        .args(["synth", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap()
        .success());
    let dump: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("draw.json")).unwrap())
            .unwrap();
    for key in ["gammas", "points", "signs", "seed"] {
        assert!(dump.get(key).is_some(), "missing {key}");
    }
    assert_eq!(dump["gammas"].as_array().unwrap().len(), 500);
}

#[test]
fn inadmissible_alpha_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    write(
        &cfg,
        &SYNTH_SMALL.replace(r#""from": 1.02, "to": 1.98"#, r#""from": 0.70, "to": 1.98"#),
    );
    let st = mstab().args(["synth", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn unknown_kernel_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    write(&cfg, &SYNTH_SMALL.replace("levy_compact", "levy_flight"));
    let st = mstab().args(["synth", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn command_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    write(&cfg, SYNTH_SMALL);
    let st = mstab().args(["audit", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn strict_band_with_tiny_sample_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    write(
        &cfg,
        r#"{
  "command": "verify-stable",
  "process": {
    "kernel": "levy_compact",
    "t_max": 1.0,
    "alpha": { "variant": "constant", "value": 1.5 },
    "b": { "variant": "constant", "value": 1.0 }
  },
  "mc": { "n_paths": 50, "n_terms": 200 },
  "seed": 3,
  "verify_stable": { "t": 1.0, "band": 0.001, "oracle_n": 2000 }
}"#,
    );
    let st = mstab().args(["verify-stable", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn verify_cf_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    write(
        &cfg,
        r#"{
  "command": "verify-cf",
  "process": {
    "kernel": "levy_compact",
    "t_max": 1.0,
    "alpha": { "variant": "constant", "value": 1.3 },
    "b": { "variant": "constant", "value": 1.0 }
  },
  "mc": { "n_paths": 2000, "n_terms": 2000 },
  "seed": 5,
  "output": { "json": "report.json" },
  "verify_cf": { "t": 1.0, "thetas": [0.5, 1.0] }
}"#,
    );
    let st = mstab()
        .args(["verify-cf", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert!(report["cf"][0]["cf_value"].is_f64());
    assert!(report["cf"][0]["cf_error_bound"].is_f64());
}
