//! End-to-end CLI checks: artifact round-trips, byte-level determinism, and
//! detection of deliberately corrupted artifacts.

use std::path::{Path, PathBuf};
use std::process::Command;

fn robinson() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robinson"))
}

fn assets_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/assets")
}

fn write_config(dir: &Path, schedule: &str) -> PathBuf {
    let sub = assets_dir().join("thue_morse.json");
    let config = format!(
        r#"{{
  "substitution": "{}",
  "label": "a",
  "level": 6,
  "seed": 11,
  "schedule": {{"mode": "custom", "sides": [{schedule}]}},
  "rule": {{"kind": "pattern", "marker_level": 1}},
  "out_dir": "out"
}}
"#,
        sub.display()
    );
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    path
}

#[test]
fn run_produces_artifacts_and_passes_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "3");
    let status = robinson()
        .args(["run", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert!(status.success());
    for f in [
        "window.json",
        "hierarchy.json",
        "boundary.json",
        "diagram.json",
        "verification.json",
        "config.json",
        "frequencies.json",
    ] {
        assert!(tmp.path().join("out").join(f).exists(), "missing {f}");
    }
    // Verify again, standalone, against the artifacts.
    let status = robinson()
        .args(["verify", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn identical_configs_produce_byte_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "3, 12");
    for out in ["a", "b"] {
        let status = robinson()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(tmp.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    for f in [
        "window.json",
        "hierarchy.json",
        "boundary.json",
        "diagram.json",
        "frequencies.json",
    ] {
        let a = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "artifact {f} differs between identical runs");
    }
    // SVG determinism.
    for out in ["a", "b"] {
        let status = robinson()
            .args(["render", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(tmp.path().join(out))
            .args(["--layers", "squares,arms,crosses,decorations,supertiles"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(tmp.path().join("a/render.svg")).unwrap();
    let b = std::fs::read(tmp.path().join("b/render.svg")).unwrap();
    assert_eq!(a, b, "SVG differs between identical runs");
}

#[test]
fn decreasing_schedule_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "12, 3");
    let status = robinson()
        .args(["run", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn window_exhausting_schedule_reports_partially() {
    // A 64x64 window exhausts at side 48; the run still writes artifacts and
    // the report names the exhausted level.
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "3, 48");
    let out = robinson()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("window exhausted at level 2"),
        "missing exhaustion note in: {stdout}"
    );
    let hier: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/hierarchy.json")).unwrap())
            .unwrap();
    assert_eq!(hier["exhausted"]["level"], 2);
    assert_eq!(hier["levels"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_detects_reassigned_supertile_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "3");
    assert!(robinson()
        .args(["run", "--config"])
        .arg(&config)
        .status()
        .unwrap()
        .success());
    // Move one cell id from the first supertile to the second.
    let path = tmp.path().join("out/hierarchy.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let tiles = v["levels"][0]["supertiles"].as_array_mut().unwrap();
    let moved = tiles[0]["children"].as_array_mut().unwrap().pop().unwrap();
    tiles[1]["children"].as_array_mut().unwrap().push(moved);
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();

    let out = robinson()
        .args(["verify", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "verify must fail");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("FAIL") && stdout.contains("supertile"),
        "missing partition failure in: {stdout}"
    );
}

#[test]
fn verify_detects_widened_arm() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "3");
    assert!(robinson()
        .args(["run", "--config"])
        .arg(&config)
        .status()
        .unwrap()
        .success());
    let path = tmp.path().join("out/hierarchy.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    // Find a trusted horizontal arm and widen it beyond N.
    let arms = v["levels"][0]["decomposition"]["arms"].as_array_mut().unwrap();
    let arm = arms
        .iter_mut()
        .find(|a| a["trusted"] == true && a["orientation"] == "Horizontal")
        .expect("trusted horizontal arm");
    let x0 = arm["rect"]["x0"].as_i64().unwrap();
    arm["rect"]["x1"] = serde_json::Value::from(x0 + 4); // width 4 > N = 3
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();

    let out = robinson()
        .args(["verify", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "verify must fail");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("FAIL") && stdout.contains("arm"),
        "missing arm-bound failure in: {stdout}"
    );
}

#[test]
fn cell_budget_env_var_caps_expansion() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "3");
    let out = robinson()
        .args(["generate", "--config"])
        .arg(&config)
        .env("TIL_CELL_BUDGET", "1000")
        .output()
        .unwrap();
    // Level 6 needs 4096 cells > 1000.
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cell budget"), "stderr: {stderr}");
}

#[test]
fn decompose_writes_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "3");
    assert!(robinson()
        .args(["decompose", "--config"])
        .arg(&config)
        .status()
        .unwrap()
        .success());
    let dec: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("out/decomposition.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(dec["n"], 3);
    assert!(dec["squares"].as_array().unwrap().len() > 10);
}

#[test]
fn empty_boundary_layer_draws_no_strokes() {
    // A scene with the boundary layer requested but an empty graph: no
    // black boundary lines appear.
    use robinson_core::boundary::{BoundaryGraph, EdgeSet, GraphLevel};
    use robinson_core::geom::Rect;
    let b = Rect::new(0, 0, 8, 8);
    let g = BoundaryGraph {
        level: GraphLevel::Persistent,
        edges: EdgeSet::empty(b),
        trusted: b,
    };
    assert_eq!(g.edges.count(), 0);
    assert_eq!(g.edges.edges().len(), 0);
}
