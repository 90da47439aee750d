//! CLI-level behavior: registry listing, error paths, config handling and
//! exit-status semantics.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_thinshell")
}

#[test]
fn list_prints_registry() {
    let out = Command::new(bin()).arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["grunbaum", "zk-identity", "thin-shell", "deviation-fit", "stirling-bound"] {
        assert!(text.contains(key), "registry listing is missing `{key}`");
    }
}

#[test]
fn unknown_experiment_is_an_error() {
    let out = Command::new(bin())
        .args(["run", "no-such-thing", "--seed", "1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown experiment"), "stderr: {err}");
}

#[test]
fn seed_is_required_without_config() {
    let out = Command::new(bin()).args(["run", "grunbaum"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("seed"), "stderr: {err}");
}

#[test]
fn config_file_round_trip_and_mismatch() {
    let dir = std::env::temp_dir().join(format!("ts-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("exp.ini");
    std::fs::write(
        &cfg_path,
        "[experiment]\nid = gamma-decr\nseed = 5\n",
    )
    .unwrap();
    let out = Command::new(bin())
        .args([
            "run",
            "gamma-decr",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("out/gamma-decr.jsonl").exists());
    assert!(dir.join("out/summary.txt").exists());
    // config naming a different experiment than requested is rejected
    let out = Command::new(bin())
        .args(["run", "grunbaum", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn overlays_add_reference_columns() {
    let dir = std::env::temp_dir().join(format!("ts-cli-ov-{}", std::process::id()));
    let out = Command::new(bin())
        .args([
            "run",
            "deviation-fit",
            "--seed",
            "3",
            "--out",
            dir.to_str().unwrap(),
            "--overlays",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("deviation-fit.tail_gaussian.csv")).unwrap();
    for col in ["paouris_form", "klartag_form", "fleury_upper_form", "fleury_lower_form"] {
        assert!(csv.contains(col), "missing overlay column {col}");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn duplicate_key_error_reaches_the_user() {
    let dir = std::env::temp_dir().join(format!("ts-cli-dup-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("dup.ini");
    std::fs::write(&cfg_path, "[experiment]\nid = grunbaum\nseed = 1\nseed = 2\n").unwrap();
    let out = Command::new(bin())
        .args(["run", "grunbaum", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("duplicate key"), "stderr: {err}");
    std::fs::remove_dir_all(&dir).ok();
}
