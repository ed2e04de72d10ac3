//! End-to-end tests of the `freeferm` binary: exit codes, file
//! layout, flag/config merging, and determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeferm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

/// First stdout line of a successful run is the run directory.
fn run_dir(out: &Output) -> PathBuf {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    PathBuf::from(stdout.lines().next().expect("run dir line"))
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_64() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["definitely-not-a-command"], tmp.path());
    assert_eq!(out.status.code(), Some(64));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage:"), "stderr: {stderr}");
}

#[test]
fn help_and_version_exit_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(run(&["--version"], tmp.path()).status.code(), Some(0));
    assert_eq!(run(&["w1-global", "--help"], tmp.path()).status.code(), Some(0));
}

#[test]
fn missing_required_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["w1-global", "--la", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("LB_list"));
}

#[test]
fn config_and_manifest_flags_conflict() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &["w1-global", "--config", "a.toml", "--manifest", "b.json"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn subcommand_must_match_config_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "experiment = \"diffusion\"\n").unwrap();
    let out = run(&["w1-global", "--config", "c.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ghe_cdf_dump_is_monotone_zero_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &["ghe-cdf", "--la", "4", "--grid", "1001", "--out-dir", "runs"],
        tmp.path(),
    );
    let dir = tmp.path().join(run_dir(&out));
    let csv = fs::read_to_string(dir.join("data.csv")).unwrap();
    let cdf: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(cdf.len(), 1001);
    assert!(cdf[0].abs() < 1e-12 && (cdf[1000] - 1.0).abs() < 1e-12);
    assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
    assert!(dir.join("manifest.json").exists());
}

#[test]
fn diffusion_profile_rows_are_normalized() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &["diffusion", "--L", "64", "--t", "200", "--instances", "5", "--out-dir", "runs"],
        tmp.path(),
    );
    let dir = tmp.path().join(run_dir(&out));
    let csv = fs::read_to_string(dir.join("data.csv")).unwrap();
    let mut sum = 0.0f64;
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[0] == "px" && f[1] == "200" {
            sum += f[3].parse::<f64>().unwrap();
        }
    }
    assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
}

#[test]
fn same_seed_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "w1-global", "--la", "2", "--lb", "4,8", "--shots", "100", "--instances", "3",
        "--seed", "7", "--out-dir", "runs",
    ];
    let first = run_dir(&run(&args, tmp.path()));
    let second = run_dir(&run(&args, tmp.path()));
    assert_ne!(first, second, "each run gets its own directory");
    let a = fs::read(tmp.path().join(first).join("data.csv")).unwrap();
    let b = fs::read(tmp.path().join(second).join("data.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn flags_override_config_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "experiment = \"diffusion\"\nL = 8\nt_list = [2]\nN = 2\nseed = 1\nout_dir = \"runs\"\n",
    )
    .unwrap();
    let out = run(&["diffusion", "--config", "c.toml", "--seed", "9"], tmp.path());
    let dir = tmp.path().join(run_dir(&out));
    let manifest = fs::read_to_string(dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 9"), "flag seed wins: {manifest}");
    assert!(manifest.contains("\"L\": 8"));
}
