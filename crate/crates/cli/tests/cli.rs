//! End-to-end command-line behavior: config validation, exit codes, file
//! outputs and the trace round trip.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_kirchhoff-gp")
}

fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const FAST_CONFIG: &str = r#"
seed = 7

[load]
kind = "sinusoidal"

[training]
case = "L1"
snr = 10.0

[prediction]
points_per_side = 5
quantities = ["w"]
thinning = 20

[mcmc]
samples = 300
burn_in = 100
adapt_iterations = 200

[mle]
restarts = 1
max_iterations = 120
"#;

#[test]
fn unknown_config_key_is_an_error() {
    let dir = workdir("cli-badkey");
    let config = dir.join("bad.toml");
    std::fs::write(&config, "[load]\nkind = \"sinusoidal\"\nbogus_key = 1\n").unwrap();
    let output = Command::new(bin())
        .args(["generate", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("bogus_key"), "stderr: {stderr}");
}

#[test]
fn generate_writes_dataset() {
    let dir = workdir("cli-generate");
    let config = dir.join("cfg.toml");
    std::fs::write(&config, FAST_CONFIG).unwrap();
    let out = dir.join("out");
    let status = Command::new(bin())
        .args([
            "generate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("dataset.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,quantity,value,noise_class");
    // L1: 25 deflection + 25 load observations
    assert_eq!(lines.len(), 51);
}

#[test]
fn learn_then_predict_roundtrips_the_trace() {
    let dir = workdir("cli-roundtrip");
    let config = dir.join("cfg.toml");
    std::fs::write(&config, FAST_CONFIG).unwrap();
    let out = dir.join("out");
    let status = Command::new(bin())
        .args([
            "learn",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(
        matches!(status.code(), Some(0) | Some(2)),
        "unexpected exit {status:?}"
    );
    for file in ["dataset.csv", "trace.csv", "run_summary.txt", "diagnostics.txt"] {
        assert!(out.join(file).exists(), "missing {file}");
    }
    let trace_lines = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace_lines.lines().count(), 301, "header plus retained draws");

    let pred_out = dir.join("pred");
    let status = Command::new(bin())
        .args([
            "predict",
            "--config",
            config.to_str().unwrap(),
            "--trace",
            out.join("trace.csv").to_str().unwrap(),
            "--out",
            pred_out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let field = std::fs::read_to_string(pred_out.join("field_w.csv")).unwrap();
    assert_eq!(field.lines().count(), 26, "header plus 5x5 grid");
    assert_eq!(
        field.lines().next().unwrap(),
        "x,y,quantity,mean,variance,q005,q995"
    );
    assert!(pred_out.join("field_truth_w.csv").exists());
    assert!(pred_out.join("field_normalized_w.csv").exists());
    assert!(pred_out.join("line_mid_w.csv").exists());
    assert!(pred_out.join("line_edge_w.csv").exists());
}

#[test]
fn flagged_nonconvergence_exits_with_category_code() {
    let dir = workdir("cli-flagged");
    let config = dir.join("cfg.toml");
    // a one-iteration optimizer budget cannot converge
    std::fs::write(
        &config,
        FAST_CONFIG.replace("max_iterations = 120", "max_iterations = 1"),
    )
    .unwrap();
    let out = dir.join("out");
    let output = Command::new(bin())
        .args([
            "learn",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("flagged"), "stdout: {stdout}");
}

#[test]
fn missing_config_file_is_an_error() {
    let output = Command::new(bin())
        .args(["learn", "--config", "/nonexistent/nowhere.toml"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
