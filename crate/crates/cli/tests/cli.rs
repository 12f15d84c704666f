//! End-to-end checks of the batch front-end: schema rejection, output
//! shapes, and byte-identical reruns.

use std::path::Path;
use std::process::Command;

fn qplab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qplab"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const CF_CONFIG: &str = r#"
[frequency]
quotients = [1, 1, 1, 1, 1, 1, 1, 1, 1, 1]
"#;

#[test]
fn cf_task_writes_convergents_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, CF_CONFIG);
    let out = dir.path().join("out");
    let status = qplab()
        .args(["cf", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("cf.csv")).unwrap();
    // Fibonacci denominators
    assert!(csv.contains("config_sha256="));
    assert!(csv.lines().any(|l| l.starts_with("7,1,13,21,")));
    assert!(out.join("cf_summary.json").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "cf");
    assert!(manifest["metadata"]["generated_at"].is_number());
}

#[test]
fn unknown_keys_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        r#"
[frequency]
quotients = [1, 1, 1]
surprise = 7
"#,
    );
    let output = qplab()
        .args(["cf", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("schema") || err.contains("unknown field"), "stderr: {err}");
}

#[test]
fn acceleration_task_reports_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        r#"
[frequency]
quotients = [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]

[potential]
cosine = [0.0, 2.0]
eps0 = 0.05

[energy]
values = [0.1]

[params]
n = 1500
grid = 64
"#,
    );
    let out = dir.path().join("out");
    let status = qplab()
        .args(["acceleration", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("acceleration.json")).unwrap())
            .unwrap();
    assert_eq!(v["result"][0]["kappa_int"], 1);
    assert!(v["provenance"]["config_sha256"].is_string());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        r#"
[frequency]
quotients = [2, 1, 1, 4, 1, 1, 1, 1]

[potential]
cosine = [0.0, 1.3]

[energy]
grid = { lo = -0.5, hi = 0.5, count = 4 }

[params]
n = 400
grid = 64
"#,
    );
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let status = qplab()
            .args(["lyapunov", "--jobs", jobs, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("lyapunov.csv")).unwrap()
    };
    let a = run("out1", "1");
    let b = run("out2", "1");
    assert_eq!(a, b, "reruns must be byte-identical");
    // task-level parallelism must not change the bytes either
    let c = run("out3", "2");
    assert_eq!(a, c, "jobs > 1 changed the output bytes");
}

#[test]
fn zeros_task_counts_rational_structure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        r#"
[frequency]
quotients = [1, 1, 1, 1, 1, 1, 1, 1, 1, 1]

[potential]
cosine = [0.0, 2.0]

[energy]
harvest = { box_half_width = 200, window = [-0.5, 0.5] }

[params]
scale = 6
eps = 0.025
"#,
    );
    let out = dir.path().join("out");
    let status = qplab()
        .args(["zeros", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("zeros.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["structure"]["q"], 13);
    assert_eq!(v["result"]["structure"]["count"], 26);
    assert_eq!(v["result"]["count_over_2q"], 1.0);
}
