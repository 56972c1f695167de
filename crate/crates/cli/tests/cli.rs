use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_beamassoc"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn usage_errors_exit_with_two() {
    let cfg = config("default.toml");
    let cfg = cfg.to_str().unwrap();
    let cases: [&[&str]; 5] = [
        &["coverage", "/no/such/file.toml", "--drops", "10"],
        &["coverage", cfg, "--drops", "10", "--t-grid-db", "10,5,0"],
        &["sweep", cfg, "--param", "nonsense", "--values", "1,2"],
        &["sweep", cfg, "--param", "cell_radius", "--values", ""],
        &["coverage", cfg, "--set", "cell_radius=-5", "--drops", "10"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn coverage_table_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cov.csv");
    let out = run(&[
        "coverage",
        config("default.toml").to_str().unwrap(),
        "--drops",
        "300",
        "--t-grid-db",
        "-10:10:30",
        "--no-timestamp",
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_db,p_c_sim,p_c_thm1_ub,p_c_thm2_lb,p_c_near_orth"));
    assert_eq!(lines.count(), 5);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cov.json")).unwrap()).unwrap();
    assert_eq!(json["command"], "coverage");
    assert_eq!(json["n_drops"], 300);
    assert!(json["fingerprint"].as_str().unwrap().len() == 64);
    assert!(json.get("generated_unix").is_none());
}

#[test]
fn sweeps_are_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("default.toml");
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let out = run(&[
            "sweep",
            cfg.to_str().unwrap(),
            "--param",
            "cell_radius",
            "--values",
            "30,60",
            "--modes",
            "perfect,full-reuse",
            "--drops",
            "200",
            "--no-timestamp",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files.pop().unwrap()).unwrap();
    assert!(text.starts_with("param,value,mode,"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn validate_passes_on_defaults_and_catches_a_small_window() {
    let cfg = config("default.toml");
    let out = run(&["validate", cfg.to_str().unwrap(), "--quick"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 8);

    let out = run(&[
        "validate",
        cfg.to_str().unwrap(),
        "--quick",
        "--set",
        "sim_window_radius=100",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
