use std::path::Path;
use std::process::{Command, Output};

fn noma_cov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-cov"))
        .args(args)
        .env_remove("NOMA_COV_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: [&str; 8] = [
    "--set",
    "sweep.t_db_min=-5",
    "--set",
    "sweep.t_db_max=5",
    "--set",
    "sweep.t_db_step=5",
    "--set",
    "mc.trials=500",
];

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("model.alpha = 2\n", "model.alpha"),
        ("sweep.t_db_step = 0\n", "sweep.t_db_step"),
        ("model.colour = red\n", "model.colour"),
        ("mc.trials = many\n", "mc.trials"),
    ] {
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, text).unwrap();
        let out = noma_cov(&["sweep", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(key), "{text}: {}", stderr(&out));
    }
    let out = noma_cov(&["sweep", "--config", "/nonexistent/noma.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_config_uses_reference_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    std::fs::write(&cfg, "# nothing here\n").unwrap();
    let out = noma_cov(&["analytic", "--config", cfg.to_str().unwrap(), "--set", "model.kind=mcp"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# schema:"));
    assert_eq!(
        lines.next().unwrap(),
        "model,scheme,role,t_db,t_linear,coverage,ci_halfwidth,trials,seed,engine,laplace_variant,wall_ms"
    );
    // 31 thresholds x 3 schemes x 2 roles, analytic only.
    assert_eq!(lines.count(), 31 * 6);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3", "1"].iter().enumerate() {
        let path = dir.path().join(format!("run{i}.csv"));
        let mut args = vec!["--threads", threads, "sweep", "--output", path.to_str().unwrap()];
        args.extend(SMALL);
        let out = noma_cov(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(!text.contains('\r'));
    // 2 models x 3 thresholds x 6 cells x 2 engines
    assert_eq!(text.lines().count(), 2 + 2 * 3 * 6 * 2);
}

#[test]
fn output_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--output", "ignored/dir/cov.csv"];
    args.extend(SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_noma-cov"))
        .args(&args)
        .env("NOMA_COV_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("cov.csv").exists());
    assert!(!Path::new("ignored/dir/cov.csv").exists());
}

#[test]
fn validate_exit_status_follows_checks() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let ok = noma_cov(&["validate", "--only", "2", "--report-csv", report.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(std::fs::read_to_string(&report).unwrap().starts_with("criterion,check,passed"));

    let inverted = noma_cov(&["validate", "--only", "2", "--invert-bound-check"]);
    assert_eq!(inverted.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&inverted.stdout).contains("FAIL"));
}

#[test]
fn oracle_prints_all_six_cells() {
    let out = noma_cov(&[
        "oracle", "--r1", "0.3", "--r2", "0.8", "--t-db", "-3", "--interference", "0.2", "--draws", "20000",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').skip(2).map(|c| c.parse().unwrap()).collect();
        assert!((cols[0] - cols[2]).abs() < 5.0 * cols[1] + 1e-3, "{line}");
    }
}
