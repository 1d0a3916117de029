//! End-to-end runs of the `relaxlab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use relaxlab_cli::parse_config_str;

fn relaxlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RELAXLAB_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small, fast settings shared by the runs below.
const FAST: [&str; 6] = ["--set", "grid.n=32", "--set", "time.t_end=0.01", "--set", "sweep.table_size=256"];

fn with_fast<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(&FAST);
    v.extend_from_slice(extra);
    v
}

#[test]
fn help_and_version_exit_zero_and_bad_usage_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&relaxlab(&["--help"], tmp.path())), 0);
    assert_eq!(code(&relaxlab(&["--version"], tmp.path())), 0);
    assert_eq!(code(&relaxlab(&["frobnicate"], tmp.path())), 1);
}

#[test]
fn simulate_with_zero_horizon_writes_only_the_initial_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let o = relaxlab(&["simulate", "--set", "grid.n=16", "--set", "time.t_end=0"], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let snaps = fs::read_to_string(out.join("snapshots.csv")).unwrap();
    let lines: Vec<&str> = snaps.lines().collect();
    assert_eq!(lines[0], "time,x,u,v");
    assert_eq!(lines.len(), 1 + 16);
    assert!(lines[1..].iter().all(|l| l.starts_with("0.0000000000000000e0,")));
    let series = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(series.lines().count(), 2);
}

#[test]
fn meta_echo_parses_back_to_the_run_configuration() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ref");
    let o = relaxlab(&with_fast("reference", &["--set", "init.kind=gauss-bump", "--set", "model.lambda=1.5"]), &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let meta = fs::read_to_string(out.join("meta.txt")).unwrap();
    let back = parse_config_str(&meta, &[]).unwrap();
    let expected = parse_config_str(
        "",
        &[
            "grid.n=32".into(),
            "time.t_end=0.01".into(),
            "sweep.table_size=256".into(),
            "init.kind=gauss-bump".into(),
            "model.lambda=1.5".into(),
            format!("output.dir={:?}", out.display().to_string()),
        ],
    )
    .unwrap();
    assert_eq!(back, expected);
}

#[test]
fn config_file_and_validation_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[model]\nh = [[1, 0.3]]\n").unwrap();
    let o = relaxlab(&["simulate", "--config", cfg.to_str().unwrap()], &tmp.path().join("o"));
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("degree >= 2"), "{}", stderr(&o));

    fs::write(&cfg, "[model]\neps = 1.0\na = 0.0\nh = [[2, 1.0]]\nlambda = 1.0\nu_limit = 3.0\n").unwrap();
    let o = relaxlab(&["simulate", "--config", cfg.to_str().unwrap()], &tmp.path().join("o"));
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not monotone"), "{}", stderr(&o));

    let o = relaxlab(&["simulate", "--set", "grid.size=3"], &tmp.path().join("o"));
    assert_eq!(code(&o), 1);
}

#[test]
fn linear_check_reports_the_symmetrized_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lin");
    let o = relaxlab(&with_fast("linear-check", &["--set", "model.h=[]"]), &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = fs::read_to_string(out.join("linear_check.txt")).unwrap();
    assert!(report.contains("A_sigma = [[1, 4], [4, 0.04]]"), "{report}");
    assert!(report.contains("passed = true"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("A_sigma = [[1, 4], [4, 0.04]]"));

    let o = relaxlab(&with_fast("linear-check", &[]), &out);
    assert_eq!(code(&o), 1, "nonlinear flux must be rejected");
}

#[test]
fn entropy_audit_passes_on_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("audit");
    let o = relaxlab(&with_fast("entropy-audit", &[]), &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let audit = fs::read_to_string(out.join("audit.txt")).unwrap();
    assert!(audit.contains("minimum_principle_samples = 1000"), "{audit}");
    assert!(audit.contains("passed = true"));
    let table = fs::read_to_string(out.join("entropy_table_1.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("xi,H,H',H''"));
    assert_eq!(table.lines().count(), 1 + 256);
}

#[test]
fn sweep_writes_reports_and_aborted_rows_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let o = relaxlab(&with_fast("sweep", &["--set", "model.eps_ladder=[0.08, 0.04]"]), &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["sweep.csv", "rates.csv", "meta.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("aborts.txt").exists());
    let meta = fs::read_to_string(out.join("meta.txt")).unwrap();
    assert_eq!(parse_config_str(&meta, &[]).unwrap().model.eps_ladder, vec![0.08, 0.04]);

    // a tight declared range that the solution leaves immediately
    let out = tmp.path().join("abort");
    let o = relaxlab(
        &with_fast(
            "sweep",
            &[
                "--set",
                "model.eps_ladder=[0.08, 0.04]",
                "--set",
                "model.u_limit=1.0",
                "--set",
                "init.mean=0.02",
                "--set",
                "init.amplitude=0.98",
            ],
        ),
        &out,
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(out.join("sweep.csv").exists());
    assert!(out.join("aborts.txt").exists());
}

#[test]
fn environment_sets_the_output_directory_unless_out_is_given() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_relaxlab"))
        .args(["reference", "--set", "grid.n=16", "--set", "time.t_end=0"])
        .env("RELAXLAB_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(env_dir.join("snapshots.csv").exists());

    let flag_dir = tmp.path().join("from-flag");
    let o = Command::new(env!("CARGO_BIN_EXE_relaxlab"))
        .args(["reference", "--set", "grid.n=16", "--set", "time.t_end=0", "--out"])
        .arg(&flag_dir)
        .env("RELAXLAB_OUT", tmp.path().join("unused"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(flag_dir.join("snapshots.csv").exists());
    assert!(!tmp.path().join("unused").exists());
}
