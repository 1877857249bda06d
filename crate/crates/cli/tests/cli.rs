use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use memfhn::io::{read_metrics_csv, read_snapshot};

const REFERENCE_CONFIG: &str = include_str!("../../../configs/paper.json");

fn memfhn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memfhn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes the bundled configuration with `edits` applied as raw text replacements.
fn config_with(dir: &Path, name: &str, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = REFERENCE_CONFIG.to_string();
    for (from, to) in edits {
        assert!(text.contains(from), "config has no `{from}`");
        text = text.replacen(from, to, 1);
    }
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn small_config(dir: &Path) -> PathBuf {
    config_with(
        dir,
        "small.json",
        &[
            ("\"nx\": 32", "\"nx\": 8"),
            ("\"ny\": 32", "\"ny\": 6"),
            ("\"n_steps\": 10000", "\"n_steps\": 400"),
        ],
    )
}

#[test]
fn constants_prints_reference_values() {
    let o = memfhn(&["constants", "--config", "../../configs/paper.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    for needle in [
        "437.500000",
        "0.175000",
        "0.350000",
        "876.402319",
        "synchronization guaranteed",
    ] {
        assert!(s.contains(needle), "missing {needle} in\n{s}");
    }
    assert!(stderr(&o).is_empty());
}

#[test]
fn constants_writes_csv_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = memfhn(&[
        "constants",
        "--config",
        "../../configs/paper.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("constants.csv")).unwrap();
    assert!(csv.starts_with("name,value\nC1,4.3750000000000000e2\n"), "{csv}");
}

#[test]
fn config_errors_exit_2_on_stderr_only() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config_with(
        dir.path(),
        "bad.json",
        &[("\"eta\"", "\"etaa\""), ("\"dt\": 0.00025", "\"dt\": 0.5")],
    );
    let o = memfhn(&["constants", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    let err = stderr(&o);
    assert!(err.contains("etaa"), "{err}");
    assert!(err.contains("eta"), "{err}");

    let cfl = config_with(dir.path(), "cfl.json", &[("\"dt\": 0.00025", "\"dt\": 0.5")]);
    let o = memfhn(&[
        "simulate",
        "--config",
        cfl.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cfl_max_dt"), "{}", stderr(&o));

    let o = memfhn(&["constants", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(memfhn(&[]).status.code(), Some(2));
    assert_eq!(memfhn(&["frobnicate"]).status.code(), Some(2));
    let o = memfhn(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = memfhn(&["simulate", "--config", cfg.to_str().unwrap(), "--tail-fraction", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_a_pure_function_of_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |out: &str, extra: &[&str]| {
        let out = dir.path().join(out);
        let mut args = vec![
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let o = memfhn(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(out.join("metrics.csv")).unwrap()
    };
    let a = run("a", &[]);
    let b = run("b", &[]);
    let c = run("c", &["--seed", "7"]);
    assert_eq!(a, b);
    assert_ne!(a, c);

    let series = read_metrics_csv(&dir.path().join("a/metrics.csv")).unwrap();
    assert_eq!(series.len(), 40);
    let header = String::from_utf8(a).unwrap();
    let cols = header.lines().next().unwrap().split(',').count();
    assert_eq!(cols, 1 + 4 * 4 + 2 + 6);
}

#[test]
fn simulate_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(
        dir.path(),
        "snap.json",
        &[
            ("\"nx\": 32", "\"nx\": 5"),
            ("\"ny\": 32", "\"ny\": 5"),
            ("\"n_steps\": 10000", "\"n_steps\": 100"),
            ("\"snapshot_every\": 0", "\"snapshot_every\": 50"),
        ],
    );
    let out = dir.path().join("o");
    let o = memfhn(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = read_snapshot(&out.join("snapshots/step_00000100.snap")).unwrap();
    assert_eq!((s.neurons(), s.grid().nx(), s.grid().ny()), (4, 5, 5));
    assert!((s.t - 0.025).abs() < 1e-15);
    assert!(out.join("snapshots/step_00000050.snap").exists());
}

#[test]
fn blow_up_exits_1_and_keeps_partial_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with(
        dir.path(),
        "boom.json",
        &[
            ("\"nx\": 32", "\"nx\": 4"),
            ("\"ny\": 32", "\"ny\": 4"),
            ("\"amplitude\": 0.05", "\"amplitude\": 1e6"),
            ("\"record_every\": 10", "\"record_every\": 1"),
        ],
    );
    let out = dir.path().join("o");
    let o = memfhn(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("non-finite") || stderr(&o).contains("step"),
        "{}",
        stderr(&o)
    );
    let partial = read_metrics_csv(&out.join("metrics.csv")).unwrap();
    assert!(!partial.is_empty() && partial.len() < 10000);
}

#[test]
fn plot_renders_selected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("run");
    assert_eq!(
        memfhn(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let csv = out.join("metrics.csv");
    let figs = dir.path().join("figs");
    let args = [
        "plot",
        csv.to_str().unwrap(),
        "--columns",
        "D_1_2,D_3_4",
        "--log-y",
        "--out",
        figs.to_str().unwrap(),
    ];
    assert_eq!(memfhn(&args).status.code(), Some(0));
    let svg = fs::read_to_string(figs.join("metrics.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("D_3_4"));
    assert_eq!(memfhn(&args).status.code(), Some(0));
    assert_eq!(fs::read_to_string(figs.join("metrics.svg")).unwrap(), svg);

    let o = memfhn(&["plot", csv.to_str().unwrap(), "--columns", "D_9_9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("D_9_9"));

    assert_eq!(memfhn(&["plot", csv.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(out.join("metrics.svg"))
            .unwrap()
            .matches("<polyline")
            .count(),
        4
    );
}

#[test]
fn reproduce_command_emits_tables_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rp");
    let o = memfhn(&["reproduce-paper", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("point samples at grid index (10, 10)"));
    assert!(s.contains("Gamma"));
    for f in [
        "metrics.csv",
        "constants.csv",
        "point_samples.txt",
        "fig_u_norm.svg",
        "fig_w_norm.svg",
        "fig_rho_norm.svg",
        "fig_g_norm_sq.svg",
        "fig_sync_log.svg",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let series = read_metrics_csv(&out.join("metrics.csv")).unwrap();
    assert_eq!(series.len(), 1000);
    assert!((series.records().last().unwrap().t - 2.5).abs() < 1e-9);
}

#[test]
fn verify_passes_on_a_fresh_checkout() {
    let o = memfhn(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("[FAIL]"));
}
