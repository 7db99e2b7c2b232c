use std::path::Path;
use std::process::{Command, Output};

fn mimome(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimome"))
        .args(args)
        .env("MIMOME_THREADS", "2")
        .output()
        .unwrap()
}

fn run_to(args: &[&str], out: &Path) -> (Output, String) {
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap();
    full.extend(["--out", out_str]);
    let o = mimome(&full);
    let body = std::fs::read_to_string(out).unwrap_or_default();
    (o, body)
}

fn header(body: &str) -> Vec<&str> {
    body.lines().next().unwrap().split(',').collect()
}

#[test]
fn list_names_every_experiment() {
    let o = mimome(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "concentration",
        "ne-sweep",
        "sca-convergence",
        "limit-check",
        "anece-bounds",
        "sdof",
        "blind-rate",
        "blind-secrecy",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn concentration_writes_samples_and_one_asymptotic_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let (o, body) = run_to(
        &["run", "concentration", "-p", "n_e=8,16,64", "-p", "p_db=30"],
        &out,
    );
    assert_eq!(o.status.code(), Some(0));
    // header, 3 cells x 100 draws, 3 asymptotic rows
    assert_eq!(body.lines().count(), 304);
    assert_eq!(
        body.lines().filter(|l| l.contains(",asymptotic,")).count(),
        3
    );
    assert_eq!(header(&body)[..2], ["experiment", "kind"]);
}

#[test]
fn sdof_table_has_no_seed_or_trials_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let (o, body) = run_to(&["run", "sdof"], &out);
    assert!(o.status.success());
    assert_eq!(
        header(&body),
        [
            "experiment",
            "mode",
            "n_a",
            "n_b",
            "n_e",
            "k2",
            "sdof_lower",
            "sdof_upper"
        ]
    );
    // both modes over k2 = 1..=16
    assert_eq!(body.lines().count(), 33);
}

#[test]
fn blind_table_exposes_both_rates_and_secrecy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let (o, body) = run_to(
        &["run", "blind-secrecy", "-p", "n_e=8", "--trials", "3"],
        &out,
    );
    assert!(o.status.success());
    let h = header(&body);
    for col in [
        "r_ae2",
        "r_ae_known_csi",
        "r_ab",
        "secrecy_blind",
        "secrecy_known_csi",
    ] {
        assert!(h.contains(&col), "missing {col}");
    }
    assert_eq!(body.lines().count(), 2);
}

#[test]
fn timing_flag_adds_a_trailing_column() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("a.csv");
    let timed = dir.path().join("b.csv");
    let (_, a) = run_to(&["run", "limit-check"], &plain);
    let (_, b) = run_to(&["run", "limit-check", "--timing"], &timed);
    assert!(!header(&a).contains(&"runtime_ms"));
    assert_eq!(header(&b).last(), Some(&"runtime_ms"));
    assert_eq!(header(&b).len(), header(&a).len() + 1);
}

#[test]
fn infeasible_grid_is_a_usage_error_with_a_reason() {
    let o = mimome(&["validate", "blind-rate", "-p", "k2=4,5"]);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("cells: 2"));
    assert!(text.contains("infeasible: k2 = 4"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let o = mimome(&[
        "run",
        "blind-rate",
        "-p",
        "k2=4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn validate_reports_cell_count_for_a_feasible_grid() {
    let o = mimome(&["validate", "ne-sweep"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("experiment: ne-sweep"));
    assert!(text.contains("status: ok"));
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    for args in [
        &["run", "no-such-experiment"][..],
        &["run", "sdof", "-p", "bogus=1"],
        &["run", "concentration", "-p", "n_e="],
        &["run", "limit-check", "-p", "p_db=abc"],
        &["run", "sdof", "--out", "/nonexistent-dir/x.csv"],
        &["run", "sdof", "--config", "/nonexistent-dir/params.txt"],
    ] {
        assert_eq!(mimome(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_mimome"))
        .args(["run", "sdof"])
        .env("MIMOME_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_write_is_a_runtime_error() {
    if Path::new("/dev/full").exists() {
        assert_eq!(
            mimome(&["run", "sdof", "--out", "/dev/full"]).status.code(),
            Some(3)
        );
    }
}

#[test]
fn command_line_overrides_config_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("params.txt");
    std::fs::write(&cfg, "# small grid\nn_e = 8\np_db=10\nseed=4\n").unwrap();
    let out = dir.path().join("c.csv");
    let (o, body) = run_to(
        &[
            "run",
            "concentration",
            "--config",
            cfg.to_str().unwrap(),
            "-p",
            "p_db=20",
            "--seed",
            "7",
            "--trials",
            "2",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let h = header(&body);
    let col = |name: &str| h.iter().position(|c| *c == name).unwrap();
    let rows: Vec<Vec<&str>> = body
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r[col("n_e")], "8");
        assert_eq!(r[col("p_db")].parse::<f64>().unwrap(), 20.0);
        assert_eq!(r[col("seed")], "7");
        assert_eq!(r[col("trials")], "2");
    }
}

#[test]
fn stdout_output_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.csv");
    let (_, body) = run_to(&["run", "limit-check", "-p", "n_e=16,32"], &out);
    let o = mimome(&["run", "limit-check", "-p", "n_e=16,32"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), body);
}
