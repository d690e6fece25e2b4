//! End-to-end tests of the `diffest` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use diffest::cli::{read_header_config, read_table, Cell, Config, Table};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn diffest(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_diffest"));
    cmd.args(args).env_remove("DIFFEST_THREADS");
    if let Some(t) = threads {
        cmd.env("DIFFEST_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = diffest(args, None);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn config_path(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("c.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn values(table: &Table, column: &str) -> Vec<f64> {
    table
        .column_values(column)
        .unwrap_or_else(|| panic!("missing column {column}"))
        .iter()
        .map(|c| c.value().unwrap_or_else(|| panic!("{column}: non-numeric cell {c:?}")))
        .collect()
}

#[test]
fn bound_reports_every_scheme() {
    let text = run_ok(&["bound", "-c", &config_path("maqro.toml")]);
    for scheme in ["qcrb", "optimal-homodyne", "momentum", "position", "heterodyne"] {
        assert!(text.contains(scheme), "{text}");
    }
    let json = run_ok(&["bound", "-c", &config_path("maqro.toml"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v["entries"].as_array().unwrap().len() == 5);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "[scenario]\nmass = \"1e8 amu\"\nomega = \"1e5 rad/s\"\nfree_fall_time = \"100 s\"\nbogus = 1\n[state]\n",
        "[scenario]\nmass = \"1e8 furlong\"\nomega = \"1e5 rad/s\"\nfree_fall_time = \"100 s\"\n[state]\n",
        "[scenario]\nmass = \"1e8 s\"\nomega = \"1e5 rad/s\"\nfree_fall_time = \"100 s\"\n[state]\n",
    ];
    for text in cases {
        let out = diffest(&["bound", "-c", &write_config(dir.path(), text)], None);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(!out.stderr.is_empty());
    }
    let missing = diffest(&["bound", "-c", "/nonexistent/config.toml"], None);
    assert_eq!(missing.status.code(), Some(2));
    let bad_set = diffest(
        &[
            "bound",
            "-c",
            &config_path("maqro.toml"),
            "--set",
            "state.squeezing=3 kg",
        ],
        None,
    );
    assert_eq!(bad_set.status.code(), Some(2));
}

#[test]
fn degenerate_corner_exits_with_three() {
    let out = diffest(
        &[
            "bound",
            "-c",
            &config_path("maqro.toml"),
            "--set",
            "state.thermal_variance=1",
            "--set",
            "scenario.lambda=0 m^-2 s^-1",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn montecarlo_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("montecarlo.toml"))
        .unwrap()
        .replace("seed = 1\n", "");
    let path = write_config(dir.path(), &text);
    let out = diffest(&["montecarlo", "-c", &path, "--set", "montecarlo.samples=1000"], None);
    assert_eq!(out.status.code(), Some(2));
    let seeded = run_ok(&[
        "montecarlo",
        "-c",
        &path,
        "--seed",
        "7",
        "--set",
        "montecarlo.samples=1000",
    ]);
    assert!(read_header_config(&seeded).unwrap().montecarlo.unwrap().seed == Some(7));
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let sweep = ["sweep", "-c", &config_path("lambda_sweep.toml")];
    let one = diffest(&sweep, Some("1"));
    let four = diffest(&sweep, Some("4"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, diffest(&sweep, None).stdout);

    let mc = [
        "montecarlo",
        "-c",
        &config_path("montecarlo.toml"),
        "--set",
        "montecarlo.replicates=20",
    ];
    let a = diffest(&mc, Some("1"));
    let b = diffest(&mc, Some("3"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn headers_round_trip_and_data_is_finite() {
    for (cmd, file) in [
        ("sweep", "lambda_sweep.toml"),
        ("csl", "csl_sweep.toml"),
        ("montecarlo", "montecarlo.toml"),
    ] {
        let args = [cmd, "-c", &config_path(file), "--set", "montecarlo.replicates=10"];
        // the override only applies where a montecarlo table exists
        let args: &[&str] = if cmd == "montecarlo" { &args } else { &args[..3] };
        let text = run_ok(args);
        let original = Config::from_toml(&std::fs::read_to_string(configs().join(file)).unwrap()).unwrap();
        let header = read_header_config(&text).unwrap();
        if cmd != "montecarlo" {
            assert_eq!(header, original, "{file}");
        }
        assert_eq!(Config::from_toml(&header.to_toml()).unwrap(), header);
        for line in text.lines().filter(|l| !l.starts_with('#')) {
            let lower = line.to_ascii_lowercase();
            assert!(!lower.contains("nan") && !lower.contains("inf"), "{file}: {line}");
        }
        let table = read_table(&text).unwrap();
        assert!(!table.rows.is_empty());
    }
}

#[test]
fn written_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let stdout = run_ok(&["sweep", "-c", &config_path("lambda_sweep.toml")]);
    run_ok(&[
        "sweep",
        "-c",
        &config_path("lambda_sweep.toml"),
        "-o",
        &out.to_string_lossy(),
    ]);
    assert_eq!(std::fs::read_to_string(out).unwrap(), stdout);
}

#[test]
fn lambda_sweep_is_monotone_and_squeezing_helps() {
    let table = read_table(&run_ok(&["sweep", "-c", &config_path("lambda_sweep.toml")])).unwrap();
    for scheme in ["position", "momentum", "optimal-homodyne", "qcrb"] {
        for level in ["0dB", "10dB"] {
            let v = values(&table, &format!("{scheme}@{level}:std[m^-2 s^-1]"));
            assert!(v.windows(2).all(|w| w[1] > w[0]), "{scheme}@{level}");
        }
    }
}

#[test]
fn csl_curves_order_by_squeezing_and_catch_grw() {
    let table = read_table(&run_ok(&["csl", "-c", &config_path("csl_sweep.toml")])).unwrap();
    let r_c = values(&table, "r_c[m]");
    for scheme in ["position", "momentum", "optimal-homodyne"] {
        let l0 = values(&table, &format!("{scheme}@0dB:lambda_min[s^-1]"));
        let l10 = values(&table, &format!("{scheme}@10dB:lambda_min[s^-1]"));
        let l20 = values(&table, &format!("{scheme}@20dB:lambda_min[s^-1]"));
        for i in 0..r_c.len() {
            assert!(l20[i] < l10[i] && l10[i] < l0[i], "{scheme} at r_c {}", r_c[i]);
        }
    }
    // GRW point: lambda = 1e-16 s^-1 at r_c = 1e-7 m
    let mom20 = values(&table, "momentum@20dB:lambda_min[s^-1]");
    let i = r_c
        .iter()
        .position(|&r| (r / 1e-7 - 1.0).abs() < 1e-9)
        .expect("grid contains 1e-7 m");
    assert!(mom20[i] < 1e-16, "lambda_min {} at r_c = 1e-7 m", mom20[i]);
}

#[test]
fn csl_overlay_is_interpolated() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("xray.csv"),
        "# r_c[m], lambda[s^-1]\n1e-8, 1e-12\n1e-6, 1e-8\n",
    )
    .unwrap();
    let base = std::fs::read_to_string(configs().join("csl_sweep.toml")).unwrap();
    let path = write_config(dir.path(), &format!("{base}\n[csl]\noverlay = \"xray.csv\"\n"));
    let table = read_table(&run_ok(&["csl", "-c", &path])).unwrap();
    let r_c = values(&table, "r_c[m]");
    let overlay = table.column_values("overlay:lambda[s^-1]").unwrap();
    for (r, cell) in r_c.iter().zip(&overlay) {
        if (1e-8..=1e-6).contains(r) {
            // log-log line through the two overlay points
            let expected = 1e-12 * (r / 1e-8).powi(2);
            assert!((cell.value().unwrap() / expected - 1.0).abs() < 1e-9, "{r}: {cell:?}");
        } else {
            assert_eq!(*cell, Cell::NotApplicable);
        }
    }
}
