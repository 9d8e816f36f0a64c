use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nrcg_battery::scan::scan_theta_iterations;
use nrcg_battery::Metric;
use nrcg_battery_cli::config::RunConfig;
use nrcg_battery_cli::output::{scan_rows, JsonData, JsonDocument, RunManifest, CSV_HEADER, THERMAL_CSV_HEADER};

const SMALL_GRID: &str = "[scan]\ntheta_points = 5\nphi_points = 4\np_points = 3\nroots = [1, 2, 5]\n";

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nrcg-battery"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = bin(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn zero_iteration_run_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    ok(&["run", "--iterations", "0", "--out", path_str(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(
        lines[1].ends_with(",,"),
        "power columns empty at iteration 0: {}",
        lines[1]
    );
    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.command, "run");
    assert_eq!(manifest.provenance.len(), 2);
    assert_eq!(manifest.provenance[0].gate, "A->B^(1/15)");
    assert!(manifest.outputs.iter().any(|o| o.ends_with("run.csv")));
}

#[test]
fn default_scan_is_101_by_31_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&["scan", "--metric", "delta_w", "--out", path_str(&a)]);
    ok(&["scan", "--metric", "delta_w", "--threads", "2", "--out", path_str(&b)]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 3132);
    assert_eq!(text, fs::read_to_string(&b).unwrap());

    // Rows ordered by theta, then iteration.
    let keys: Vec<(f64, usize)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[3].parse().unwrap(), f[5].parse().unwrap())
        })
        .collect();
    assert!(keys
        .windows(2)
        .all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1)));
}

#[test]
fn json_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.json");
    ok(&[
        "scan",
        "--metric",
        "fom",
        "--qubits",
        "2",
        "--format",
        "json",
        "--out",
        path_str(&out),
    ]);
    let doc: JsonDocument = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.schema_version, 1);
    assert!(!doc.manifest.provenance.is_empty());
    assert_eq!(doc.manifest.config.system.n_qubits, 2);

    let config = doc.manifest.config.clone();
    let expected = scan_theta_iterations(&config.protocol().unwrap(), &config.grid(), Metric::Fom).unwrap();
    match &doc.data {
        JsonData::Scan {
            metric,
            axes,
            values,
            rows,
        } => {
            assert_eq!(metric, "fom");
            assert_eq!(axes.len(), 2);
            assert_eq!(values, &expected.values);
            assert_eq!(rows, &scan_rows(&expected));
        }
        other => panic!("unexpected payload {other:?}"),
    }
    let again: JsonDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(again, doc);
}

#[test]
fn manifest_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let cfg = write_config(dir.path(), SMALL_GRID);
    ok(&[
        "compare-cnot",
        "--config",
        path_str(&cfg),
        "--qubits",
        "2",
        "--out",
        path_str(&out),
    ]);
    let text = fs::read_to_string(dir.path().join("c.csv.manifest.json")).unwrap();
    let m: RunManifest = serde_json::from_str(&text).unwrap();
    assert!(m.derived.contains_key("theta_star"));
    assert!(m.provenance.iter().any(|g| g.root_n == 1));
    let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
    // 31 Nth-root rows and 3 full-CNOT rows.
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 31 + 3);
}

#[test]
fn emitted_defaults_parse_to_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let first = ok(&["config"]).stdout;
    let cfg = write_config(dir.path(), std::str::from_utf8(&first).unwrap());
    let second = ok(&["config", "--config", path_str(&cfg)]).stdout;
    assert_eq!(first, second);
    assert_eq!(
        RunConfig::from_toml_str(std::str::from_utf8(&first).unwrap()).unwrap(),
        RunConfig::default()
    );
}

#[test]
fn every_subcommand_succeeds_and_leaves_config_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_GRID);
    let before = fs::read(&cfg).unwrap();
    for cmd in ["run", "scan", "scan2d", "compare-cnot", "compare-thermal", "converge"] {
        let out = dir.path().join(format!("{cmd}.csv"));
        ok(&[cmd, "--config", path_str(&cfg), "--out", path_str(&out)]);
        assert!(out.exists());
        assert!(dir.path().join(format!("{cmd}.csv.manifest.json")).exists());
        let json = dir.path().join(format!("{cmd}.json"));
        ok(&[
            cmd,
            "--config",
            path_str(&cfg),
            "--format",
            "json",
            "--out",
            path_str(&json),
        ]);
        let _: JsonDocument = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    }
    assert_eq!(fs::read(&cfg).unwrap(), before);
    let thermal = fs::read_to_string(dir.path().join("compare-thermal.csv")).unwrap();
    assert_eq!(thermal.lines().next().unwrap(), THERMAL_CSV_HEADER);
    assert_eq!(thermal.lines().count(), 1 + 2 * 3 * 2 * 4);
    // 3 + 5 + 11 rows for roots 1, 2, 5.
    assert_eq!(
        fs::read_to_string(dir.path().join("converge.csv"))
            .unwrap()
            .lines()
            .count(),
        1 + 3 + 5 + 11
    );
}

#[test]
fn stdout_output_without_out_flag() {
    let out = ok(&["run", "--iterations", "2", "--qubits", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
}

#[test]
fn failures_name_the_stage_and_field() {
    let out = bin(&["run", "--theta", "4.0"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("config") && err.contains("qubit.b.theta") && err.contains("[0, pi]"),
        "{err}"
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[system]\nn_qubits = 4\nspin = 1\n[qubit.b]\ntheta = 1.0\nfoo = 2\n",
    );
    let out = bin(&["scan", "--config", path_str(&cfg)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("system.spin") && err.contains("qubit.b.foo"), "{err}");

    let cfg = write_config(dir.path(), "[system]\nn_qubits = 4\n");
    let err = String::from_utf8_lossy(&bin(&["scan", "--config", path_str(&cfg)]).stderr).into_owned();
    assert!(err.contains("system.n_qubits"), "{err}");

    assert!(!bin(&["run", "--qubits", "4"]).status.success());
    let out = bin(&["run", "--config", "/nonexistent/run.toml"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("config"));
    let out = bin(&["run", "--out", "/nonexistent/dir/run.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("write"));
    let out = bin(&["scan", "--threads", "0"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("threads"));
}

#[test]
fn fom_preview_peaks_near_half_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fom.csv");
    let shown = ok(&[
        "scan",
        "--metric",
        "fom",
        "--phi",
        &PI.to_string(),
        "--preview",
        "--out",
        path_str(&out),
    ]);
    let text = String::from_utf8(shown.stdout).unwrap();
    let body: Vec<&str> = text
        .lines()
        .filter_map(|l| l.split_once(" |").map(|(_, r)| r))
        .collect();
    assert_eq!(body.len(), 31);
    // Column-weighted centroid of the two densest characters.
    let (mut sum, mut count) = (0.0, 0.0);
    for line in &body {
        for (i, c) in line.chars().enumerate() {
            if c == '@' || c == '%' {
                sum += PI * i as f64 / 100.0;
                count += 1.0;
            }
        }
    }
    assert!(count > 0.0);
    let centroid = sum / count;
    assert!(
        (centroid - FRAC_PI_2).abs() < 0.4,
        "dense region centred at theta {centroid}"
    );
    assert_eq!(body.iter().map(|l| l.matches('@').count()).sum::<usize>(), 1);
}

#[test]
fn preview_of_one_axis_result_is_skipped() {
    let out = ok(&["run", "--iterations", "3", "--preview"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("preview skipped"));
}
