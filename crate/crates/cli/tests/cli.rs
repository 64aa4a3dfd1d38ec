use std::path::Path;
use std::process::{Command, Output};

use ghostlet_cli::config::ExperimentConfig;
use ghostlet_cli::read_report;

const SMALL_GRIDS: &str = r#""grids": {
    "input": {"lower": [-8.0], "upper": [8.0], "counts": [81]},
    "param": {"lower": [-4.0, -20.0], "upper": [4.0, 20.0], "counts": [41, 81]}
}"#;

fn ghostlet(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghostlet"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn empty_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{}");
    let out = ghostlet(&["admissibility"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_fields_and_bad_json_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for body in [r#"{"experiment": "admissibility", "sead": 3}"#, "{ not json", "[1, 2]"] {
        let cfg = write_config(dir.path(), body);
        let out = ghostlet(&["admissibility"], &cfg, &dir.path().join("out"));
        assert_eq!(out.status.code(), Some(2), "{body}");
    }
}

#[test]
fn missing_config_flag_and_unknown_subcommand_exit_2() {
    let bin = env!("CARGO_BIN_EXE_ghostlet");
    assert_eq!(Command::new(bin).arg("admissibility").output().unwrap().status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": "admissibility"}"#);
    let out = ghostlet(&["no-such-run"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": "bound"}"#);
    assert_eq!(ghostlet(&["admissibility"], &cfg, &dir.path().join("a")).status.code(), Some(2));
    let cfg = write_config(dir.path(), r#"{"seed": 1}"#);
    let out = ghostlet(&["admissibility", "--experiment", "lazy"], &cfg, &dir.path().join("b"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_echoes_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": "admissibility", "seed": 1}"#);
    let out_dir = dir.path().join("out");
    let out = ghostlet(&["admissibility", "--seed", "42"], &cfg, &out_dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_report(&out_dir.join("report.json")).unwrap();
    let mut want = ExperimentConfig::from_json(r#"{"experiment": "admissibility"}"#).unwrap();
    want.seed = 42;
    want.output_dir = out_dir.clone();
    assert_eq!(report.config_echo, want);
    assert!(report.artifacts.iter().all(|a| out_dir.join(a).exists()));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{"experiment": "spectrum", "ridgelet_quadrature": {{"kind": "monte_carlo", "samples": 64}}, {SMALL_GRIDS}}}"#
    );
    let cfg = write_config(dir.path(), &body);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = ghostlet(&["spectrum", "--seed", "9"], &cfg, d);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = std::fs::read(a.join("report.json")).unwrap();
    let names = read_report(&a.join("report.json")).unwrap().artifacts;
    assert!(names.len() > 3);
    for n in names.iter().filter(|n| *n != "report.json") {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap(), "{n}");
    }
    let out = ghostlet(&["spectrum", "--seed", "9"], &cfg, &a);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(a.join("report.json")).unwrap(), first);
    // Atomic writes leave no temporaries behind.
    let stray: Vec<_> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| !names.contains(n))
        .collect();
    assert!(stray.is_empty(), "{stray:?}");
}

#[test]
fn different_seeds_change_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{"experiment": "spectrum", "ridgelet_quadrature": {{"kind": "monte_carlo", "samples": 64}}, {SMALL_GRIDS}}}"#
    );
    let cfg = write_config(dir.path(), &body);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(ghostlet(&["spectrum", "--seed", "1"], &cfg, &a).status.code(), Some(0));
    assert_eq!(ghostlet(&["spectrum", "--seed", "2"], &cfg, &b).status.code(), Some(0));
    let n = "spectrum_gaussian_d4.csv";
    assert_ne!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap());
}

#[test]
fn heatmaps_are_binary_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{{"experiment": "spectrum", {SMALL_GRIDS}}}"#));
    let out_dir = dir.path().join("out");
    assert_eq!(ghostlet(&["spectrum"], &cfg, &out_dir).status.code(), Some(0));
    let bytes = std::fs::read(out_dir.join("spectrum_gaussian_d4_re.pgm")).unwrap();
    // Header fields are whitespace separated; one whitespace byte precedes the raster.
    let text = String::from_utf8_lossy(&bytes[..32]).into_owned();
    let fields: Vec<&str> = text.split_ascii_whitespace().take(4).collect();
    assert_eq!(fields, ["P5", "81", "41", "255"]);
    let header_len = text.find("255").unwrap() + 4;
    assert_eq!(bytes.len(), header_len + 81 * 41);
    let csv = std::fs::read_to_string(out_dir.join("spectrum_gaussian_d4.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("a0,b,re,im"));
    assert_eq!(csv.lines().count(), 1 + 41 * 81);
}

#[test]
fn failed_tolerance_exits_3_and_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(r#"{{"experiment": "reconstruct", "reconstruct": {{"admissible_tolerance": 1e-12}}, {SMALL_GRIDS}}}"#);
    let cfg = write_config(dir.path(), &body);
    let out_dir = dir.path().join("out");
    let out = ghostlet(&["reconstruct"], &cfg, &out_dir);
    assert_eq!(out.status.code(), Some(3));
    let report = read_report(&out_dir.join("report.json")).unwrap();
    assert_eq!(report.failed_checks().len(), 1);
}

#[test]
fn domain_errors_map_to_usage_exit() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"experiment": "encode-series", "encode_series": {"codebook_orders": [2],
        "functions": [{"kind": "hermite", "index": 0}, {"kind": "hermite", "index": 1}, {"kind": "hermite", "index": 2}]}}"#;
    let cfg = write_config(dir.path(), body);
    let out = ghostlet(&["encode-series"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
