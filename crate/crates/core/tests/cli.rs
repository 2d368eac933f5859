#![allow(clippy::approx_constant)] // tabulated energies such as 3.14

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use harmonium::cli::{CompareReport, RunConfig, THREADS_ENV};

fn harmonium(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_harmonium"));
    cmd.args(args).env_remove(THREADS_ENV);
    if let Some(t) = threads {
        cmd.env(THREADS_ENV, t);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn small_hk() -> &'static str {
    r#"{"n_trajectories": 1024, "seed": 3, "integrator": {"dt": 0.01, "n_steps": 1000}}"#
}

#[test]
fn wkb_mode_writes_fock_darwin_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = format!(
        r#"{{"mode": "wkb", "params": {{"omega0": 1, "omega_l": 1, "kappa": 0}},
            "output_dir": {:?}}}"#,
        out
    );
    let path = write_config(dir.path(), "wkb.json", &cfg);
    let res = harmonium(&["--config", &path], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(out.join("wkb_table.csv")).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    let mut got: Vec<(u32, i32, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    got.sort_by_key(|&(n, m, _)| (n, m));
    let rounded: Vec<f64> = got.iter().map(|r| (r.2 * 100.0).round() / 100.0).collect();
    assert_eq!(rounded, [1.41, 1.83, 2.24, 4.24, 4.66, 5.07]);
}

#[test]
fn missing_section_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = format!(
        r#"{{"mode": "hk", "params": {{"omega0": 1, "omega_l": 1}}, "output_dir": {:?}}}"#,
        out
    );
    let path = write_config(dir.path(), "bad.json", &cfg);
    let res = harmonium(&["--config", &path], None);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("hk"));
    assert!(!out.exists());
}

#[test]
fn malformed_config_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "broken.json", "{ mode: ");
    assert_eq!(harmonium(&["--config", &path], None).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(harmonium(&["--config", missing.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(harmonium(&["--mode", "wkb"], None).status.code(), Some(2));
}

#[test]
fn hk_runs_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str], threads: Option<&str>| {
        let out = dir.path().join(name);
        let cfg = format!(
            r#"{{"mode": "hk", "params": {{"omega0": 1, "omega_l": 1, "kappa": 1}},
                "hk": {}, "output_dir": {:?}}}"#,
            small_hk(),
            out
        );
        let path = write_config(dir.path(), &format!("{name}.json"), &cfg);
        let mut args = vec!["--config", path.as_str()];
        args.extend_from_slice(extra);
        let res = harmonium(&args, threads);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        out
    };
    let a = run("a", &["--threads", "1"], None);
    let first: Vec<Vec<u8>> = ["hk_correlation.csv", "hk_spectrum.csv", "hk_peaks.json"]
        .iter()
        .map(|f| fs::read(a.join(f)).unwrap())
        .collect();
    run("a", &["--threads", "2"], None);
    for (f, bytes) in ["hk_correlation.csv", "hk_spectrum.csv", "hk_peaks.json"].iter().zip(&first) {
        assert_eq!(&fs::read(a.join(f)).unwrap(), bytes, "{f} changed on rerun");
    }
    let b = run("b", &[], Some("3"));
    let c = run("c", &["--seed", "4"], None);
    for file in ["hk_correlation.csv", "hk_spectrum.csv", "hk_peaks.json"] {
        let fa = fs::read_to_string(a.join(file)).unwrap();
        let fb = fs::read_to_string(b.join(file)).unwrap();
        // the header records the output directory, which differs
        let body = |s: &str| s.lines().filter(|l| !l.contains("output_dir")).collect::<Vec<_>>().join("\n");
        assert_eq!(body(&fa), body(&fb), "{file}");
    }
    let seeded = fs::read_to_string(c.join("hk_correlation.csv")).unwrap();
    assert!(seeded.contains("# seed: 4"));
    assert_ne!(
        seeded.lines().last(),
        fs::read_to_string(a.join("hk_correlation.csv")).unwrap().lines().last()
    );
}

#[test]
fn spectrum_mode_reads_a_written_series() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let cfg = format!(
        r#"{{"mode": "hk", "params": {{"omega0": 1, "omega_l": 1, "kappa": 1}},
            "hk": {}, "output_dir": {:?}}}"#,
        small_hk(),
        first
    );
    let path = write_config(dir.path(), "hk.json", &cfg);
    assert!(harmonium(&["--config", &path], None).status.success());
    let second = dir.path().join("second");
    let cfg = format!(
        r#"{{"mode": "spectrum", "spectrum": {{"input": {:?}}}, "output_dir": {:?}}}"#,
        first.join("hk_correlation.csv"),
        second
    );
    let path = write_config(dir.path(), "spec.json", &cfg);
    let res = harmonium(&["--config", &path], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let peaks: serde_json::Value = serde_json::from_slice(&fs::read(second.join("peaks.json")).unwrap()).unwrap();
    let original: serde_json::Value =
        serde_json::from_slice(&fs::read(first.join("hk_peaks.json")).unwrap()).unwrap();
    let energies = |v: &serde_json::Value| -> Vec<f64> {
        v.as_array().unwrap().iter().map(|p| p["energy"].as_f64().unwrap()).collect()
    };
    assert_eq!(energies(&peaks), energies(&original));
}

#[test]
fn compare_mode_reports_all_methods() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = format!(
        r#"{{"mode": "compare", "params": {{"omega0": 1, "omega_l": 1, "kappa": 1}},
            "hk": {}, "grid": {{"extent": 8, "n": 64, "dt": 0.05}}, "duration": 10,
            "output_dir": {:?}}}"#,
        small_hk(),
        out
    );
    let path = write_config(dir.path(), "cmp.json", &cfg);
    let res = harmonium(&["--config", &path], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: CompareReport = serde_json::from_slice(&fs::read(out.join("compare.json")).unwrap()).unwrap();
    let wkb: Vec<f64> = report.rows.iter().map(|r| (r.wkb * 100.0).round() / 100.0).collect();
    assert_eq!(wkb, [3.14, 2.84, 3.02]);
    assert!(report.rows.iter().all(|r| r.ivr.is_some() && r.qm.is_some()));
    assert!((0.0..1.0).contains(&report.ivr_discard_fraction));
    for file in ["hk_correlation.csv", "qm_correlation.csv", "qm_peaks.json"] {
        assert!(out.join(file).exists(), "{file}");
    }
    let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(names.iter().all(|n| !n.to_string_lossy().ends_with(".partial")));
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            RunConfig::load(&path).and_then(RunConfig::resolve).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert_eq!(seen, 5);
}
