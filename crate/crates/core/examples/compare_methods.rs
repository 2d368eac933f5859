//! WKB, Herman–Kluk and grid levels side by side through the run
//! configuration used by the command-line tool. Small sizes keep it quick;
//! the shipped `configs/compare.json` is the full-size run.

use harmonium::cli::{self, CompareReport, Mode, RunConfig};
use harmonium::dynamics::IntegratorConfig;
use harmonium::hk::HkConfig;
use harmonium::model::DotParameters;
use harmonium::qmref::GridSpec;

fn main() -> harmonium::Result<()> {
    let text = r#"{"mode": "compare", "params": {"omega0": 1, "omega_l": 1, "kappa": 1}, "output_dir": "compare-out"}"#;
    let mut cfg = RunConfig::from_json(text)?;
    cfg.hk = Some(HkConfig {
        n_trajectories: 10_000,
        seed: 5,
        record_stride: 5,
        integrator: IntegratorConfig::new(0.01, 8000),
    });
    cfg.grid = Some(GridSpec::new(8.0, 128, 0.05));
    cfg.duration = 80.0;
    cfg.spectrum.threshold = 0.1;
    assert_eq!(cfg.mode, Mode::Compare);
    let params: DotParameters = cfg.params.unwrap();
    println!("omega = {:.4}", params.omega());

    let artifacts = cli::execute(&cfg.resolve()?)?;
    let report: CompareReport = serde_json::from_slice(artifacts.get("compare.json").unwrap())?;
    println!("{:>3} {:>8} {:>8} {:>8} {:>9}", "m", "WKB", "IVR", "grid", "|IVR-QM|");
    for row in &report.rows {
        let show = |v: Option<f64>| v.map_or("-".into(), |e| format!("{e:.4}"));
        println!(
            "{:>3} {:>8.4} {:>8} {:>8} {:>9}",
            row.m,
            row.wkb,
            show(row.ivr),
            show(row.qm),
            row.ivr_qm_relative.map_or("-".into(), |r| format!("{:.2}%", 100.0 * r))
        );
    }
    println!("discarded trajectories: {:.1}%", 100.0 * report.ivr_discard_fraction);
    println!("files (not written): {}", artifacts.names().collect::<Vec<_>>().join(", "));
    Ok(())
}
