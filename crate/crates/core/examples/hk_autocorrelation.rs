//! Herman–Kluk autocorrelation of the reference packet and its spectrum.
//!
//! ```text
//! cargo run --release --example hk_autocorrelation -- 20000 100 hk.csv
//! ```
//! Arguments: trajectories, propagation time, optional CSV output path.

use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use harmonium::dynamics::IntegratorConfig;
use harmonium::hk::{self, GaussianState, HkConfig};
use harmonium::model::DotParameters;
use harmonium::spectral::{self, Window};
use harmonium::wkb;

fn main() -> harmonium::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(20_000, |s| s.parse().expect("trajectory count"));
    let t: f64 = args.next().map_or(100.0, |s| s.parse().expect("duration"));
    let out = args.next();

    let dot = DotParameters::dimensionless(1.0, 1.0, 1.0)?;
    let dt = 0.01;
    let cfg = HkConfig {
        n_trajectories: n,
        seed: 1,
        record_stride: 5,
        integrator: IntegratorConfig::new(dt, (t / dt).round() as usize),
    };
    let clock = Instant::now();
    let series = hk::autocorrelation(&GaussianState::reference(), &dot, &cfg)?;
    println!(
        "{n} trajectories to t = {t} in {:.1}s, {:.1}% discarded",
        clock.elapsed().as_secs_f64(),
        100.0 * series.discard_fraction()
    );
    for k in (0..series.len()).step_by(series.len() / 10) {
        let c = series.values[k];
        println!("t = {:6.2}  |c| = {:.4} ± {:.4}", series.times[k], c.norm(), series.std_error[k]);
    }

    let mut spec = spectral::spectrum(&series, Window::Hann)?;
    let levels = wkb::wkb_table(0..=1, -1..=3, &dot)?;
    spec.peaks = spectral::label_peaks(&spectral::find_peaks(&spec, 0.1), &levels);
    println!("\npeaks (height ≥ 0.1):");
    for p in &spec.peaks {
        println!("  E = {:.4}  height {:.3}  nearest WKB level (n_r, m) = ({:?}, {:?})", p.energy, p.height, p.n_r.unwrap(), p.m.unwrap());
    }

    if let Some(path) = out {
        series.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("\nwrote {path}");
    }
    Ok(())
}
