//! Peak extraction from a synthetic series: two close levels and a weak one.

use harmonium::series::CorrelationSeries;
use harmonium::spectral::{self, Window};
use num_complex::Complex64;

fn main() -> harmonium::Result<()> {
    let modes = [(2.84, 0.45), (3.02, 0.30), (3.16, 0.05)];
    let dt = 0.05;
    for t_max in [50.0, 100.0, 200.0] {
        let values = (0..=(t_max / dt) as usize)
            .map(|k| {
                let t = k as f64 * dt;
                modes.iter().map(|&(e, w)| Complex64::from_polar(w, -e * t)).sum()
            })
            .collect();
        let series = CorrelationSeries::deterministic(dt, values);
        for window in [Window::Rectangular, Window::Hann] {
            let spec = spectral::spectrum(&series, window)?.restricted(2.5, 3.5);
            let peaks = spectral::find_peaks(&spec, 0.03);
            let mut strongest = peaks.clone();
            strongest.sort_by(|a, b| b.height.total_cmp(&a.height));
            let found: Vec<String> =
                strongest.iter().take(3).map(|p| format!("{:.3} ({:.3})", p.energy, p.height)).collect();
            println!("T = {t_max:5}  {:<11} {:>2} peaks, strongest {}", window.name(), peaks.len(), found.join("  "));
        }
    }
    Ok(())
}
