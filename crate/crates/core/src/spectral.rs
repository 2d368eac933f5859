//! Fourier analysis of autocorrelation series.
//!
//! `S(ω) = (1/2πħ) ∫ dt e^{iωt} c(t)` puts a mode `e^{−iEt/ħ}` at `ω = E/ħ`.
//! Autocorrelations obey `c(−t) = c(t)*`, so the transform is taken over the
//! symmetric record `[−T, T]` built from the one-sided samples.

use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::CorrelationSeries;
use crate::wkb::WkbLevel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

impl Window {
    /// Window value at `t / T` in `[−1, 1]`.
    fn weight(self, x: f64) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => {
                let c = (0.5 * std::f64::consts::PI * x).cos();
                c * c
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hann => "hann",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub window: Window,
    /// FFT length relative to the symmetric record.
    pub padding: usize,
    /// Peak energies are `ħω`.
    pub hbar: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { window: Window::Hann, padding: 4, hbar: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakLabel {
    pub n_r: u32,
    pub m: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub energy: f64,
    pub height: f64,
    pub n_r: Option<u32>,
    pub m: Option<i32>,
    /// |energy − E_WKB| of the assigned level.
    pub distance: Option<f64>,
}

impl Peak {
    fn unlabeled(energy: f64, height: f64) -> Self {
        Peak { energy, height, n_r: None, m: None, distance: None }
    }

    pub fn label(&self) -> Option<PeakLabel> {
        Some(PeakLabel { n_r: self.n_r?, m: self.m? })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Ascending, uniform.
    pub omegas: Vec<f64>,
    pub intensity: Vec<f64>,
    pub peaks: Vec<Peak>,
    pub window: Window,
    /// One-sided signal length T.
    pub duration: f64,
    /// Natural resolution 2π/(2T) of the symmetric record.
    pub resolution: f64,
    pub hbar: f64,
}

pub fn spectrum(series: &CorrelationSeries, window: Window) -> Result<SpectrumResult> {
    spectrum_with(series, &SpectrumOptions { window, ..Default::default() })
}

/// Windowed transform of the symmetric record on a zero-padded FFT grid.
///
/// Intensities are `|S|` normalized by the window sum, so a unit-amplitude
/// mode produces a peak of height ≈ 1 and heights estimate `|c_n|²`.
pub fn spectrum_with(series: &CorrelationSeries, opts: &SpectrumOptions) -> Result<SpectrumResult> {
    let dt = series.spacing()?;
    if opts.padding < 1 || !(opts.hbar > 0.0) {
        return Err(Error::InvalidParameter("padding ≥ 1 and hbar > 0 required".into()));
    }
    let n = series.len();
    let duration = dt * (n - 1) as f64;
    let span = 2 * n - 1;
    let len = opts.padding * span;
    let mut buf = vec![Complex64::default(); len];
    let mut wsum = 0.0;
    for (k, c) in series.values.iter().enumerate() {
        let w = opts.window.weight(k as f64 / n as f64);
        buf[k] = c * w;
        wsum += w;
        if k > 0 {
            buf[len - k] = c.conj() * w;
            wsum += w;
        }
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);

    let d_omega = 2.0 * std::f64::consts::PI / (len as f64 * dt);
    let half = len / 2;
    let mut omegas = Vec::with_capacity(len);
    let mut intensity = Vec::with_capacity(len);
    // negative frequencies first
    for (j, v) in buf.iter().enumerate().skip(half + 1) {
        omegas.push((j as f64 - len as f64) * d_omega);
        intensity.push(v.norm() / wsum);
    }
    for (j, v) in buf.iter().enumerate().take(half + 1) {
        omegas.push(j as f64 * d_omega);
        intensity.push(v.norm() / wsum);
    }
    Ok(SpectrumResult {
        omegas,
        intensity,
        peaks: Vec::new(),
        window: opts.window,
        duration,
        resolution: std::f64::consts::PI / duration,
        hbar: opts.hbar,
    })
}

impl SpectrumResult {
    pub fn grid_spacing(&self) -> f64 {
        self.omegas[1] - self.omegas[0]
    }

    /// Copy restricted to `lo ≤ ħω ≤ hi`.
    pub fn restricted(&self, lo: f64, hi: f64) -> SpectrumResult {
        let (omegas, intensity) = self
            .omegas
            .iter()
            .zip(&self.intensity)
            .filter(|(w, _)| (lo..=hi).contains(&(**w * self.hbar)))
            .map(|(w, s)| (*w, *s))
            .unzip();
        SpectrumResult {
            omegas,
            intensity,
            peaks: self.peaks.iter().filter(|p| (lo..=hi).contains(&p.energy)).copied().collect(),
            ..self.clone()
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W, header: &[(String, String)]) -> Result<()> {
        writeln!(out, "# window: {}", self.window.name())?;
        writeln!(out, "# duration: {}", self.duration)?;
        writeln!(out, "# resolution: {}", self.resolution)?;
        for (k, v) in header {
            writeln!(out, "# {}: {}", k, v.replace('\n', " "))?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "intensity"]).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        for (o, s) in self.omegas.iter().zip(&self.intensity) {
            w.write_record([o.to_string(), s.to_string()])
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Peak floor, as a fraction of the tallest peak, used when none is given.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.05;

/// Local maxima above `threshold · max`, refined by a three-point parabola,
/// sorted by energy.
pub fn find_peaks(spec: &SpectrumResult, threshold: f64) -> Vec<Peak> {
    let y = &spec.intensity;
    if y.len() < 3 {
        return Vec::new();
    }
    let max = y.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Vec::new();
    }
    let floor = threshold * max;
    let step = spec.grid_spacing();
    let mut peaks = Vec::new();
    for i in 1..y.len() - 1 {
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        if b > a && b >= c && b >= floor {
            let curvature = a - 2.0 * b + c;
            let (offset, height) = if curvature < 0.0 {
                let d = 0.5 * (a - c) / curvature;
                (d, b - 0.25 * (a - c) * d)
            } else {
                (0.0, b)
            };
            let omega = spec.omegas[i] + offset * step;
            peaks.push(Peak::unlabeled(omega * spec.hbar, height));
        }
    }
    peaks
}

/// Assigns every peak the `(n_r, m)` of the nearest level.
pub fn label_peaks(peaks: &[Peak], levels: &[WkbLevel]) -> Vec<Peak> {
    peaks
        .iter()
        .map(|p| match nearest_level(p.energy, levels) {
            Some(l) => Peak {
                n_r: Some(l.n_r),
                m: Some(l.m),
                distance: Some((p.energy - l.energy).abs()),
                ..*p
            },
            None => *p,
        })
        .collect()
}

fn nearest_level(energy: f64, levels: &[WkbLevel]) -> Option<&WkbLevel> {
    levels.iter().min_by(|a, b| {
        (a.energy - energy).abs().total_cmp(&(b.energy - energy).abs())
    })
}

/// The peak closest to `energy`.
pub fn nearest_peak(peaks: &[Peak], energy: f64) -> Option<&Peak> {
    peaks.iter().min_by(|a, b| (a.energy - energy).abs().total_cmp(&(b.energy - energy).abs()))
}
