//! Command-line runs driven by a JSON configuration.
//!
//! ```text
//! harmonium --config run.json [--mode compare] [--seed 7] [--threads 8]
//! ```
//!
//! Every artifact is computed in memory first and only then written, so a
//! failed run leaves no files behind. Exit codes: 2 for configuration
//! errors, 3 for numerical failures, 4 for I/O errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hk::{self, GaussianState, HkConfig};
use crate::model::DotParameters;
use crate::qmref::{self, GridSpec};
use crate::series::CorrelationSeries;
use crate::spectral::{self, Peak, SpectrumOptions, SpectrumResult, Window};
use crate::wkb;

/// Environment variable read for the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "HARMONIUM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Wkb,
    Hk,
    Qm,
    Spectrum,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub q: [f64; 2],
    pub p: [f64; 2],
    pub alpha: f64,
}

impl Default for PacketConfig {
    fn default() -> Self {
        PacketConfig { q: [1.0, 0.0], p: [0.0, -1.0], alpha: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_padding")]
    pub padding: usize,
    /// Correlation CSV analysed in `spectrum` mode.
    #[serde(default)]
    pub input: Option<PathBuf>,
}

fn default_threshold() -> f64 {
    spectral::DEFAULT_PEAK_THRESHOLD
}

fn default_padding() -> usize {
    4
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection { threshold: default_threshold(), padding: default_padding(), input: None }
    }
}

/// Quantum-number ranges of the WKB table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WkbSection {
    pub n_r_max: u32,
    pub m_min: i32,
    pub m_max: i32,
}

impl Default for WkbSection {
    fn default() -> Self {
        WkbSection { n_r_max: 1, m_min: 0, m_max: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub params: Option<DotParameters>,
    #[serde(default)]
    pub state: PacketConfig,
    #[serde(default)]
    pub hk: Option<HkConfig>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Propagation length of the grid reference.
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default)]
    pub window: Window,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub wkb: WkbSection,
    pub output_dir: PathBuf,
    /// Overrides `hk.seed` when present.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_duration() -> f64 {
    200.0
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Folds `seed` into the HK section and checks mode-required sections.
    pub fn resolve(mut self) -> Result<Self> {
        if let (Some(seed), Some(hk)) = (self.seed, self.hk.as_mut()) {
            hk.seed = seed;
        }
        let need = |present: bool, section: &str| -> Result<()> {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("mode {:?} requires the `{section}` section", self.mode)))
            }
        };
        match self.mode {
            Mode::Wkb => need(self.params.is_some(), "params")?,
            Mode::Hk => {
                need(self.params.is_some(), "params")?;
                need(self.hk.is_some(), "hk")?;
            }
            Mode::Qm => {
                need(self.params.is_some(), "params")?;
                need(self.grid.is_some(), "grid")?;
            }
            Mode::Spectrum => need(self.spectrum.input.is_some(), "spectrum.input")?,
            Mode::Compare => {
                need(self.params.is_some(), "params")?;
                need(self.hk.is_some(), "hk")?;
                need(self.grid.is_some(), "grid")?;
            }
        }
        if let Some(hk) = &self.hk {
            hk.validate().map_err(as_config)?;
        }
        if let Some(grid) = &self.grid {
            grid.validate().map_err(as_config)?;
            if !(self.duration > 0.0) {
                return Err(Error::Config("duration must be positive".into()));
            }
        }
        if !(self.spectrum.threshold > 0.0 && self.spectrum.threshold < 1.0) {
            return Err(Error::Config("spectrum.threshold must lie in (0, 1)".into()));
        }
        if self.wkb.m_min > self.wkb.m_max {
            return Err(Error::Config("wkb.m_min exceeds wkb.m_max".into()));
        }
        self.packet().map_err(as_config)?;
        Ok(self)
    }

    pub fn packet(&self) -> Result<GaussianState> {
        GaussianState::isotropic(self.state.q, self.state.p, self.state.alpha)
    }

    fn params(&self) -> DotParameters {
        self.params.expect("checked by resolve")
    }

    fn spectrum_options(&self) -> SpectrumOptions {
        SpectrumOptions {
            window: self.window,
            padding: self.spectrum.padding,
            hbar: self.params.map_or(1.0, |p| p.hbar()),
        }
    }

    /// Resolved configuration as a single JSON line for file headers.
    pub fn header_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// One row of the side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n_r: u32,
    pub m: i32,
    pub wkb: f64,
    pub ivr: Option<f64>,
    pub qm: Option<f64>,
    pub ivr_minus_wkb: Option<f64>,
    pub qm_minus_wkb: Option<f64>,
    /// |IVR − QM| / QM
    pub ivr_qm_relative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub config: RunConfig,
    pub rows: Vec<CompareRow>,
    pub ivr_peaks: Vec<Peak>,
    pub qm_peaks: Vec<Peak>,
    pub ivr_discard_fraction: f64,
}

/// Rows for `n_r = 0`, `m = 0, 1, 2`: each method contributes the peak
/// nearest to the WKB level.
pub fn compare_rows(levels: &[wkb::WkbLevel], ivr: &[Peak], qm: &[Peak]) -> Vec<CompareRow> {
    levels
        .iter()
        .map(|l| {
            let pick = |peaks: &[Peak]| spectral::nearest_peak(peaks, l.energy).map(|p| p.energy);
            let (i, q) = (pick(ivr), pick(qm));
            CompareRow {
                n_r: l.n_r,
                m: l.m,
                wkb: l.energy,
                ivr: i,
                qm: q,
                ivr_minus_wkb: i.map(|e| e - l.energy),
                qm_minus_wkb: q.map(|e| e - l.energy),
                ivr_qm_relative: i.zip(q).map(|(i, q)| (i - q).abs() / q.abs()),
            }
        })
        .collect()
}

/// Named file contents waiting to be written.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn push(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes every file through a temporary name; on failure nothing is left.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut staged = Vec::new();
        let result = (|| -> Result<()> {
            for (name, bytes) in &self.files {
                let tmp = dir.join(format!(".{name}.partial"));
                staged.push(tmp.clone());
                fs::write(&tmp, bytes)?;
            }
            Ok(())
        })();
        if let Err(e) = result {
            for tmp in &staged {
                let _ = fs::remove_file(tmp);
            }
            return Err(e);
        }
        let mut out = Vec::new();
        for ((name, _), tmp) in self.files.iter().zip(&staged) {
            let path = dir.join(name);
            if let Err(e) = fs::rename(tmp, &path) {
                for p in out.iter().chain(staged.iter()) {
                    let _ = fs::remove_file(p);
                }
                return Err(e.into());
            }
            out.push(path);
        }
        Ok(out)
    }
}

fn header(cfg: &RunConfig) -> Vec<(String, String)> {
    vec![("config".to_string(), cfg.header_line())]
}

fn series_bytes(series: &CorrelationSeries, cfg: &RunConfig) -> Result<Vec<u8>> {
    let mut s = series.clone();
    s.metadata.extend(header(cfg));
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    Ok(buf)
}

fn spectrum_bytes(spec: &SpectrumResult, cfg: &RunConfig) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    spec.write_csv(&mut buf, &header(cfg))?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Spectrum with labelled peaks. Grid spectra get the Crank–Nicolson
/// energy correction when `cn_dt` is given.
fn analyse(
    series: &CorrelationSeries,
    cfg: &RunConfig,
    levels: &[wkb::WkbLevel],
    cn_dt: Option<f64>,
) -> Result<SpectrumResult> {
    let mut spec = spectral::spectrum_with(series, &cfg.spectrum_options())?;
    let mut peaks = spectral::find_peaks(&spec, cfg.spectrum.threshold);
    if let (Some(dt), Some(p)) = (cn_dt, cfg.params) {
        for peak in &mut peaks {
            peak.energy = qmref::crank_nicolson_energy(peak.energy / p.hbar(), dt, p.hbar());
        }
    }
    spec.peaks = if levels.is_empty() { peaks } else { spectral::label_peaks(&peaks, levels) };
    Ok(spec)
}

/// Levels used to label peaks: `n_r ≤ 2`, `|m| ≤ 3`.
fn label_levels(params: &DotParameters) -> Result<Vec<wkb::WkbLevel>> {
    wkb::wkb_table(0..=2, -3..=3, params)
}

struct Outcome {
    series: CorrelationSeries,
    spectrum: SpectrumResult,
}

fn run_hk(cfg: &RunConfig, levels: &[wkb::WkbLevel]) -> Result<Outcome> {
    let hk_cfg = cfg.hk.expect("checked by resolve");
    let mut series = hk::autocorrelation(&cfg.packet()?, &cfg.params(), &hk_cfg)?;
    series.push_metadata("source", "herman-kluk");
    let spectrum = analyse(&series, cfg, levels, None)?;
    Ok(Outcome { series, spectrum })
}

fn run_qm(cfg: &RunConfig, levels: &[wkb::WkbLevel]) -> Result<Outcome> {
    let grid = cfg.grid.expect("checked by resolve");
    let stride = ((0.05 / grid.dt).round() as usize).max(1);
    let series = qmref::quantum_autocorrelation(&cfg.packet()?, &cfg.params(), &grid, cfg.duration, stride)?;
    let spectrum = analyse(&series, cfg, levels, Some(grid.dt))?;
    Ok(Outcome { series, spectrum })
}

fn push_outcome(out: &mut Artifacts, prefix: &str, o: &Outcome, cfg: &RunConfig) -> Result<()> {
    out.push(&format!("{prefix}_correlation.csv"), series_bytes(&o.series, cfg)?);
    out.push(&format!("{prefix}_spectrum.csv"), spectrum_bytes(&o.spectrum, cfg)?);
    out.push(&format!("{prefix}_peaks.json"), json_bytes(&o.spectrum.peaks)?);
    Ok(())
}

/// Computes all artifacts of a resolved configuration without touching disk.
pub fn execute(cfg: &RunConfig) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    match cfg.mode {
        Mode::Wkb => {
            let w = cfg.wkb;
            let table = wkb::wkb_table(0..=w.n_r_max, w.m_min..=w.m_max, &cfg.params())?;
            let mut buf = Vec::new();
            wkb::write_table_csv(&table, &cfg.params(), &mut buf, &header(cfg))?;
            out.push("wkb_table.csv", buf);
        }
        Mode::Hk => {
            let levels = label_levels(&cfg.params())?;
            push_outcome(&mut out, "hk", &run_hk(cfg, &levels)?, cfg)?;
        }
        Mode::Qm => {
            let levels = label_levels(&cfg.params())?;
            push_outcome(&mut out, "qm", &run_qm(cfg, &levels)?, cfg)?;
        }
        Mode::Spectrum => {
            let path = cfg.spectrum.input.as_ref().expect("checked by resolve");
            let file = fs::File::open(path)?;
            let series = CorrelationSeries::read_csv(std::io::BufReader::new(file))?;
            let levels = match cfg.params {
                Some(p) => label_levels(&p)?,
                None => Vec::new(),
            };
            let spec = analyse(&series, cfg, &levels, None)?;
            out.push("spectrum.csv", spectrum_bytes(&spec, cfg)?);
            out.push("peaks.json", json_bytes(&spec.peaks)?);
        }
        Mode::Compare => {
            let params = cfg.params();
            let levels = label_levels(&params)?;
            let ivr = run_hk(cfg, &levels)?;
            let qm = run_qm(cfg, &levels)?;
            let rows_levels = wkb::wkb_table(0..=0, 0..=2, &params)?;
            let report = CompareReport {
                config: cfg.clone(),
                rows: compare_rows(&rows_levels, &ivr.spectrum.peaks, &qm.spectrum.peaks),
                ivr_peaks: ivr.spectrum.peaks.clone(),
                qm_peaks: qm.spectrum.peaks.clone(),
                ivr_discard_fraction: ivr.series.discard_fraction(),
            };
            push_outcome(&mut out, "hk", &ivr, cfg)?;
            push_outcome(&mut out, "qm", &qm, cfg)?;
            out.push("compare.json", json_bytes(&report)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "harmonium", about = "Semiclassical and grid spectra of a two-electron quantum dot")]
pub struct Args {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the mode given in the configuration.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Overrides the Monte-Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for the trajectory ensemble (0 = all cores).
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

/// Loads, overrides and validates the configuration named by `args`.
pub fn load_config(args: &Args) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    cfg.resolve()
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 4,
        e if e.is_numerical() => 3,
        _ => 2,
    }
}

/// Full run: returns the written paths.
pub fn run(args: &Args) -> Result<Vec<PathBuf>> {
    let cfg = load_config(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| execute(&cfg))?;
    artifacts.commit(&cfg.output_dir)
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
