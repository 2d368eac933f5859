//! Herman–Kluk autocorrelation of a Gaussian wavepacket.
//!
//! The propagated state is expanded in frozen Gaussians
//!
//! ```text
//! ⟨r|g(p,q)⟩ = (det γ / π²)^{1/4} exp{−½(r−q)ᵀγ(r−q) + (i/ħ) pᵀ(r−q)}
//! ```
//!
//! and the correlation `c(t) = ⟨Ψ_α|Ψ_α(t)⟩` becomes a phase-space integral
//!
//! ```text
//! c(t) = ∫ d²p' d²q' / (2πħ)²  ⟨Ψ_α|g(p_t,q_t)⟩ √det h  e^{iS/ħ} ⟨g(p',q')|Ψ_α⟩
//! ```
//!
//! which is sampled by Monte Carlo from `|⟨g(p',q')|Ψ_α⟩|²`.

use std::f64::consts::PI;
use std::ops::ControlFlow;

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, IntegratorConfig, TrajectoryState};
use crate::error::{Error, Result};
use crate::model::{DotParameters, PhasePoint};
pub use crate::series::CorrelationSeries;

/// Gaussian wavepacket with a constant diagonal width matrix γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub q: Vector2<f64>,
    pub p: Vector2<f64>,
    /// Diagonal of γ.
    pub gamma: Vector2<f64>,
}

impl GaussianState {
    pub fn new(q: [f64; 2], p: [f64; 2], gamma: [f64; 2]) -> Result<Self> {
        if gamma.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter("gamma entries must be positive".into()));
        }
        Ok(GaussianState { q: q.into(), p: p.into(), gamma: gamma.into() })
    }

    /// Packet `(2α/π)^{1/2} exp{−α|r−q|² + i pᵀ(r−q)/ħ}`, i.e. γ = 2α·1.
    pub fn isotropic(q: [f64; 2], p: [f64; 2], alpha: f64) -> Result<Self> {
        Self::new(q, p, [2.0 * alpha, 2.0 * alpha])
    }

    /// The packet used for the published time series: q = (1, 0), p = (0, −1), α = 1/4.
    pub fn reference() -> Self {
        Self::isotropic([1.0, 0.0], [0.0, -1.0], 0.25).expect("valid constants")
    }

    /// Same width, centred on `point`.
    pub fn at(&self, point: &PhasePoint) -> Self {
        GaussianState { q: point.q, p: point.p, gamma: self.gamma }
    }

    pub fn center(&self) -> PhasePoint {
        PhasePoint { q: self.q, p: self.p }
    }

    /// Normalized amplitude ⟨r|g⟩.
    pub fn amplitude(&self, r: Vector2<f64>, hbar: f64) -> Complex64 {
        let d = r - self.q;
        let norm = (self.gamma.x * self.gamma.y / (PI * PI)).powf(0.25);
        let re = -0.5 * (self.gamma.x * d.x * d.x + self.gamma.y * d.y * d.y);
        let im = self.p.dot(&d) / hbar;
        Complex64::new(re, im).exp() * norm
    }
}

/// `⟨bra|ket⟩` for two Gaussians of equal width.
pub fn overlap_gaussian(bra: &GaussianState, ket: &GaussianState, hbar: f64) -> Result<Complex64> {
    if bra.gamma != ket.gamma {
        return Err(Error::MismatchedWidth);
    }
    Ok(overlap_same_width(bra.q, bra.p, ket.q, ket.p, &bra.gamma, hbar))
}

#[inline]
fn overlap_same_width(
    q1: Vector2<f64>,
    p1: Vector2<f64>,
    q2: Vector2<f64>,
    p2: Vector2<f64>,
    gamma: &Vector2<f64>,
    hbar: f64,
) -> Complex64 {
    let dq = q1 - q2;
    let dp = p1 - p2;
    let re = -0.25 * (gamma.x * dq.x * dq.x + gamma.y * dq.y * dq.y)
        - 0.25 / (hbar * hbar) * (dp.x * dp.x / gamma.x + dp.y * dp.y / gamma.y);
    let im = 0.5 / hbar * dq.dot(&(p1 + p2));
    Complex64::new(re, im).exp()
}

/// The matrix `h = ½(m₁₁ + γ m₂₂ γ⁻¹ − iħ γ m₂₁ − (1/iħ) m₁₂ γ⁻¹)` and its determinant.
pub fn hk_prefactor(
    m: &Matrix4<f64>,
    gamma: &Vector2<f64>,
    hbar: f64,
) -> (Matrix2<Complex64>, Complex64) {
    let mut h = Matrix2::<Complex64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let m11 = m[(i, j)];
            let m12 = m[(i, j + 2)];
            let m21 = m[(i + 2, j)];
            let m22 = m[(i + 2, j + 2)];
            let re = m11 + gamma[i] * m22 / gamma[j];
            // −iħγ m₂₁ + (i/ħ) m₁₂ γ⁻¹
            let im = -hbar * gamma[i] * m21 + m12 / (hbar * gamma[j]);
            h[(i, j)] = Complex64::new(0.5 * re, 0.5 * im);
        }
    }
    let det = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
    (h, det)
}

/// Default largest accepted phase change of det h between consecutive samples.
pub const DEFAULT_MAX_PHASE_JUMP: f64 = PI / 2.0;

/// Follows the phase of a complex sequence so its square root stays continuous.
#[derive(Debug, Clone)]
pub struct BranchTracker {
    last: Complex64,
    phase: f64,
    index: usize,
    max_jump: f64,
}

impl BranchTracker {
    /// Starts on the principal branch of `first`.
    pub fn new(first: Complex64) -> Self {
        Self::with_max_jump(first, DEFAULT_MAX_PHASE_JUMP)
    }

    pub fn with_max_jump(first: Complex64, max_jump: f64) -> Self {
        BranchTracker { last: first, phase: first.arg(), index: 0, max_jump }
    }

    pub fn sqrt(&self) -> Complex64 {
        Complex64::from_polar(self.last.norm().sqrt(), 0.5 * self.phase)
    }

    /// Appends the next value and returns its continuous square root.
    pub fn push(&mut self, z: Complex64) -> Result<Complex64> {
        self.index += 1;
        let jump = (z * self.last.conj()).arg();
        if !(jump.abs() < self.max_jump) || z.norm() == 0.0 {
            return Err(Error::BranchAmbiguity { index: self.index, jump });
        }
        self.phase += jump;
        self.last = z;
        Ok(self.sqrt())
    }
}

/// Square roots of `series` on the branch that makes the result continuous.
pub fn continuous_sqrt(series: &[Complex64]) -> Result<Vec<Complex64>> {
    let Some((&first, rest)) = series.split_first() else {
        return Ok(Vec::new());
    };
    let mut tracker = BranchTracker::new(first);
    let mut out = Vec::with_capacity(series.len());
    out.push(tracker.sqrt());
    for &z in rest {
        out.push(tracker.push(z)?);
    }
    Ok(out)
}

/// An initial condition with its Monte-Carlo weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSample {
    pub point: PhasePoint,
    /// `⟨g(p',q')|Ψ_α⟩ (2πħ)⁻² / density`, which reduces to `1 / conj⟨g|Ψ_α⟩`.
    pub weight: Complex64,
}

impl WeightedSample {
    /// Weight for an arbitrary point drawn from the `|⟨g|Ψ_α⟩|²` density.
    pub fn at(point: PhasePoint, state: &GaussianState, hbar: f64) -> Self {
        let ov = overlap_same_width(point.q, point.p, state.q, state.p, &state.gamma, hbar);
        WeightedSample { point, weight: ov / ov.norm_sqr() }
    }
}

/// Draws sample `index` of the stream identified by `seed`.
///
/// Every trajectory owns its own ChaCha stream, so results do not depend on
/// how samples are split across workers.
pub fn draw_sample(state: &GaussianState, index: u64, seed: u64, hbar: f64) -> WeightedSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let (gx, gy) = (state.gamma.x, state.gamma.y);
    let q = state.q + Vector2::new(normal() / gx.sqrt(), normal() / gy.sqrt());
    let p = state.p + Vector2::new(normal() * hbar * gx.sqrt(), normal() * hbar * gy.sqrt());
    WeightedSample::at(PhasePoint { q, p }, state, hbar)
}

/// `n` weighted samples from `|⟨g(p',q')|Ψ_α⟩|²`.
pub fn sample_initial(state: &GaussianState, n: usize, seed: u64, hbar: f64) -> Vec<WeightedSample> {
    (0..n as u64).map(|i| draw_sample(state, i, seed, hbar)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HkConfig {
    pub n_trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    /// Integration steps between stored correlation samples.
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    pub integrator: IntegratorConfig,
}

fn default_stride() -> usize {
    5
}

impl Default for HkConfig {
    fn default() -> Self {
        HkConfig {
            n_trajectories: 1_000_000,
            seed: 0,
            record_stride: default_stride(),
            integrator: IntegratorConfig::default(),
        }
    }
}

impl HkConfig {
    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if self.n_trajectories < 1 {
            return Err(Error::InvalidParameter("n_trajectories must be at least 1".into()));
        }
        if self.record_stride < 1 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_records(&self) -> usize {
        self.integrator.n_steps / self.record_stride + 1
    }

    pub fn sample_interval(&self) -> f64 {
        self.integrator.dt * self.record_stride as f64
    }
}

/// Trajectories per work unit. Fixed so the reduction order never depends
/// on the thread count.
const BLOCK: usize = 512;

#[derive(Clone)]
struct Partial {
    sum: Vec<Complex64>,
    sum_sq: Vec<f64>,
    used: usize,
    discarded: usize,
}

impl Partial {
    fn new(n: usize) -> Self {
        Partial { sum: vec![Complex64::default(); n], sum_sq: vec![0.0; n], used: 0, discarded: 0 }
    }

    fn absorb(&mut self, other: &Partial) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.used += other.used;
        self.discarded += other.discarded;
    }
}

/// Contribution of one trajectory at every record time, or `None` if it was discarded.
fn trajectory_terms(
    sample: &WeightedSample,
    state: &GaussianState,
    params: &DotParameters,
    cfg: &HkConfig,
    buffer: &mut Vec<Complex64>,
) -> Result<bool> {
    let hbar = params.hbar();
    let stride = cfg.record_stride;
    buffer.clear();
    let mut tracker: Option<BranchTracker> = None;
    let mut observe = |k: usize, s: &TrajectoryState| {
        let (_, det) = hk_prefactor(&s.monodromy, &state.gamma, hbar);
        let root = match tracker.as_mut() {
            None => {
                let t = BranchTracker::new(det);
                let r = t.sqrt();
                tracker = Some(t);
                r
            }
            Some(t) => match t.push(det) {
                Ok(r) => r,
                Err(_) => return ControlFlow::Break(()),
            },
        };
        if k.is_multiple_of(stride) {
            let ket = overlap_same_width(state.q, state.p, s.point.q, s.point.p, &state.gamma, hbar);
            let phase = Complex64::from_polar(1.0, s.action / hbar);
            buffer.push(sample.weight * root * phase * ket);
        }
        ControlFlow::Continue(())
    };
    let run = dynamics::propagate(sample.point, params, &cfg.integrator, &mut observe);
    match run {
        Ok(out) => Ok(!out.is_discarded()),
        // a sampled point inside the Coulomb floor is a discarded trajectory
        Err(Error::SingularOrigin { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

fn accumulate<S>(
    n: usize,
    sampler: S,
    state: &GaussianState,
    params: &DotParameters,
    cfg: &HkConfig,
) -> Result<Partial>
where
    S: Fn(usize) -> WeightedSample + Sync,
{
    let n_records = cfg.n_records();
    let n_blocks = n.div_ceil(BLOCK);
    let partials: Vec<Result<Partial>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut part = Partial::new(n_records);
            let mut buffer = Vec::with_capacity(n_records);
            for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                let sample = sampler(i);
                if trajectory_terms(&sample, state, params, cfg, &mut buffer)? {
                    debug_assert_eq!(buffer.len(), n_records);
                    for ((acc, sq), x) in part.sum.iter_mut().zip(&mut part.sum_sq).zip(&buffer) {
                        *acc += x;
                        *sq += x.norm_sqr();
                    }
                    part.used += 1;
                } else {
                    part.discarded += 1;
                }
            }
            Ok(part)
        })
        .collect();
    let mut total = Partial::new(n_records);
    for part in partials {
        total.absorb(&part?);
    }
    Ok(total)
}

fn finish(total: Partial, state: &GaussianState, cfg: &HkConfig, seed: u64, n: usize) -> CorrelationSeries {
    let dt = cfg.sample_interval();
    let used = total.used.max(1) as f64;
    let values: Vec<Complex64> = total.sum.iter().map(|s| s / used).collect();
    let std_error = values
        .iter()
        .zip(&total.sum_sq)
        .map(|(mean, sq)| ((sq / used - mean.norm_sqr()).max(0.0) / used).sqrt())
        .collect();
    let mut series = CorrelationSeries {
        times: (0..values.len()).map(|k| k as f64 * dt).collect(),
        values,
        std_error,
        n_trajectories: n,
        n_used: total.used,
        n_discarded: total.discarded,
        seed,
        metadata: Vec::new(),
    };
    series.push_metadata("method", "herman-kluk");
    series.push_metadata("dt", cfg.integrator.dt);
    series.push_metadata("record_stride", cfg.record_stride);
    series.push_metadata("packet_q", format!("{} {}", state.q.x, state.q.y));
    series.push_metadata("packet_p", format!("{} {}", state.p.x, state.p.y));
    series.push_metadata("packet_gamma", format!("{} {}", state.gamma.x, state.gamma.y));
    series
}

/// Herman–Kluk estimate of `⟨Ψ_α|Ψ_α(t)⟩` on `t_k = k · record_stride · dt`.
///
/// Trajectories that leave the energy tolerance, hit the origin floor or
/// rotate det h too fast for the branch tracker are dropped; the average runs
/// over the trajectories that remain.
pub fn autocorrelation(
    state: &GaussianState,
    params: &DotParameters,
    cfg: &HkConfig,
) -> Result<CorrelationSeries> {
    cfg.validate()?;
    let hbar = params.hbar();
    let seed = cfg.seed;
    let total = accumulate(
        cfg.n_trajectories,
        |i| draw_sample(state, i as u64, seed, hbar),
        state,
        params,
        cfg,
    )?;
    Ok(finish(total, state, cfg, seed, cfg.n_trajectories))
}

/// Same estimator over caller-supplied samples.
pub fn autocorrelation_from_samples(
    state: &GaussianState,
    params: &DotParameters,
    cfg: &HkConfig,
    samples: &[WeightedSample],
) -> Result<CorrelationSeries> {
    cfg.integrator.validate()?;
    if cfg.record_stride < 1 || samples.is_empty() {
        return Err(Error::InvalidParameter("need samples and a positive stride".into()));
    }
    let total = accumulate(samples.len(), |i| samples[i], state, params, cfg)?;
    Ok(finish(total, state, cfg, cfg.seed, samples.len()))
}
