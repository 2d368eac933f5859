//! Grid reference for the quantum autocorrelation.
//!
//! The relative-motion Hamiltonian
//!
//! ```text
//! H = −ħ²∇²/2μ + μΩ²r²/2 + κ/r − iħω_L (x ∂_y − y ∂_x)
//! ```
//!
//! is discretized with centered finite differences on `[−L, L]²` (zero
//! Dirichlet data outside) and propagated with Crank–Nicolson,
//! `(1 + iτH) ψⁿ⁺¹ = (1 − iτH) ψⁿ` with `τ = dt/2ħ`, solved by BiCGSTAB.
//! An even point count keeps the grid off the Coulomb singularity.

use std::ops::ControlFlow;

use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hk::GaussianState;
use crate::model::DotParameters;
use crate::series::CorrelationSeries;
use crate::spectral::{self, SpectrumResult, Window};
use crate::wkb;

/// Largest tolerated `|‖ψ‖² − 1|`.
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Default largest probability tolerated on the outer two-cell frame.
///
/// With κ > 0 a Gaussian start has a power-law tail in energy, so some
/// probability always reaches the wall (about 4e-6 at L = 8); it does not move
/// the low-lying spectrum. Smooth confined runs stay far below 1e-10.
pub const BOUNDARY_TOLERANCE: f64 = 1e-4;

/// Finite-difference order of the derivative stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// Five-point Laplacian, three-point first derivatives.
    Second,
    /// Nine-point Laplacian, five-point first derivatives.
    #[default]
    Fourth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Half-width L of the square domain.
    pub extent: f64,
    /// Points per axis.
    pub n: usize,
    pub dt: f64,
    #[serde(default)]
    pub stencil: Stencil,
    /// Relative residual at which the linear solve stops.
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    /// Probability on the outer two-cell frame that aborts the run.
    #[serde(default = "default_leak_tol")]
    pub leak_tol: f64,
}

fn default_leak_tol() -> f64 {
    BOUNDARY_TOLERANCE
}

fn default_solver_tol() -> f64 {
    1e-12
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            extent: 8.0,
            n: 256,
            dt: 0.01,
            stencil: Stencil::default(),
            solver_tol: default_solver_tol(),
            leak_tol: default_leak_tol(),
        }
    }
}

impl GridSpec {
    pub fn new(extent: f64, n: usize, dt: f64) -> Self {
        GridSpec { extent, n, dt, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::InvalidParameter("grid extent must be positive".into()));
        }
        if self.n < 64 {
            return Err(Error::InvalidParameter(format!("grid needs n ≥ 64, got {}", self.n)));
        }
        if !self.n.is_multiple_of(2) {
            return Err(Error::InvalidParameter("grid n must be even to avoid r = 0".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter("grid dt must be positive".into()));
        }
        if !(self.solver_tol > 0.0 && self.solver_tol < 1e-6) {
            return Err(Error::InvalidParameter("solver_tol must lie in (0, 1e-6)".into()));
        }
        if !(self.leak_tol > 0.0) {
            return Err(Error::InvalidParameter("leak_tol must be positive".into()));
        }
        Ok(())
    }

    /// `h = 2L/(n − 1)`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.n - 1) as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }
}

/// Amplitudes on the n × n grid, row-major with `x` along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl GridWavefunction {
    pub fn zeros(grid: GridSpec) -> Self {
        GridWavefunction { grid, values: vec![Complex64::default(); grid.n * grid.n] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = grid.n;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            let x = grid.coordinate(i);
            for j in 0..n {
                values.push(f(x, grid.coordinate(j)));
            }
        }
        GridWavefunction { grid, values }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.n + j]
    }

    /// `⟨self|other⟩` as a Riemann sum.
    pub fn inner(&self, other: &GridWavefunction) -> Complex64 {
        let h = self.grid.spacing();
        dot(&self.values, &other.values) * (h * h)
    }

    pub fn norm_sqr(&self) -> f64 {
        let h = self.grid.spacing();
        norm_sqr(&self.values) * h * h
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NonFinite("wavefunction norm"));
        }
        let s = 1.0 / n.sqrt();
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(())
    }

    /// Probability on the outermost two rows and columns.
    pub fn boundary_density(&self) -> f64 {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i < 2 || j < 2 || i >= n - 2 || j >= n - 2 {
                    sum += self.get(i, j).norm_sqr();
                }
            }
        }
        sum * h * h
    }
}

/// Samples `state` on the grid and renormalizes.
pub fn init_packet(state: &GaussianState, grid: &GridSpec, hbar: f64) -> Result<GridWavefunction> {
    grid.validate()?;
    let inside = state.q.iter().all(|c| c.abs() < grid.extent);
    if !inside {
        return Err(Error::DomainTooSmall(format!("packet centre {:?} outside the grid", state.q)));
    }
    let mut psi = GridWavefunction::from_fn(*grid, |x, y| state.amplitude(Vector2::new(x, y), hbar));
    let frame = psi.boundary_density();
    if frame > grid.leak_tol {
        return Err(Error::DomainTooSmall(format!(
            "initial boundary density {frame:.3e} exceeds {:e}",
            grid.leak_tol
        )));
    }
    psi.normalize()?;
    Ok(psi)
}

/// Discrete Hamiltonian on a grid padded by two zero cells per side.
struct GridHamiltonian {
    n: usize,
    stride: usize,
    stencil: Stencil,
    /// Potential plus the kinetic diagonal, on the padded layout.
    diag: Vec<f64>,
    xs: Vec<f64>,
    /// ħ²/(2μh²)
    kin: f64,
    /// ħω_L/h
    rot: f64,
}

impl GridHamiltonian {
    fn new(params: &DotParameters, grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        let n = grid.n;
        let stride = n + 4;
        let h = grid.spacing();
        let hbar = params.hbar();
        let mu = params.mu();
        let kin = hbar * hbar / (2.0 * mu * h * h);
        let centre = match grid.stencil {
            Stencil::Second => 4.0,
            Stencil::Fourth => 5.0,
        };
        let xs: Vec<f64> = (0..n).map(|i| grid.coordinate(i)).collect();
        let w2 = mu * params.omega() * params.omega();
        let mut diag = vec![0.0; stride * stride];
        for i in 0..n {
            for j in 0..n {
                let r2 = xs[i] * xs[i] + xs[j] * xs[j];
                let r = r2.sqrt();
                if r < params.origin_floor() {
                    return Err(Error::SingularOrigin { radius: r });
                }
                let coulomb = params.kappa() * cell_average_inverse_r(xs[i], xs[j], h);
                diag[(i + 2) * stride + j + 2] = 0.5 * w2 * r2 + coulomb + kin * centre;
            }
        }
        Ok(GridHamiltonian {
            n,
            stride,
            stencil: grid.stencil,
            diag,
            xs,
            kin,
            rot: hbar * params.omega_l() / h,
        })
    }

    fn padded_len(&self) -> usize {
        self.stride * self.stride
    }

    fn pad(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.padded_len()];
        for i in 0..self.n {
            let row = (i + 2) * self.stride + 2;
            out[row..row + self.n].copy_from_slice(&values[i * self.n..(i + 1) * self.n]);
        }
        out
    }

    fn unpad(&self, padded: &[Complex64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            let row = (i + 2) * self.stride + 2;
            out.extend_from_slice(&padded[row..row + self.n]);
        }
        out
    }

    /// Unscaled `Σ|ψ|²` over the outer two-cell frame of the interior.
    fn frame_density(&self, padded: &[Complex64]) -> f64 {
        let (n, s) = (self.n, self.stride);
        let mut sum = 0.0;
        for i in 0..n {
            let row = &padded[(i + 2) * s + 2..(i + 2) * s + 2 + n];
            if i < 2 || i >= n - 2 {
                sum += norm_sqr(row);
            } else {
                sum += norm_sqr(&row[..2]) + norm_sqr(&row[n - 2..]);
            }
        }
        sum
    }

    /// `out = Hψ` on the interior; the padding of `out` is left untouched.
    fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        match self.stencil {
            Stencil::Second => self.apply_with::<false, false>(psi, out, 0.0),
            Stencil::Fourth => self.apply_with::<true, false>(psi, out, 0.0),
        }
    }

    /// `out = ψ + iβHψ` on the interior.
    fn apply_cayley(&self, psi: &[Complex64], out: &mut [Complex64], beta: f64) {
        match self.stencil {
            Stencil::Second => self.apply_with::<false, true>(psi, out, beta),
            Stencil::Fourth => self.apply_with::<true, true>(psi, out, beta),
        }
    }

    fn apply_with<const FOURTH: bool, const CAYLEY: bool>(
        &self,
        psi: &[Complex64],
        out: &mut [Complex64],
        beta: f64,
    ) {
        let s = self.stride;
        // stencil weights with ħ²/2μh² and ħω_L/h folded in
        let (near, far, d1, d2) = if FOURTH {
            (16.0 / 12.0 * self.kin, -self.kin / 12.0, 8.0 / 12.0 * self.rot, -self.rot / 12.0)
        } else {
            (self.kin, 0.0, 0.5 * self.rot, 0.0)
        };
        for i in 0..self.n {
            let x = self.xs[i];
            let base = (i + 2) * s + 2;
            let row = base..base + self.n;
            let (c, diag, dst) = (&psi[base - 2 * s..], &self.diag[row.clone()], &mut out[row]);
            // c[2s + j] is the centre of column j
            for j in 0..self.n {
                let k = 2 * s + j;
                let y = self.xs[j];
                let mut kinetic = (c[k - s] + c[k + s] + c[k - 1] + c[k + 1]) * near;
                let mut dx = (c[k + s] - c[k - s]) * d1;
                let mut dy = (c[k + 1] - c[k - 1]) * d1;
                if FOURTH {
                    kinetic += (c[k - 2 * s] + c[k + 2 * s] + c[k - 2] + c[k + 2]) * far;
                    dx += (c[k + 2 * s] - c[k - 2 * s]) * d2;
                    dy += (c[k + 2] - c[k - 2]) * d2;
                }
                // −iħω_L (x ∂_y − y ∂_x) ψ
                let lz = dy * x - dx * y;
                let h = c[k] * diag[j] - kinetic + Complex64::new(lz.im, -lz.re);
                dst[j] = if CAYLEY { c[k] + Complex64::new(-beta * h.im, beta * h.re) } else { h };
            }
        }
    }
}

/// Mean of `1/r` over the cell of side `h` centred on `(x, y)`.
///
/// Point samples of `1/r` converge only at first order near the origin;
/// the cell mean uses the antiderivative `x ln(y + r) + y ln(x + r)`.
/// The integrand is even in both coordinates, so every interval is folded
/// onto `[0, ∞)` and one that crosses an axis is split there.
pub fn cell_average_inverse_r(x: f64, y: f64, h: f64) -> f64 {
    fn xlog(a: f64, b: f64) -> f64 {
        if a == 0.0 { 0.0 } else { a * b.ln() }
    }
    fn f(x: f64, y: f64) -> f64 {
        let r = x.hypot(y);
        xlog(x, y + r) + xlog(y, x + r)
    }
    // folded pieces of [c - h/2, c + h/2] as (lo, hi) with 0 <= lo <= hi
    fn fold(c: f64, h: f64) -> [(f64, f64); 2] {
        let (a, b) = (c - 0.5 * h, c + 0.5 * h);
        if a >= 0.0 {
            [(a, b), (0.0, 0.0)]
        } else if b <= 0.0 {
            [(-b, -a), (0.0, 0.0)]
        } else {
            [(0.0, b), (0.0, -a)]
        }
    }
    let mut sum = 0.0;
    for (x0, x1) in fold(x, h) {
        for (y0, y1) in fold(y, h) {
            if x1 > x0 && y1 > y0 {
                sum += f(x1, y1) - f(x0, y1) - f(x1, y0) + f(x0, y0);
            }
        }
    }
    sum / (h * h)
}

/// `Σ conj(a)·b` with four independent partial sums.
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = [Complex64::default(); 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: Complex64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x.conj() * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l].conj() * y[l];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.chunks_exact(4);
    let tail: f64 = chunks.remainder().iter().map(|v| v.norm_sqr()).sum();
    for x in chunks {
        for l in 0..4 {
            acc[l] += x[l].norm_sqr();
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

/// Crank–Nicolson stepper with reusable work buffers.
struct CrankNicolson {
    ham: GridHamiltonian,
    tau: Complex64,
    tol: f64,
    work: [Vec<Complex64>; 7],
    iterations: usize,
}

const MAX_ITERATIONS: usize = 500;

impl CrankNicolson {
    fn new(params: &DotParameters, grid: &GridSpec) -> Result<Self> {
        let ham = GridHamiltonian::new(params, grid)?;
        let tau = Complex64::new(0.0, 0.5 * grid.dt / params.hbar());
        let zero = vec![Complex64::default(); ham.padded_len()];
        Ok(CrankNicolson {
            ham,
            tau,
            tol: grid.solver_tol,
            work: std::array::from_fn(|_| zero.clone()),
            iterations: 0,
        })
    }

    /// `out = (1 + iτH) v`
    fn apply_lhs(ham: &GridHamiltonian, tau: Complex64, v: &[Complex64], out: &mut [Complex64]) {
        ham.apply_cayley(v, out, tau.im);
    }

    /// One step on the padded vector `psi`, by BiCGSTAB.
    fn step(&mut self, psi: &mut [Complex64]) -> Result<()> {
        let tau = self.tau;
        let ham = &self.ham;
        let [b, r, rhat, p, v, s, t] = &mut self.work;
        ham.apply_cayley(psi, b, -tau.im);
        // first-order guess (1 − 2iτH)ψ = 2b − ψ
        for (x, bi) in psi.iter_mut().zip(b.iter()) {
            *x = 2.0 * bi - *x;
        }
        let b_norm = norm_sqr(b).sqrt();
        Self::apply_lhs(ham, tau, psi, r);
        for (ri, bi) in r.iter_mut().zip(b.iter()) {
            *ri = bi - *ri;
        }
        rhat.copy_from_slice(r);
        p.iter_mut().for_each(|z| *z = Complex64::default());
        v.iter_mut().for_each(|z| *z = Complex64::default());
        let one = Complex64::new(1.0, 0.0);
        let (mut rho, mut alpha, mut omega) = (one, one, one);
        let target = self.tol * b_norm;
        let mut residual = norm_sqr(r).sqrt();
        for it in 0..MAX_ITERATIONS {
            if residual <= target {
                self.iterations += it;
                return Ok(());
            }
            let rho_next = dot(rhat, r);
            let beta = (rho_next / rho) * (alpha / omega);
            rho = rho_next;
            for ((pi, ri), vi) in p.iter_mut().zip(r.iter()).zip(v.iter()) {
                *pi = ri + beta * (*pi - omega * vi);
            }
            Self::apply_lhs(ham, tau, p, v);
            alpha = rho / dot(rhat, v);
            let mut s_norm = 0.0;
            for ((si, ri), vi) in s.iter_mut().zip(r.iter()).zip(v.iter()) {
                *si = ri - alpha * vi;
                s_norm += si.norm_sqr();
            }
            if s_norm.sqrt() <= target {
                for (x, pi) in psi.iter_mut().zip(p.iter()) {
                    *x += alpha * pi;
                }
                self.iterations += it + 1;
                return Ok(());
            }
            Self::apply_lhs(ham, tau, s, t);
            let (mut ts, mut tt) = (Complex64::default(), 0.0);
            for (ti, si) in t.iter().zip(s.iter()) {
                ts += ti.conj() * si;
                tt += ti.norm_sqr();
            }
            omega = ts / tt;
            let mut r_norm = 0.0;
            for ((((x, pi), si), ti), ri) in
                psi.iter_mut().zip(p.iter()).zip(s.iter()).zip(t.iter()).zip(r.iter_mut())
            {
                *x += alpha * pi + omega * si;
                *ri = si - omega * ti;
                r_norm += ri.norm_sqr();
            }
            residual = r_norm.sqrt();
            if !residual.is_finite() {
                break;
            }
        }
        Err(Error::SolverDiverged { residual: residual / b_norm, iterations: MAX_ITERATIONS })
    }
}

/// What the observer of [`evolve`] sees after each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSnapshot {
    pub step: usize,
    pub t: f64,
    /// `⟨ψ(0)|ψ(t)⟩`
    pub overlap: Complex64,
    pub norm_sqr: f64,
    /// Probability on the outer two-cell frame.
    pub boundary: f64,
    /// BiCGSTAB iterations summed over all steps so far.
    pub solver_iterations: usize,
}

/// Advances `psi` by `n_steps`. The observer is called for step 0 and after
/// every step; returning `Break` stops early.
pub fn evolve<F>(
    psi: GridWavefunction,
    params: &DotParameters,
    n_steps: usize,
    mut observer: F,
) -> Result<GridWavefunction>
where
    F: FnMut(&GridSnapshot) -> ControlFlow<()>,
{
    let grid = psi.grid;
    let mut cn = CrankNicolson::new(params, &grid)?;
    let h2 = grid.spacing() * grid.spacing();
    let initial = cn.ham.pad(&psi.values);
    let mut current = initial.clone();
    let frame = psi.boundary_density();
    if frame > grid.leak_tol {
        return Err(Error::BoundaryLeak { density: frame, t: 0.0 });
    }
    let first = GridSnapshot {
        step: 0,
        t: 0.0,
        overlap: dot(&initial, &current) * h2,
        norm_sqr: norm_sqr(&current) * h2,
        boundary: frame,
        solver_iterations: 0,
    };
    if observer(&first).is_break() {
        return Ok(psi);
    }
    for step in 1..=n_steps {
        cn.step(&mut current)?;
        let t = step as f64 * grid.dt;
        let norm = norm_sqr(&current) * h2;
        if !norm.is_finite() {
            return Err(Error::NonFinite("grid wavefunction"));
        }
        let drift = (norm - first.norm_sqr).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::NormDrift { drift, t });
        }
        let boundary = cn.ham.frame_density(&current) * h2;
        if boundary > grid.leak_tol {
            return Err(Error::BoundaryLeak { density: boundary, t });
        }
        let snap = GridSnapshot {
            step,
            t,
            overlap: dot(&initial, &current) * h2,
            norm_sqr: norm,
            boundary,
            solver_iterations: cn.iterations,
        };
        if observer(&snap).is_break() {
            break;
        }
    }
    Ok(GridWavefunction { grid, values: cn.ham.unpad(&current) })
}

/// `Hψ` with the same discretization the propagator uses.
pub fn apply_hamiltonian(psi: &GridWavefunction, params: &DotParameters) -> Result<GridWavefunction> {
    let ham = GridHamiltonian::new(params, &psi.grid)?;
    let padded = ham.pad(&psi.values);
    let mut out = vec![Complex64::default(); padded.len()];
    ham.apply(&padded, &mut out);
    Ok(GridWavefunction { grid: psi.grid, values: ham.unpad(&out) })
}

/// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`
pub fn energy_expectation(psi: &GridWavefunction, params: &DotParameters) -> Result<f64> {
    let hpsi = apply_hamiltonian(psi, params)?;
    Ok(psi.inner(&hpsi).re / psi.norm_sqr())
}

/// Grid autocorrelation up to `t_total`, stored every `record_stride` steps.
pub fn quantum_autocorrelation(
    state: &GaussianState,
    params: &DotParameters,
    grid: &GridSpec,
    t_total: f64,
    record_stride: usize,
) -> Result<CorrelationSeries> {
    if record_stride < 1 || !(t_total > 0.0) {
        return Err(Error::InvalidParameter("need t_total > 0 and record_stride ≥ 1".into()));
    }
    let psi = init_packet(state, grid, params.hbar())?;
    let n_steps = (t_total / grid.dt).round() as usize;
    let mut values = Vec::with_capacity(n_steps / record_stride + 1);
    let mut iterations = 0;
    evolve(psi, params, n_steps, |snap| {
        if snap.step % record_stride == 0 {
            values.push(snap.overlap);
        }
        iterations += 1;
        ControlFlow::Continue(())
    })?;
    let mut series = CorrelationSeries::deterministic(grid.dt * record_stride as f64, values);
    series.push_metadata("source", "grid");
    series.push_metadata("grid_extent", grid.extent);
    series.push_metadata("grid_n", grid.n);
    series.push_metadata("grid_dt", grid.dt);
    series.push_metadata("stencil", format!("{:?}", grid.stencil).to_lowercase());
    series.push_metadata("steps", iterations - 1);
    Ok(series)
}

/// Energy of the eigenstate seen at angular frequency `omega` in a
/// Crank–Nicolson series with step `dt`.
///
/// One step multiplies an eigenstate by `e^{−2i atan(E dt/2ħ)}`, so the
/// time-step error in peak positions can be removed exactly.
pub fn crank_nicolson_energy(omega: f64, dt: f64, hbar: f64) -> f64 {
    2.0 * hbar / dt * (0.5 * omega * dt).tan()
}

/// Hann-windowed spectrum of the grid autocorrelation with peaks labelled by
/// the nearest WKB level (`n_r ≤ 2`, `|m| ≤ 3`). Peak energies are corrected
/// for the time step with [`crank_nicolson_energy`].
pub fn quantum_spectrum(
    state: &GaussianState,
    params: &DotParameters,
    grid: &GridSpec,
    t_total: f64,
) -> Result<SpectrumResult> {
    let stride = ((0.05 / grid.dt).round() as usize).max(1);
    let series = quantum_autocorrelation(state, params, grid, t_total, stride)?;
    let mut spec = spectral::spectrum(&series, Window::Hann)?;
    let levels = wkb::wkb_table(0..=2, -3..=3, params)?;
    let mut peaks = spectral::find_peaks(&spec, spectral::DEFAULT_PEAK_THRESHOLD);
    for p in &mut peaks {
        p.energy = crank_nicolson_energy(p.energy / params.hbar(), grid.dt, params.hbar());
    }
    spec.peaks = spectral::label_peaks(&peaks, &levels);
    Ok(spec)
}
