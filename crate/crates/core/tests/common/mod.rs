//! Reference data shared by the integration tests: an independent radial
//! eigensolver and the autocorrelation it implies.

#![allow(dead_code)]

use std::f64::consts::PI;

use harmonium::hk::GaussianState;
use harmonium::model::DotParameters;
use nalgebra::Vector2;
use num_complex::Complex64;

pub fn coulomb() -> DotParameters {
    DotParameters::dimensionless(1.0, 1.0, 1.0).unwrap()
}

pub fn free() -> DotParameters {
    DotParameters::dimensionless(1.0, 1.0, 0.0).unwrap()
}

/// Eigenstate of the radial problem with its population in a packet.
#[derive(Debug, Clone, Copy)]
pub struct Level {
    pub n_r: u32,
    pub m: i32,
    pub energy: f64,
    pub weight: f64,
}

/// Symmetric tridiagonal matrix (diagonal `d`, off-diagonal `e`).
struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let off = if i == 0 { 0.0 } else { self.e[i - 1] * self.e[i - 1] };
            q = self.d[i] - x - if i == 0 { 0.0 } else { off / q };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th smallest eigenvalue by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let bound = self
            .d
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let l = if i > 0 { self.e[i - 1].abs() } else { 0.0 };
                let r = self.e.get(i).map_or(0.0, |e| e.abs());
                (d - l - r, d + l + r)
            })
            .fold((f64::MAX, f64::MIN), |a, b| (a.0.min(b.0), a.1.max(b.1)));
        let (mut lo, mut hi) = bound;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-14 * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for `lambda` by inverse iteration.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.d.len();
        let shift = lambda + 1e-10 * lambda.abs().max(1.0);
        let mut x = vec![1.0; n];
        for _ in 0..4 {
            // Thomas algorithm on T − shift
            let mut c = vec![0.0; n];
            let mut y = vec![0.0; n];
            let mut denom = self.d[0] - shift;
            c[0] = if n > 1 { self.e[0] / denom } else { 0.0 };
            y[0] = x[0] / denom;
            for i in 1..n {
                denom = self.d[i] - shift - self.e[i - 1] * c[i - 1];
                if i + 1 < n {
                    c[i] = self.e[i] / denom;
                }
                y[i] = (x[i] - self.e[i - 1] * y[i - 1]) / denom;
            }
            for i in (0..n - 1).rev() {
                y[i] -= c[i] * y[i + 1];
            }
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = y.into_iter().map(|v| v / norm).collect();
        }
        x
    }
}

/// Finite-volume radial solver on a half-integer grid of `points` cells
/// over `[0, r_max]`. Returns the lowest `n_r_max + 1` levels for each `m`
/// with populations `|⟨n_r m|Ψ⟩|²` of `state`.
pub fn radial_levels(
    params: &DotParameters,
    state: &GaussianState,
    ms: impl IntoIterator<Item = i32>,
    n_r_max: u32,
    points: usize,
    r_max: f64,
) -> Vec<Level> {
    let (mu, hbar) = (params.mu(), params.hbar());
    let h = r_max / points as f64;
    let r: Vec<f64> = (0..points).map(|i| (i as f64 + 0.5) * h).collect();
    let kin = hbar * hbar / (2.0 * mu * h * h);
    let angles = 512;
    let mut out = Vec::new();
    for m in ms {
        let centrifugal = hbar * hbar * (m * m) as f64 / (2.0 * mu);
        let d = r
            .iter()
            .map(|&ri| {
                let flux = ((ri + 0.5 * h) + (ri - 0.5 * h)) / ri;
                let pot = 0.5 * mu * params.omega().powi(2) * ri * ri + params.kappa() / ri;
                kin * flux + centrifugal / (ri * ri) + pot
            })
            .collect();
        let e = (0..points - 1).map(|i| -kin * (r[i] + 0.5 * h) / (r[i] * r[i + 1]).sqrt()).collect();
        let tri = Tridiagonal { d, e };
        // angular projection onto L_z = −m ħ
        let k = -m as f64;
        let proj: Vec<Complex64> = r
            .iter()
            .map(|&ri| {
                (0..angles)
                    .map(|a| {
                        let phi = 2.0 * PI * a as f64 / angles as f64;
                        let pos = Vector2::new(ri * phi.cos(), ri * phi.sin());
                        state.amplitude(pos, hbar) * Complex64::from_polar(1.0, -k * phi)
                    })
                    .sum::<Complex64>()
                    / angles as f64
            })
            .collect();
        for n_r in 0..=n_r_max {
            let radial = tri.eigenvalue(n_r as usize);
            let v = tri.eigenvector(radial);
            let amp: Complex64 = v
                .iter()
                .zip(&r)
                .zip(&proj)
                .map(|((vi, ri), f)| f * (vi / (ri * h).sqrt()) * ri * h)
                .sum::<Complex64>()
                * (2.0 * PI).sqrt();
            out.push(Level {
                n_r,
                m,
                energy: radial - m as f64 * hbar * params.omega_l(),
                weight: amp.norm_sqr(),
            });
        }
    }
    out
}

/// `Σ w_n e^{−iE_n t/ħ}` on `t_k = k·dt`.
pub fn expansion_series(levels: &[Level], hbar: f64, dt: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            levels.iter().map(|l| Complex64::from_polar(l.weight, -l.energy * t / hbar)).sum()
        })
        .collect()
}

/// Exact autocorrelation of `state` without Coulomb term: Fock–Darwin
/// energies with populations from the radial solver.
pub fn exact_free_autocorrelation(state: &GaussianState, dt: f64, n: usize) -> (Vec<Complex64>, f64) {
    let params = free();
    let mut levels = radial_levels(&params, state, -14..=14, 14, 1500, 12.0);
    for l in &mut levels {
        l.energy = harmonium::wkb::fock_darwin(l.n_r, l.m, &params);
    }
    let captured = levels.iter().map(|l| l.weight).sum::<f64>();
    (expansion_series(&levels, params.hbar(), dt, n), captured)
}
