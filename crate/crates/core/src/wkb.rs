//! Energy-domain spectrum: Fock–Darwin levels and Langer-corrected WKB.
//!
//! The relative motion separates in polar coordinates. With the Langer
//! replacement `m² − ¼ → m²` the radial problem has the effective potential
//!
//! ```text
//! V_eff(r) = ħ²m²/(2μr²) + μΩ²r²/2 + κ/r
//! ```
//!
//! and a level `(n_r, m)` sits at `E = E_r − mħω_L`, where the radial energy
//! `E_r` satisfies `∫ p_r dr = πħ(n_r + ½)` between the two turning points.
//! The sign of the `mħω_L` shift follows the Fock–Darwin labelling, in which
//! positive `m` is lowered by the field.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DotParameters;

/// Gauss–Chebyshev nodes used for the radial action.
pub const QUADRATURE_NODES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbLevel {
    pub n_r: u32,
    pub m: i32,
    pub energy: f64,
}

/// `(2n_r + |m| + 1)ħΩ − mħω_L`.
pub fn fock_darwin(n_r: u32, m: i32, params: &DotParameters) -> f64 {
    let hbar = params.hbar();
    (2.0 * n_r as f64 + m.unsigned_abs() as f64 + 1.0) * hbar * params.omega()
        - m as f64 * hbar * params.omega_l()
}

/// Radial energy `E + mħω_L` seen by the effective potential.
fn radial_energy(energy: f64, m: i32, params: &DotParameters) -> f64 {
    energy + m as f64 * params.hbar() * params.omega_l()
}

fn effective_potential(r: f64, m: i32, params: &DotParameters) -> f64 {
    let (mu, hbar, w) = (params.mu(), params.hbar(), params.omega());
    let l = hbar * m as f64;
    let mut v = 0.5 * mu * w * w * r * r;
    if m != 0 {
        v += l * l / (2.0 * mu * r * r);
    }
    if params.kappa() > 0.0 {
        v += params.kappa() / r;
    }
    v
}

/// Position and value of the minimum of `V_eff`.
///
/// `V_eff'(r) = 0` reduces to `μΩ²r⁴ − κr − ħ²m²/μ = 0`, which has exactly
/// one positive root (or none when κ = m = 0, where the minimum is r = 0).
pub fn potential_minimum(m: i32, params: &DotParameters) -> (f64, f64) {
    let (mu, hbar, w, kappa) = (params.mu(), params.hbar(), params.omega(), params.kappa());
    let l2 = (hbar * m as f64).powi(2);
    if kappa == 0.0 && m == 0 {
        return (0.0, 0.0);
    }
    let f = |r: f64| mu * w * w * r.powi(4) - kappa * r - l2 / mu;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let r = 0.5 * (lo + hi);
    (r, effective_potential(r, m, params))
}

/// Monic quartic `r⁴ + b r² + c r + d` whose roots are the turning points
/// (up to the factor −μ²Ω² it is `r²·2μ(E_r − V_eff)`).
#[derive(Debug, Clone, Copy)]
struct TurningQuartic {
    b: f64,
    c: f64,
    d: f64,
}

impl TurningQuartic {
    fn new(e_radial: f64, m: i32, params: &DotParameters) -> Self {
        let (mu, w) = (params.mu(), params.omega());
        let a = mu * mu * w * w;
        let l = params.hbar() * m as f64;
        TurningQuartic {
            b: -2.0 * mu * e_radial / a,
            c: 2.0 * mu * params.kappa() / a,
            d: l * l / a,
        }
    }

    fn eval(&self, r: Complex64) -> Complex64 {
        ((r * r + self.b) * r + self.c) * r + self.d
    }

    fn derivative(&self, r: Complex64) -> Complex64 {
        (r * r * 4.0 + 2.0 * self.b) * r + self.c
    }

    /// All four roots: companion-matrix eigenvalues polished by Newton.
    fn roots(&self) -> [Complex64; 4] {
        let companion = Matrix4::new(
            0.0, 0.0, 0.0, -self.d, //
            1.0, 0.0, 0.0, -self.c, //
            0.0, 1.0, 0.0, -self.b, //
            0.0, 0.0, 1.0, 0.0,
        );
        let eig = companion.complex_eigenvalues();
        let mut out = [Complex64::default(); 4];
        for (slot, z0) in out.iter_mut().zip(eig.iter()) {
            let mut z = *z0;
            for _ in 0..50 {
                let d = self.derivative(z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = self.eval(z) / d;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            *slot = z;
        }
        out
    }
}

/// Inner and outer turning points of the classically allowed region.
pub fn turning_points(energy: f64, m: i32, params: &DotParameters) -> Result<(f64, f64)> {
    let e_r = radial_energy(energy, m, params);
    let (r_min, v_min) = potential_minimum(m, params);
    if !(e_r > v_min) {
        return Err(Error::BelowBarrier { energy, m });
    }
    if params.kappa() == 0.0 && m == 0 {
        // the allowed region reaches the origin
        let (mu, w) = (params.mu(), params.omega());
        return Ok((0.0, (2.0 * e_r / (mu * w * w)).sqrt()));
    }
    let quartic = TurningQuartic::new(e_r, m, params);
    let scale = quartic.b.abs().sqrt().max(1.0);
    let mut real: Vec<f64> = quartic
        .roots()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * scale)
        .map(|z| z.re)
        .collect();
    real.sort_by(f64::total_cmp);
    let inner = real.iter().copied().filter(|&r| r < r_min && r > 0.0).fold(None, |_, r| Some(r));
    let outer = real.iter().copied().find(|&r| r > r_min);
    match (inner, outer) {
        (Some(a), Some(b)) if b > a => Ok((a, b)),
        _ => Err(Error::BelowBarrier { energy, m }),
    }
}

/// Residual of the (monic) turning-point quartic at `r`.
pub fn quartic_residual(energy: f64, m: i32, params: &DotParameters, r: f64) -> f64 {
    let q = TurningQuartic::new(radial_energy(energy, m, params), m, params);
    q.eval(Complex64::new(r, 0.0)).re
}

/// `∫ √(2μ[E_r − V_eff(r)]) dr` between the turning points.
///
/// With `Q(r) = 2μ r²(E_r − V_eff) = μ²Ω² (r − r₁)(r₂ − r)(r² + a r + b)`
/// the integrand is `√((r − r₁)(r₂ − r)) · μΩ √(r² + a r + b) / r`, a smooth
/// function times the Chebyshev weight of the second kind.
pub fn radial_action(energy: f64, m: i32, params: &DotParameters) -> Result<f64> {
    let (r1, r2) = turning_points(energy, m, params)?;
    let (mu, w) = (params.mu(), params.omega());
    if params.kappa() == 0.0 && m == 0 {
        // p(r) = √(2μE_r − μ²Ω²r²) is even in r: half the integral over [−r₂, r₂]
        return Ok(0.5 * mu * w * r2 * r2 * chebyshev_u_integral(|_| 1.0));
    }
    let e_r = radial_energy(energy, m, params);
    let quartic = TurningQuartic::new(e_r, m, params);
    // deflate: r⁴ + b r² + c r + d = (r² − s r + p)(r² + s r + (b + s² − p))
    let (s, p) = (r1 + r2, r1 * r2);
    let tail_b = quartic.b + s * s - p;
    let (c, d) = (0.5 * (r1 + r2), 0.5 * (r2 - r1));
    let integral = chebyshev_u_integral(|x| {
        let r = c + d * x;
        let rest = (r * r + s * r + tail_b).max(0.0);
        mu * w * rest.sqrt() / r
    });
    Ok(d * d * integral)
}

/// `∫_{−1}^{1} √(1 − x²) f(x) dx` by Gauss–Chebyshev quadrature of the second kind.
fn chebyshev_u_integral<F: Fn(f64) -> f64>(f: F) -> f64 {
    let n = QUADRATURE_NODES;
    let h = PI / (n + 1) as f64;
    (1..=n)
        .map(|i| {
            let (s, c) = (i as f64 * h).sin_cos();
            h * s * s * f(c)
        })
        .sum()
}

/// Energy of level `(n_r, m)` from `radial_action(E) = πħ(n_r + ½)`.
pub fn wkb_energy(n_r: u32, m: i32, params: &DotParameters) -> Result<f64> {
    let target = PI * params.hbar() * (n_r as f64 + 0.5);
    let shift = m as f64 * params.hbar() * params.omega_l();
    let (_, v_min) = potential_minimum(m, params);
    let lo_start = v_min - shift;
    let action = |e: f64| match radial_action(e, m, params) {
        Ok(a) => Ok(a),
        Err(Error::BelowBarrier { .. }) => Ok(0.0),
        Err(e) => Err(e),
    };
    let mut lo = lo_start;
    let mut width = params.hbar() * params.omega();
    let mut hi = lo + width;
    let mut tries = 0;
    while action(hi)? < target {
        lo = hi;
        width *= 2.0;
        hi += width;
        tries += 1;
        if tries > 60 || !hi.is_finite() {
            return Err(Error::Bracketing { n_r, m });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if action(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// WKB levels for `n_r ∈ n_r_range`, `m ∈ m_range`.
pub fn wkb_table(
    n_r_range: std::ops::RangeInclusive<u32>,
    m_range: std::ops::RangeInclusive<i32>,
    params: &DotParameters,
) -> Result<Vec<WkbLevel>> {
    let mut out = Vec::new();
    for n_r in n_r_range {
        for m in m_range.clone() {
            out.push(WkbLevel { n_r, m, energy: wkb_energy(n_r, m, params)? });
        }
    }
    Ok(out)
}

/// CSV with columns `n_r, m, E_fock_darwin, E_wkb`; the first is the
/// κ = 0 closed form at the same frequencies.
pub fn write_table_csv<W: Write>(
    levels: &[WkbLevel],
    params: &DotParameters,
    mut out: W,
    header: &[(String, String)],
) -> Result<()> {
    for (k, v) in header {
        writeln!(out, "# {}: {}", k, v.replace('\n', " "))?;
    }
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["n_r", "m", "E_fock_darwin", "E_wkb"]).map_err(io)?;
    for l in levels {
        let fd = fock_darwin(l.n_r, l.m, params);
        w.write_record([l.n_r.to_string(), l.m.to_string(), fd.to_string(), l.energy.to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
