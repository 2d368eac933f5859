//! Relative-motion Hamiltonian of two electrons in a circular dot with a
//! perpendicular magnetic field (symmetric gauge).
//!
//! ```text
//! H = |p|²/2μ + μΩ²|q|²/2 + ω_L (p_y q_x − q_y p_x) + κ/|q|,   Ω² = ω₀² + ω_L²
//! ```
//!
//! Phase-space vectors are always ordered `(p_x, p_y, q_x, q_y)`, so that the
//! monodromy matrix splits into the blocks `∂p/∂p'`, `∂p/∂q'`, `∂q/∂p'`, `∂q/∂q'`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest |q| at which the Coulomb term is evaluated.
pub const DEFAULT_ORIGIN_FLOOR: f64 = 1e-12;

/// Physical constants of the dot in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParameterInput", into = "ParameterInput")]
pub struct DotParameters {
    mu: f64,
    omega0: f64,
    omega_l: f64,
    kappa: f64,
    hbar: f64,
    omega: f64,
    origin_floor: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParameterInput {
    #[serde(default = "one")]
    mu: f64,
    omega0: f64,
    omega_l: f64,
    #[serde(default = "one")]
    kappa: f64,
    #[serde(default = "one")]
    hbar: f64,
    #[serde(default = "default_floor")]
    origin_floor: f64,
}

fn one() -> f64 {
    1.0
}

fn default_floor() -> f64 {
    DEFAULT_ORIGIN_FLOOR
}

impl TryFrom<ParameterInput> for DotParameters {
    type Error = Error;

    fn try_from(p: ParameterInput) -> Result<Self> {
        DotParameters::new(p.mu, p.omega0, p.omega_l, p.kappa, p.hbar)
            .and_then(|d| d.with_origin_floor(p.origin_floor))
    }
}

impl From<DotParameters> for ParameterInput {
    fn from(d: DotParameters) -> Self {
        ParameterInput {
            mu: d.mu,
            omega0: d.omega0,
            omega_l: d.omega_l,
            kappa: d.kappa,
            hbar: d.hbar,
            origin_floor: d.origin_floor,
        }
    }
}

impl DotParameters {
    pub fn new(mu: f64, omega0: f64, omega_l: f64, kappa: f64, hbar: f64) -> Result<Self> {
        let all = [mu, omega0, omega_l, kappa, hbar];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if mu <= 0.0 || hbar <= 0.0 {
            return Err(Error::InvalidParameter("mu and hbar must be positive".into()));
        }
        if omega0 < 0.0 || omega_l < 0.0 || kappa < 0.0 {
            return Err(Error::InvalidParameter(
                "omega0, omega_l and kappa must be non-negative".into(),
            ));
        }
        if omega0 == 0.0 && omega_l == 0.0 {
            return Err(Error::InvalidParameter(
                "omega0 and omega_l cannot both vanish (motion is unbound)".into(),
            ));
        }
        Ok(DotParameters {
            mu,
            omega0,
            omega_l,
            kappa,
            hbar,
            omega: omega0.hypot(omega_l),
            origin_floor: DEFAULT_ORIGIN_FLOOR,
        })
    }

    /// μ = ħ = 1 with the given frequencies and Coulomb strength.
    pub fn dimensionless(omega0: f64, omega_l: f64, kappa: f64) -> Result<Self> {
        Self::new(1.0, omega0, omega_l, kappa, 1.0)
    }

    pub fn with_origin_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::InvalidParameter("origin floor must be positive".into()));
        }
        self.origin_floor = floor;
        Ok(self)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn omega_l(&self) -> f64 {
        self.omega_l
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    /// Effective frequency Ω = sqrt(ω₀² + ω_L²).
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn origin_floor(&self) -> f64 {
        self.origin_floor
    }
}

/// A point `(q, p)` of the relative-motion phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: Vector2<f64>,
    pub p: Vector2<f64>,
}

impl PhasePoint {
    pub fn new(q: [f64; 2], p: [f64; 2]) -> Self {
        PhasePoint { q: Vector2::from(q), p: Vector2::from(p) }
    }

    /// `(p_x, p_y, q_x, q_y)`
    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.p.x, self.p.y, self.q.x, self.q.y)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        PhasePoint { q: Vector2::new(v[2], v[3]), p: Vector2::new(v[0], v[1]) }
    }

    /// z-component of the angular momentum, p_y q_x − q_y p_x.
    pub fn angular_momentum(&self) -> f64 {
        self.p.y * self.q.x - self.q.y * self.p.x
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.p.iter()).all(|v| v.is_finite())
    }
}

fn checked_radius(q: &Vector2<f64>, params: &DotParameters) -> Result<f64> {
    let r = q.norm();
    if params.kappa > 0.0 && !(r >= params.origin_floor) {
        return Err(Error::SingularOrigin { radius: r });
    }
    Ok(r)
}

pub fn hamiltonian(s: &PhasePoint, params: &DotParameters) -> Result<f64> {
    let r = checked_radius(&s.q, params)?;
    let kinetic = s.p.norm_squared() / (2.0 * params.mu);
    let confinement = 0.5 * params.mu * params.omega * params.omega * r * r;
    let magnetic = params.omega_l * s.angular_momentum();
    let coulomb = if params.kappa > 0.0 { params.kappa / r } else { 0.0 };
    Ok(kinetic + confinement + magnetic + coulomb)
}

/// `(∂H/∂p_x, ∂H/∂p_y, ∂H/∂q_x, ∂H/∂q_y)`.
///
/// Hamilton's equations read q̇ = ∂H/∂p, ṗ = −∂H/∂q.
pub fn gradient(s: &PhasePoint, params: &DotParameters) -> Result<Vector4<f64>> {
    let r = checked_radius(&s.q, params)?;
    let (mu, wl) = (params.mu, params.omega_l);
    let k = params.mu * params.omega * params.omega;
    let c = if params.kappa > 0.0 { params.kappa / (r * r * r) } else { 0.0 };
    Ok(Vector4::new(
        s.p.x / mu - wl * s.q.y,
        s.p.y / mu + wl * s.q.x,
        k * s.q.x + wl * s.p.y - c * s.q.x,
        k * s.q.y - wl * s.p.x - c * s.q.y,
    ))
}

/// Second derivatives of H in the `(p_x, p_y, q_x, q_y)` ordering.
pub fn hessian(s: &PhasePoint, params: &DotParameters) -> Result<Matrix4<f64>> {
    checked_radius(&s.q, params)?;
    let mut h = Matrix4::zeros();
    let inv_mu = 1.0 / params.mu;
    h[(0, 0)] = inv_mu;
    h[(1, 1)] = inv_mu;
    // ∂²(ω_L L_z)/∂p∂q
    let wl = params.omega_l;
    h[(0, 3)] = -wl;
    h[(3, 0)] = -wl;
    h[(1, 2)] = wl;
    h[(2, 1)] = wl;
    let qq = coulomb_hessian(&s.q, params.kappa)
        + Matrix2::identity() * (params.mu * params.omega * params.omega);
    h.fixed_view_mut::<2, 2>(2, 2).copy_from(&qq);
    Ok(h)
}

/// Gradient of κ/|q| with respect to q.
#[inline]
pub(crate) fn coulomb_gradient(q: &Vector2<f64>, kappa: f64) -> Vector2<f64> {
    let r2 = q.norm_squared();
    let r = r2.sqrt();
    q * (-kappa / (r2 * r))
}

/// Hessian of κ/|q|: κ (3 q qᵀ − |q|² 1) / |q|⁵.
#[inline]
pub(crate) fn coulomb_hessian(q: &Vector2<f64>, kappa: f64) -> Matrix2<f64> {
    if kappa == 0.0 {
        return Matrix2::zeros();
    }
    let r2 = q.norm_squared();
    let r5 = r2 * r2 * r2.sqrt();
    let c = kappa / r5;
    Matrix2::new(
        c * (3.0 * q.x * q.x - r2),
        c * 3.0 * q.x * q.y,
        c * 3.0 * q.x * q.y,
        c * (3.0 * q.y * q.y - r2),
    )
}
