//! Classical trajectories, their action and their monodromy matrix.
//!
//! The integrator is a Strang splitting `C/2 · A · C/2` of the relative
//! Hamiltonian into
//!
//! * `A = |p|²/2μ + μΩ²|q|²/2 + ω_L L_z`, a linear flow (isotropic oscillator
//!   composed with a rigid rotation by `ω_L t`) that is applied exactly, and
//! * `C = κ/|q|`, applied as a momentum kick.
//!
//! Both sub-flows are exact Hamiltonian flows, so the composed map is
//! symplectic and second order. The monodromy matrix is advanced by the
//! tangent maps of the same sub-flows, and the action increment is the exact
//! action of each sub-flow: `½[p·q]` across the oscillator flow (its
//! Lagrangian is `T − V` and `d(p·q)/dt = 2(T − V)`) and `−τκ/|q|` for a kick.

use std::ops::ControlFlow;

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, DotParameters, PhasePoint};

/// State carried along one classical trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub point: PhasePoint,
    /// Accumulated ∫(p·q̇ − H) dt.
    pub action: f64,
    /// ∂(p_t, q_t)/∂(p', q') in `(p_x, p_y, q_x, q_y)` ordering.
    pub monodromy: Matrix4<f64>,
    pub t: f64,
    pub energy0: f64,
}

impl TrajectoryState {
    pub fn new(point: PhasePoint, params: &DotParameters) -> Result<Self> {
        let energy0 = model::hamiltonian(&point, params)?;
        Ok(TrajectoryState { point, action: 0.0, monodromy: Matrix4::identity(), t: 0.0, energy0 })
    }

    /// Max-norm of `MᵀJM − J`.
    pub fn symplectic_defect(&self) -> f64 {
        let j = symplectic_form();
        (self.monodromy.transpose() * j * self.monodromy - j).amax()
    }
}

/// `J = [[0, 1], [−1, 0]]` in 2×2 blocks.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 2)] = 1.0;
    j[(1, 3)] = 1.0;
    j[(2, 0)] = -1.0;
    j[(3, 1)] = -1.0;
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub n_steps: usize,
    /// Allowed |H − E₀| / max(1, |E₀|) before a trajectory is discarded.
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
    /// Trajectories that come closer than this to the origin are discarded.
    #[serde(default = "default_origin_floor")]
    pub origin_floor: f64,
}

fn default_energy_tol() -> f64 {
    1e-4
}

fn default_origin_floor() -> f64 {
    1e-6
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 2e-3,
            n_steps: 100_000,
            energy_tol: default_energy_tol(),
            origin_floor: default_origin_floor(),
        }
    }
}

impl IntegratorConfig {
    pub fn new(dt: f64, n_steps: usize) -> Self {
        IntegratorConfig { dt, n_steps, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        if self.n_steps < 1 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        if !(self.energy_tol > 0.0) || !(self.origin_floor > 0.0) {
            return Err(Error::InvalidParameter(
                "energy_tol and origin_floor must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// One fixed-size step of the splitting scheme, with the linear flow map
/// precomputed for the step size.
#[derive(Debug, Clone)]
pub struct SplitStepper {
    flow: Matrix4<f64>,
    half_dt: f64,
    kappa: f64,
    floor: f64,
}

impl SplitStepper {
    pub fn new(params: &DotParameters, dt: f64) -> Self {
        SplitStepper {
            flow: linear_flow(params, dt),
            half_dt: 0.5 * dt,
            kappa: params.kappa(),
            floor: params.origin_floor(),
        }
    }

    fn kick(&self, state: &mut TrajectoryState) -> Result<()> {
        if self.kappa == 0.0 {
            return Ok(());
        }
        let q = state.point.q;
        let r = q.norm();
        if !(r >= self.floor) {
            return Err(Error::SingularOrigin { radius: r });
        }
        let tau = self.half_dt;
        state.point.p -= model::coulomb_gradient(&q, self.kappa) * tau;
        state.action -= tau * self.kappa / r;
        let hess: Matrix2<f64> = model::coulomb_hessian(&q, self.kappa) * tau;
        // dp ← dp − τ U_qq dq, applied to every column of M
        let m = &mut state.monodromy;
        for c in 0..4 {
            let (dqx, dqy) = (m[(2, c)], m[(3, c)]);
            m[(0, c)] -= hess[(0, 0)] * dqx + hess[(0, 1)] * dqy;
            m[(1, c)] -= hess[(1, 0)] * dqx + hess[(1, 1)] * dqy;
        }
        Ok(())
    }

    pub fn advance(&self, state: &mut TrajectoryState) -> Result<()> {
        self.kick(state)?;
        let before = state.point.p.dot(&state.point.q);
        let z = self.flow * state.point.to_vector();
        state.point = PhasePoint::from_vector(&z);
        state.action += 0.5 * (state.point.p.dot(&state.point.q) - before);
        state.monodromy = self.flow * state.monodromy;
        self.kick(state)?;
        state.t += 2.0 * self.half_dt;
        if !state.point.is_finite() || !state.action.is_finite() {
            return Err(Error::NonFinite("trajectory step"));
        }
        Ok(())
    }
}

/// Exact time-τ map of `|p|²/2μ + μΩ²|q|²/2 + ω_L L_z`.
fn linear_flow(params: &DotParameters, tau: f64) -> Matrix4<f64> {
    let (mu, w) = (params.mu(), params.omega());
    let (s, c) = (w * tau).sin_cos();
    let rot = nalgebra::Rotation2::new(params.omega_l() * tau).into_inner();
    let mut f = Matrix4::zeros();
    f.fixed_view_mut::<2, 2>(0, 0).copy_from(&(rot * c));
    f.fixed_view_mut::<2, 2>(0, 2).copy_from(&(rot * (-mu * w * s)));
    f.fixed_view_mut::<2, 2>(2, 0).copy_from(&(rot * (s / (mu * w))));
    f.fixed_view_mut::<2, 2>(2, 2).copy_from(&(rot * c));
    f
}

/// Advances `state` by one step of size `dt`.
pub fn step(state: &TrajectoryState, params: &DotParameters, dt: f64) -> Result<TrajectoryState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    let mut next = state.clone();
    SplitStepper::new(params, dt).advance(&mut next)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscardReason {
    EnergyDrift { drift: f64 },
    OriginFloor { radius: f64 },
    NonFinite,
    /// The observer asked to stop.
    Observer,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub state: TrajectoryState,
    pub discarded: Option<DiscardReason>,
    /// Number of completed steps.
    pub steps: usize,
}

impl Propagation {
    pub fn is_discarded(&self) -> bool {
        self.discarded.is_some()
    }
}

/// Runs `cfg.n_steps` steps from `initial`.
///
/// The observer sees step index 0 (the initial state) and then every step.
/// Returning `ControlFlow::Break` stops the run and marks it discarded.
pub fn propagate<F>(
    initial: PhasePoint,
    params: &DotParameters,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<Propagation>
where
    F: FnMut(usize, &TrajectoryState) -> ControlFlow<()>,
{
    cfg.validate()?;
    let mut state = TrajectoryState::new(initial, params)?;
    let stepper = SplitStepper::new(params, cfg.dt);
    let scale = state.energy0.abs().max(1.0);
    let floor = cfg.origin_floor.max(params.origin_floor());

    let finish = |state, discarded, steps| Ok(Propagation { state, discarded, steps });

    if params.kappa() > 0.0 && state.point.q.norm() < floor {
        let radius = state.point.q.norm();
        return finish(state, Some(DiscardReason::OriginFloor { radius }), 0);
    }
    if observer(0, &state).is_break() {
        return finish(state, Some(DiscardReason::Observer), 0);
    }
    for k in 1..=cfg.n_steps {
        match stepper.advance(&mut state) {
            Ok(()) => {}
            Err(Error::SingularOrigin { radius }) => {
                return finish(state, Some(DiscardReason::OriginFloor { radius }), k - 1)
            }
            Err(_) => return finish(state, Some(DiscardReason::NonFinite), k - 1),
        }
        let radius = state.point.q.norm();
        if params.kappa() > 0.0 && radius < floor {
            return finish(state, Some(DiscardReason::OriginFloor { radius }), k);
        }
        let energy = energy_unchecked(&state.point, params, radius);
        let drift = (energy - state.energy0).abs() / scale;
        if !(drift <= cfg.energy_tol) {
            return finish(state, Some(DiscardReason::EnergyDrift { drift }), k);
        }
        if observer(k, &state).is_break() {
            return finish(state, Some(DiscardReason::Observer), k);
        }
    }
    finish(state, None, cfg.n_steps)
}

#[inline]
fn energy_unchecked(s: &PhasePoint, params: &DotParameters, radius: f64) -> f64 {
    let w2 = params.omega() * params.omega();
    let mut e = s.p.norm_squared() / (2.0 * params.mu())
        + 0.5 * params.mu() * w2 * radius * radius
        + params.omega_l() * s.angular_momentum();
    if params.kappa() > 0.0 {
        e += params.kappa() / radius;
    }
    e
}

/// Max-norm difference between M(t) and a central-difference Jacobian of the
/// flow built from 8 perturbed trajectories.
pub fn monodromy_check(
    initial: PhasePoint,
    params: &DotParameters,
    cfg: &IntegratorConfig,
    eps: f64,
) -> Result<f64> {
    let run = |z: PhasePoint| -> Result<TrajectoryState> {
        let mut state = TrajectoryState::new(z, params)?;
        let stepper = SplitStepper::new(params, cfg.dt);
        for _ in 0..cfg.n_steps {
            stepper.advance(&mut state)?;
        }
        Ok(state)
    };
    let reference = run(initial)?;
    let base = initial.to_vector();
    let mut jac = Matrix4::zeros();
    for j in 0..4 {
        let mut plus = base;
        let mut minus = base;
        plus[j] += eps;
        minus[j] -= eps;
        let zp = run(PhasePoint::from_vector(&plus))?.point.to_vector();
        let zm = run(PhasePoint::from_vector(&minus))?.point.to_vector();
        jac.set_column(j, &((zp - zm) / (2.0 * eps)));
    }
    Ok((jac - reference.monodromy).amax())
}

/// Convenience used by tests and examples: position-position block of M.
pub fn position_block(m: &Matrix4<f64>) -> Matrix2<f64> {
    m.fixed_view::<2, 2>(2, 2).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn oscillator() -> DotParameters {
        DotParameters::dimensionless(1.0, 0.0, 0.0).unwrap()
    }

    fn run(start: PhasePoint, params: &DotParameters, dt: f64, n: usize) -> TrajectoryState {
        let cfg = IntegratorConfig { energy_tol: 1.0, ..IntegratorConfig::new(dt, n) };
        let out = propagate(start, params, &cfg, |_, _| ControlFlow::Continue(())).unwrap();
        assert!(!out.is_discarded(), "{:?}", out.discarded);
        out.state
    }

    #[test]
    fn oscillator_returns_after_one_period() {
        let start = PhasePoint::new([1.0, 0.0], [0.0, 0.0]);
        let n = 6283;
        let end = run(start, &oscillator(), TAU / n as f64, n);
        assert!((end.point.to_vector() - start.to_vector()).amax() < 1e-5);
    }

    #[test]
    fn oscillator_monodromy_is_analytic() {
        let start = PhasePoint::new([0.3, -0.2], [0.5, 0.1]);
        let end = run(start, &oscillator(), 1e-3, 3000);
        let block = position_block(&end.monodromy);
        assert_relative_eq!(block, Matrix2::identity() * end.t.cos(), epsilon = 1e-5);
    }

    #[test]
    fn single_step_is_symplectic() {
        let params = DotParameters::dimensionless(1.0, 1.0, 1.0).unwrap();
        let s = TrajectoryState::new(PhasePoint::new([0.4, 0.3], [0.2, -0.9]), &params).unwrap();
        let next = step(&s, &params, 0.05).unwrap();
        assert!(next.symplectic_defect() < 1e-10);
    }

    #[test]
    fn zero_coulomb_flow_matches_matrix_exponential() {
        let params = DotParameters::new(1.0, 0.7, 1.3, 0.0, 1.0).unwrap();
        let start = PhasePoint::new([1.0, 0.5], [-0.2, 0.3]);
        let end = run(start, &params, 2e-3, 5000);
        let hess = model::hessian(&start, &params).unwrap();
        let generator = -(symplectic_form() * hess);
        let exact = (generator * end.t).exp();
        assert_relative_eq!(end.monodromy, exact, epsilon = 1e-5);
        assert_relative_eq!(end.point.to_vector(), exact * start.to_vector(), epsilon = 1e-5);
    }

    #[test]
    fn oscillator_action_matches_closed_form() {
        // ω₀ = 2 orbit q = (cos 2t, sin 2t / 2): the Lagrangian is −1.5 cos 4t.
        let params = DotParameters::dimensionless(2.0, 0.0, 0.0).unwrap();
        let start = PhasePoint::new([1.0, 0.0], [0.0, 1.0]);
        let exact = |t: f64| -0.375 * (4.0 * t).sin();
        for t in [std::f64::consts::PI / 8.0, std::f64::consts::PI, 2.3] {
            let n = 4000;
            let end = run(start, &params, t / n as f64, n);
            assert!((end.action - exact(t)).abs() < 1e-5, "t = {t}: {} vs {}", end.action, exact(t));
        }
    }

    #[test]
    fn zero_steps_is_identity() {
        let params = DotParameters::dimensionless(1.0, 1.0, 1.0).unwrap();
        let s = TrajectoryState::new(PhasePoint::new([1.0, 0.2], [0.0, 0.1]), &params).unwrap();
        assert_eq!(s.monodromy, Matrix4::identity());
        assert_eq!(s.action, 0.0);
        assert_eq!(s.t, 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        let params = oscillator();
        let start = PhasePoint::new([1.0, 0.0], [0.0, 0.0]);
        let cfg = IntegratorConfig::new(0.0, 10);
        assert!(propagate(start, &params, &cfg, |_, _| ControlFlow::Continue(())).is_err());
        let cfg = IntegratorConfig::new(0.1, 0);
        assert!(propagate(start, &params, &cfg, |_, _| ControlFlow::Continue(())).is_err());
    }

    #[test]
    fn observer_sees_every_step_and_can_stop() {
        let params = oscillator();
        let start = PhasePoint::new([1.0, 0.0], [0.0, 0.0]);
        let mut seen = Vec::new();
        let cfg = IntegratorConfig::new(0.01, 20);
        let out = propagate(start, &params, &cfg, |k, _| {
            seen.push(k);
            if k == 7 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .unwrap();
        assert_eq!(seen, (0..=7).collect::<Vec<_>>());
        assert_eq!(out.discarded, Some(DiscardReason::Observer));
        assert_eq!(out.steps, 7);
    }

    #[test]
    fn head_on_collision_is_discarded() {
        let params = DotParameters::dimensionless(1.0, 0.0, 1.0).unwrap();
        // Aimed straight at the origin with a huge step: large energy error.
        let start = PhasePoint::new([1.0, 0.0], [-6.0, 0.0]);
        let cfg = IntegratorConfig { energy_tol: 1e-6, ..IntegratorConfig::new(0.05, 200) };
        let out = propagate(start, &params, &cfg, |_, _| ControlFlow::Continue(())).unwrap();
        assert!(out.is_discarded());
    }
}
