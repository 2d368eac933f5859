use std::f64::consts::PI;
use std::ops::ControlFlow;

use harmonium::dynamics::{self, IntegratorConfig, TrajectoryState};
use harmonium::hk::{self, GaussianState};
use harmonium::model::{self, DotParameters, PhasePoint};
use harmonium::qmref;
use harmonium::series::CorrelationSeries;
use harmonium::spectral::{self, Window};
use harmonium::wkb;
use nalgebra::{Rotation2, Vector2};
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = DotParameters> {
    (0.3f64..2.0, 0.0f64..2.0, 0.0f64..2.0)
        .prop_map(|(w0, wl, k)| DotParameters::dimensionless(w0, wl, k).unwrap())
}

fn point() -> impl Strategy<Value = PhasePoint> {
    (0.3f64..2.0, 0.0f64..(2.0 * PI), -1.5f64..1.5, -1.5f64..1.5).prop_map(|(r, phi, px, py)| {
        PhasePoint::new([r * phi.cos(), r * phi.sin()], [px, py])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_is_invariant_under_rotation(p in params(), z in point(), angle in 0.0f64..(2.0 * PI)) {
        let rot = Rotation2::new(angle);
        let turned = PhasePoint { q: rot * z.q, p: rot * z.p };
        let (a, b) = (model::hamiltonian(&z, &p).unwrap(), model::hamiltonian(&turned, &p).unwrap());
        prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn hessian_is_symmetric(p in params(), z in point()) {
        let h = model::hessian(&z, &p).unwrap();
        prop_assert!((h - h.transpose()).amax() < 1e-12 * h.amax().max(1.0));
    }

    #[test]
    fn steps_are_symplectic(p in params(), z in point(), dt in 1e-3f64..0.05) {
        let s = TrajectoryState::new(z, &p).unwrap();
        let next = dynamics::step(&s, &p, dt).unwrap();
        prop_assert!(next.symplectic_defect() < 1e-10);
    }

    #[test]
    fn angular_momentum_is_conserved(p in params(), z in point()) {
        let cfg = IntegratorConfig { energy_tol: 1.0, ..IntegratorConfig::new(2e-3, 500) };
        let l0 = z.angular_momentum();
        let mut worst: f64 = 0.0;
        let run = dynamics::propagate(z, &p, &cfg, |_, s| {
            worst = worst.max((s.point.angular_momentum() - l0).abs());
            ControlFlow::Continue(())
        }).unwrap();
        if !run.is_discarded() {
            prop_assert!(worst < 1e-10, "drift {}", worst);
        }
    }

    #[test]
    fn squared_roots_reproduce_input(phases in prop::collection::vec(-1.2f64..1.2, 1..200),
                                     moduli in prop::collection::vec(0.1f64..5.0, 200)) {
        let mut theta = 0.0;
        let series: Vec<Complex64> = phases.iter().zip(&moduli).map(|(d, r)| {
            theta += d;
            Complex64::from_polar(*r, theta)
        }).collect();
        let roots = hk::continuous_sqrt(&series).unwrap();
        for (s, z) in roots.iter().zip(&series) {
            prop_assert!((s * s - z).norm() < 1e-10 * z.norm().max(1.0));
        }
        for w in roots.windows(2) {
            // consecutive roots never differ by more than the half-angle step
            let turn = (w[1] / w[0]).arg().abs();
            prop_assert!(turn <= 0.6 + 1e-12, "turn {}", turn);
        }
    }

    #[test]
    fn overlaps_are_hermitian_and_bounded(a in point(), b in point(), alpha in 0.1f64..1.0) {
        let ga = GaussianState::isotropic([a.q.x, a.q.y], [a.p.x, a.p.y], alpha).unwrap();
        let gb = GaussianState::isotropic([b.q.x, b.q.y], [b.p.x, b.p.y], alpha).unwrap();
        let ab = hk::overlap_gaussian(&ga, &gb, 1.0).unwrap();
        let ba = hk::overlap_gaussian(&gb, &ga, 1.0).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
        prop_assert!(ab.norm() <= 1.0 + 1e-12);
        prop_assert!((hk::overlap_gaussian(&ga, &ga, 1.0).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn wkb_without_coulomb_is_fock_darwin(w0 in 0.3f64..2.0, wl in 0.0f64..2.0, n_r in 0u32..4, m in -4i32..5) {
        let p = DotParameters::dimensionless(w0, wl, 0.0).unwrap();
        let e = wkb::wkb_energy(n_r, m, &p).unwrap();
        prop_assert!((e - wkb::fock_darwin(n_r, m, &p)).abs() < 1e-8 * e.max(1.0));
    }

    #[test]
    fn coulomb_raises_every_level(p in params(), n_r in 0u32..3, m in -3i32..4) {
        let free = DotParameters::dimensionless(p.omega0(), p.omega_l(), 0.0).unwrap();
        let e = wkb::wkb_energy(n_r, m, &p).unwrap();
        prop_assert!(e >= wkb::fock_darwin(n_r, m, &free) - 1e-9);
    }

    #[test]
    fn single_mode_is_located(omega in -5.0f64..5.0, amp in 0.2f64..1.0, dt in 0.02f64..0.1) {
        let n = (100.0 / dt) as usize;
        let values = (0..n).map(|k| Complex64::from_polar(amp, -omega * k as f64 * dt)).collect();
        let spec = spectral::spectrum(&CorrelationSeries::deterministic(dt, values), Window::Hann).unwrap();
        let peaks = spectral::find_peaks(&spec, 0.5 * amp);
        prop_assert_eq!(peaks.len(), 1);
        prop_assert!((peaks[0].energy - omega).abs() < 1e-3);
        prop_assert!((peaks[0].height - amp).abs() < 0.01 * amp);
    }

    #[test]
    fn cell_average_matches_subdivision(x in -5.0f64..5.0, y in -5.0f64..5.0, h in 0.02f64..0.3) {
        let r = Vector2::new(x, y).norm();
        prop_assume!(r > 2.0 * h);
        let k = 64;
        let mut sum = 0.0;
        for i in 0..k {
            for j in 0..k {
                let sx = x + h * ((i as f64 + 0.5) / k as f64 - 0.5);
                let sy = y + h * ((j as f64 + 0.5) / k as f64 - 0.5);
                sum += 1.0 / sx.hypot(sy);
            }
        }
        let brute = sum / (k * k) as f64;
        let avg = qmref::cell_average_inverse_r(x, y, h);
        prop_assert!((avg - brute).abs() < 1e-5 * brute, "{} vs {}", avg, brute);
    }
}
