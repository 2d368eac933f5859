mod common;

use std::ops::ControlFlow;

use common::{coulomb, exact_free_autocorrelation, free, radial_levels};
use harmonium::hk::GaussianState;
use harmonium::qmref::{self, GridSpec};
use harmonium::wkb::fock_darwin;

#[test]
fn radial_oracle_reproduces_closed_form() {
    let params = free();
    let levels = radial_levels(&params, &GaussianState::reference(), -2..=2, 2, 1500, 12.0);
    for l in &levels {
        let exact = fock_darwin(l.n_r, l.m, &params);
        assert!((l.energy - exact).abs() < 5e-5 * exact, "{l:?} vs {exact}");
    }
}

#[test]
fn radial_oracle_coulomb_levels() {
    let levels = radial_levels(&coulomb(), &GaussianState::reference(), 0..=2, 0, 3000, 10.0);
    let expect = [(3.04130, 0.3198), (2.82293, 0.3008), (3.01183, 0.1300)];
    for (l, (e, w)) in levels.iter().zip(expect) {
        assert!((l.energy - e).abs() < 2e-4, "{l:?}");
        assert!((l.weight - w).abs() < 1e-3, "{l:?}");
    }
}

#[test]
fn free_grid_autocorrelation_is_exact() {
    let grid = GridSpec { leak_tol: 1e-10, ..GridSpec::new(8.5, 128, 0.0025) };
    let stride = 8;
    let n_steps = 4000;
    let psi = qmref::init_packet(&GaussianState::reference(), &grid, 1.0).unwrap();
    let mut grid_c = Vec::new();
    qmref::evolve(psi, &free(), n_steps, |s| {
        if s.step % stride == 0 {
            grid_c.push(s.overlap);
        }
        ControlFlow::Continue(())
    })
    .unwrap();
    let (exact, captured) =
        exact_free_autocorrelation(&GaussianState::reference(), grid.dt * stride as f64, grid_c.len());
    assert!((captured - 1.0).abs() < 1e-5, "expansion misses {}", 1.0 - captured);
    let worst = grid_c.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(worst < 2e-3, "max |Δc| = {worst}");
}

#[test]
fn free_spectrum_has_fock_darwin_peaks() {
    let params = free();
    let grid = GridSpec { leak_tol: 1e-10, ..GridSpec::new(8.5, 128, 0.02) };
    let spec = qmref::quantum_spectrum(&GaussianState::reference(), &params, &grid, 60.0).unwrap();
    assert!(spec.peaks.len() >= 3);
    for p in &spec.peaks {
        let (n_r, m) = (p.n_r.unwrap(), p.m.unwrap());
        let exact = fock_darwin(n_r, m, &params);
        assert!((p.energy - exact).abs() < 0.02, "{p:?} vs {exact}");
    }
    let mut strongest = spec.peaks.clone();
    strongest.sort_by(|a, b| b.height.total_cmp(&a.height));
    let mut top: Vec<f64> = strongest[..3].iter().map(|p| p.energy).collect();
    top.sort_by(f64::total_cmp);
    for (e, table) in top.iter().zip([1.41, 1.83, 2.24]) {
        assert!((e - table).abs() < 0.02, "{top:?}");
    }
}

#[test]
fn coulomb_spectrum_is_stable_under_refinement() {
    let state = GaussianState::reference();
    let peaks = |n| {
        let grid = GridSpec::new(8.0, n, 0.05);
        let spec = qmref::quantum_spectrum(&state, &coulomb(), &grid, 60.0).unwrap();
        let mut p: Vec<_> = spec.peaks.iter().filter(|p| p.height > 0.1).map(|p| p.energy).collect();
        p.sort_by(f64::total_cmp);
        p
    };
    let (coarse, fine) = (peaks(128), peaks(192));
    assert_eq!(coarse.len(), fine.len(), "{coarse:?} vs {fine:?}");
    assert!(coarse.len() >= 2);
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a - b).abs() < 0.01, "{coarse:?} vs {fine:?}");
    }
}
