//! Crank–Nicolson grid propagation of the same packet, as a quantum reference.
//!
//! ```text
//! cargo run --release --example grid_reference -- 128 60
//! ```
//! Arguments: points per axis, propagation time. n = 256 with t = 200
//! resolves the two lowest levels and takes several minutes.

use std::ops::ControlFlow;

use harmonium::hk::GaussianState;
use harmonium::model::DotParameters;
use harmonium::qmref::{self, GridSpec};

fn main() -> harmonium::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(128, |s| s.parse().expect("grid points"));
    let t: f64 = args.next().map_or(60.0, |s| s.parse().expect("duration"));
    let dot = DotParameters::dimensionless(1.0, 1.0, 1.0)?;
    let grid = GridSpec::new(8.0, n, 0.05);
    let packet = GaussianState::reference();

    let psi = qmref::init_packet(&packet, &grid, dot.hbar())?;
    println!("h = {:.4}, <H> = {:.4}", grid.spacing(), qmref::energy_expectation(&psi, &dot)?);
    let mut leak: f64 = 0.0;
    qmref::evolve(psi, &dot, 200, |s| {
        leak = leak.max(s.boundary);
        if s.step % 40 == 0 {
            println!(
                "t = {:5.2}  |c| = {:.5}  norm - 1 = {:+.1e}  solver iterations {}",
                s.t,
                s.overlap.norm(),
                s.norm_sqr - 1.0,
                s.solver_iterations
            );
        }
        ControlFlow::Continue(())
    })?;
    println!("largest boundary density {leak:.1e}\n");

    let spec = qmref::quantum_spectrum(&packet, &dot, &grid, t)?;
    println!("spectrum to t = {t} (resolution {:.3}):", spec.resolution);
    for p in spec.peaks.iter().filter(|p| p.energy < 6.5) {
        println!("  E = {:.4}  |c_n|² ≈ {:.3}  (n_r, m) = ({}, {})", p.energy, p.height, p.n_r.unwrap(), p.m.unwrap());
    }
    Ok(())
}
