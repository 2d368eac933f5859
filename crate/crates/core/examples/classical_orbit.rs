//! One classical trajectory with its stability matrix and HK prefactor.

use std::ops::ControlFlow;

use harmonium::dynamics::{self, IntegratorConfig};
use harmonium::hk::{self, GaussianState};
use harmonium::model::{self, DotParameters, PhasePoint};

fn main() -> harmonium::Result<()> {
    let dot = DotParameters::dimensionless(1.0, 1.0, 1.0)?;
    let start = PhasePoint::new([1.0, 0.0], [0.3, -0.6]);
    let packet = GaussianState::reference();
    let e0 = model::hamiltonian(&start, &dot)?;
    let cfg = IntegratorConfig::new(0.005, 4000);

    let mut dets = Vec::new();
    let mut drift: f64 = 0.0;
    let run = dynamics::propagate(start, &dot, &cfg, |k, s| {
        drift = drift.max((model::hamiltonian(&s.point, &dot).unwrap() - e0).abs());
        dets.push(hk::hk_prefactor(&s.monodromy, &packet.gamma, dot.hbar()).1);
        if k % 400 == 0 {
            println!(
                "t = {:5.2}  q = ({:+.4}, {:+.4})  L = {:+.6}  S = {:+.4}",
                s.t, s.point.q.x, s.point.q.y, s.point.angular_momentum(), s.action
            );
        }
        ControlFlow::Continue(())
    })?;

    let roots = hk::continuous_sqrt(&dets)?;
    println!("\nenergy drift        {drift:.2e}");
    println!("symplectic defect   {:.2e}", run.state.symplectic_defect());
    println!("prefactor at t = 20 {:.4}", roots.last().unwrap());
    let fd = dynamics::monodromy_check(start, &dot, &IntegratorConfig::new(0.005, 2000), 1e-6)?;
    println!("monodromy vs finite differences at t = 10: {fd:.2e}");
    Ok(())
}
