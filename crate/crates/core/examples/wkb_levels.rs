//! Langer-corrected WKB levels with the Coulomb repulsion switched on.
//!
//! ```text
//! cargo run --release --example wkb_levels -- 1.0
//! ```

use harmonium::model::DotParameters;
use harmonium::wkb;

fn main() -> harmonium::Result<()> {
    let kappa: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("kappa"));
    let dot = DotParameters::dimensionless(1.0, 1.0, kappa)?;
    let free = DotParameters::dimensionless(1.0, 1.0, 0.0)?;

    println!("kappa = {kappa}");
    println!("{:>4} {:>4} {:>10} {:>10} {:>16}", "n_r", "m", "E_wkb", "E(kappa=0)", "turning points");
    for level in wkb::wkb_table(0..=1, -1..=3, &dot)? {
        let (r1, r2) = wkb::turning_points(level.energy, level.m, &dot)?;
        println!(
            "{:>4} {:>4} {:>10.4} {:>10.4}   [{r1:.3}, {r2:.3}]",
            level.n_r,
            level.m,
            level.energy,
            wkb::fock_darwin(level.n_r, level.m, &free)
        );
    }

    let ground = wkb::wkb_table(0..=0, -3..=3, &dot)?
        .into_iter()
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .unwrap();
    println!("\nground state: m = {} at E = {:.4}", ground.m, ground.energy);
    Ok(())
}
