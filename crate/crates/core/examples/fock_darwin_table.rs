//! Closed-form levels without the Coulomb term, and their Landau limit.

use harmonium::model::DotParameters;
use harmonium::wkb::fock_darwin;

fn main() -> harmonium::Result<()> {
    let dot = DotParameters::dimensionless(1.0, 1.0, 0.0)?;
    println!("omega0 = omega_L = 1");
    println!("{:>4} {:>4} {:>8}", "n_r", "m", "E");
    for n_r in 0..=1 {
        for m in 0..=2 {
            println!("{n_r:>4} {m:>4} {:>8.4}", fock_darwin(n_r, m, &dot));
        }
    }

    // with ω₀ → 0 every m ≥ 0 of a given n_r collapses onto one Landau level
    let landau = DotParameters::dimensionless(0.0, 1.0, 0.0)?;
    let energies: Vec<String> = (0..5).map(|m| format!("{:.3}", fock_darwin(0, m, &landau))).collect();
    println!("\nomega0 = 0, n_r = 0, m = 0..4: {}", energies.join(" "));
    Ok(())
}
