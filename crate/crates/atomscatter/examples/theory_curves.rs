//! Scattering probability, peak excitation and P_e(t) for a few bandwidths.
//!
//! cargo run --example theory_curves

use atomscatter::theory::{self, AtomParams, CurveKind, PhotonParams, TheoryCurve};

fn main() -> atomscatter::Result<()> {
    let atom = AtomParams::from_linewidth_mhz(6.07, 0.033)?;
    println!(
        "{:>8} {:>10} {:>10} {:>10}",
        "Gp/G0", "epsilon", "Pe_max", "t* (ns)"
    );
    for ratio in [0.5, 1.0, 1.96, 4.5, 6.09] {
        let photon = PhotonParams::relative_to(&atom, ratio, 0.0)?;
        println!(
            "{ratio:>8.2} {:>10.5} {:>10.5} {:>10.2}",
            theory::scattering_probability(&atom, &photon),
            theory::peak_excitation(&atom, &photon),
            theory::peak_time(&atom, &photon) * 1e9
        );
    }

    let photon = PhotonParams::relative_to(&atom, 1.96, 0.0)?;
    let curve = TheoryCurve::sample(CurveKind::Excitation, &atom, &photon, -10e-9, 100e-9, 12)?;
    println!("\nP_e(t) at 1.96 G0:");
    for (t, p) in curve.times.iter().zip(&curve.values) {
        println!("  {:6.1} ns  {p:.5}", t * 1e9);
    }
    Ok(())
}
