//! Full analysis of one simulated histogram pair: bandwidth fit,
//! extinction, excitation trace and peak.
//!
//! cargo run --example analyze_histograms

use atomscatter::analysis::{self, AnalysisOptions};
use atomscatter::{simulate, theory, AtomParams, PhotonParams, SimConfig};

fn main() -> atomscatter::Result<()> {
    let atom = AtomParams::from_linewidth_mhz(6.07, 0.033)?;
    let photon = PhotonParams::relative_to(&atom, 6.09, 0.0)?;
    let mut config = SimConfig::new(atom, photon, 10_000_000).with_seed(7);
    config.heralding_efficiency = 0.5;
    let (reference, with_atom) = simulate::simulate_pair(&config)?;

    let result = analysis::analyze(
        &reference.histogram,
        &with_atom.histogram,
        &AnalysisOptions::new(atom),
    )?;
    let fit = &result.bandwidth;
    println!("eta_f        {:.4}", result.eta_f);
    println!(
        "Gp / G0      {:.4} +- {:.4} (true 6.09, reduced chi2 {:.2})",
        fit.gammap_hat / atom.gamma0,
        fit.std_errors.gammap / atom.gamma0,
        fit.goodness
    );
    println!(
        "extinction   {:.5} +- {:.5} (model {:.5})",
        result.extinction.epsilon_hat,
        result.extinction.sigma,
        theory::scattering_probability(&atom, &photon)
    );
    println!(
        "peak P_e     {:.5} +- {:.5} at {:.1} ns (model {:.5})",
        result.peak.value,
        result.peak.sigma,
        result.peak.time * 1e9,
        theory::peak_excitation(&atom, &photon)
    );
    Ok(())
}
