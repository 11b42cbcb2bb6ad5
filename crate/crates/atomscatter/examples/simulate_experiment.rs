//! Simulate reference and with-atom histograms and write them as CSV.
//!
//! cargo run --example simulate_experiment [OUT_DIR]

use std::path::PathBuf;

use atomscatter::simulate;
use atomscatter::{AtomParams, PhotonParams, SimConfig};

fn main() -> atomscatter::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "out/simulated".into()),
    );
    let atom = AtomParams::from_linewidth_mhz(6.07, 0.033)?;
    let photon = PhotonParams::relative_to(&atom, 1.96, 0.0)?;
    let mut config = SimConfig::new(atom, photon, 10_000_000).with_seed(1);
    config.heralding_efficiency = 0.5;
    config.edge_smearing = 1e-9;

    let (reference, with_atom) = simulate::simulate_pair(&config)?;
    std::fs::create_dir_all(&out).map_err(|e| atomscatter::Error::io(&out, e))?;
    let h0 = reference.histogram.write_csv(&out.join("reference.csv"))?;
    let h1 = with_atom.histogram.write_csv(&out.join("with_atom.csv"))?;
    println!(
        "reference: {} counts, sha256 {h0}",
        reference.histogram.total()
    );
    println!(
        "with atom: {} counts, sha256 {h1}",
        with_atom.histogram.total()
    );
    println!(
        "truncated envelope fraction {:.2e}, clamped bins {}",
        reference.diagnostics.truncated_fraction, with_atom.diagnostics.clamped_bins
    );
    Ok(())
}
