//! Reconstruct P_e(t) from noise-free synthetic histograms and compare with
//! the closed form at several bin widths.
//!
//! cargo run --example reconstruct_excitation

use atomscatter::analysis;
use atomscatter::{simulate, theory, AtomParams, Label, PhotonParams, SimConfig, TimeWindow};

fn main() -> atomscatter::Result<()> {
    let atom = AtomParams::from_linewidth_mhz(6.07, 0.033)?;
    let photon = PhotonParams::relative_to(&atom, 2.0, 0.0)?;
    let window = TimeWindow::new(-10e-9, 400e-9)?;
    let peak = theory::peak_excitation(&atom, &photon);
    for bin_width in [1e-9, 0.5e-9, 0.25e-9, 0.1e-9] {
        let mut config = SimConfig::new(atom, photon, 1_000_000_000_000_000);
        config.window = window;
        config.bin_width = bin_width;
        let reference = simulate::expected_histogram(&config, Label::Reference)?;
        let with_atom = simulate::expected_histogram(&config, Label::WithAtom)?;
        let trace = analysis::reconstruct_excitation(&reference, &with_atom, &atom, &window)?;
        let err = trace
            .times
            .iter()
            .zip(&trace.p_e)
            .map(|(&t, &p)| (p - theory::excited_population(&atom, &photon, t)).abs())
            .fold(0.0, f64::max);
        println!(
            "bin {:5.2} ns: max error {:.2e} of peak",
            bin_width * 1e9,
            err / peak
        );
    }
    Ok(())
}
