//! Poissonian bootstrap of the extinction and peak excitation, compared with
//! first-order error propagation.
//!
//! cargo run --example bootstrap_errors

use atomscatter::analysis;
use atomscatter::{simulate, AtomParams, PhotonParams, SimConfig, TimeWindow};

fn main() -> atomscatter::Result<()> {
    let atom = AtomParams::from_linewidth_mhz(6.07, 0.033)?;
    let photon = PhotonParams::relative_to(&atom, 1.96, 0.0)?;
    let mut config = SimConfig::new(atom, photon, 1_000_000).with_seed(3);
    config.heralding_efficiency = 0.5;
    let (r, w) = simulate::simulate_pair(&config)?;
    let (r, w) = (r.histogram, w.histogram);
    let window = TimeWindow::SUMMATION;

    let analytic = analysis::extinction(&r, &w, &window)?;
    let boot = analysis::bootstrap_uncertainty(&r, &w, &atom, &window, 1000, 11)?;
    println!("extinction        {:.5}", analytic.epsilon_hat);
    println!("  analytic sigma  {:.5}", analytic.sigma);
    println!("  bootstrap sigma {:.5}", boot.epsilon_sigma);
    let peak = analysis::extract_peak(&analysis::reconstruct_excitation(&r, &w, &atom, &window)?)?;
    println!("peak P_e          {:.5}", peak.value);
    println!("  analytic sigma  {:.5}", peak.sigma);
    println!("  bootstrap sigma {:.5}", boot.peak_sigma);
    println!("peak time sigma   {:.2} ns", boot.peak_time_sigma * 1e9);
    Ok(())
}
