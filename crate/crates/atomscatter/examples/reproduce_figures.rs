//! Simulate the five figure bandwidths at 10^7 heralds, analyze them and
//! write the plot-ready bundle.
//!
//! cargo run --release --example reproduce_figures [OUT_DIR]

use std::path::PathBuf;

use atomscatter::commands::{self, FiguresArgs};

fn main() -> atomscatter::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "out/figures".into()),
    );
    let manifest = commands::cmd_reproduce_figures(&FiguresArgs::default(), &out)?;
    let summary: commands::FiguresSummary = serde_json::from_value(manifest.diagnostics)?;
    println!(
        "{:>6} {:>16} {:>18} {:>18}",
        "Gp/G0", "fitted", "extinction", "peak P_e"
    );
    for b in &summary.bandwidths {
        println!(
            "{:>6.2} {:>9.3}({:.3}) {:>9.5}({:.5}) {:>9.5}({:.5})",
            b.nominal_over_gamma0,
            b.fitted_over_gamma0,
            b.fitted_sigma_over_gamma0,
            b.epsilon,
            b.epsilon_sigma,
            b.peak,
            b.peak_sigma
        );
    }
    let (e, p) = (&summary.extinction_ratio, &summary.peak_ratio);
    println!(
        "extinction ratio {:.3}({:.3}), model {:.3}",
        e.value, e.sigma, e.theory_nominal
    );
    println!(
        "peak ratio       {:.3}({:.3}), model {:.4}",
        p.value, p.sigma, p.theory_nominal
    );
    println!(
        "wrote {} files to {}",
        manifest.outputs.len(),
        out.display()
    );
    Ok(())
}
