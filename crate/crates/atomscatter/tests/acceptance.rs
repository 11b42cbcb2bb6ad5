//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::time::Instant;

use atomscatter::analysis;
use atomscatter::commands::{self, AnalyzeArgs, Command, FiguresArgs, SimulateArgs, TheoryArgs};
use atomscatter::config::SimConfigFile;
use atomscatter::manifest::{RunManifest, MANIFEST_FILE};
use atomscatter::simulate::{self, replica_seed};
use atomscatter::theory::{self, AtomParams, PhotonParams};
use atomscatter::TimeWindow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Worst-case accumulator that treats NaN as infinitely bad.
fn worse(acc: f64, x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        acc.max(x)
    }
}

fn atom(lambda: f64) -> AtomParams {
    AtomParams::from_linewidth_mhz(6.07, lambda).unwrap()
}

fn photon(atom: &AtomParams, ratio: f64) -> PhotonParams {
    PhotonParams::relative_to(atom, ratio, 0.0).unwrap()
}

fn theory_spot_values() -> Outcome {
    let a = atom(0.1);
    let e1 = theory::scattering_probability(&a, &photon(&a, 1.0));
    let b = atom(0.033);
    let e2 = theory::scattering_probability(&b, &photon(&b, 1.96));
    // "Exactly" up to the rounding of 4·0.1·0.9·0.5 in binary.
    let pass = (e1 - 0.18).abs() <= 4.0 * f64::EPSILON * 0.18 && (e2 - 0.04313).abs() <= 1e-5;
    outcome(
        pass,
        format!("eps(0.1, G0) = {e1:.15}, eps(0.033, 1.96 G0) = {e2:.7} (0.04313 +- 1e-5)"),
    )
}

fn conservation_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20170101);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let lambda = rng.random_range(0.001..0.999);
        let g0 = theory::mhz_to_rad_per_s(rng.random_range(0.5..50.0));
        let ratio = 10f64.powf(rng.random_range(-1.5..1.5));
        let t0 = rng.random_range(-50e-9..50e-9);
        let a = AtomParams::new(g0, lambda).unwrap();
        let p = PhotonParams::new(ratio * g0, t0).unwrap();
        let slow = g0.min(p.gammap);
        let eps = theory::scattering_probability(&a, &p);
        let tol = 1e-10 * eps / ((1.0 - lambda) * g0);
        let t_end = t0 + 80.0 / slow;
        let integral = common::integrate(|t| theory::excited_population(&a, &p, t), t0, t_end, tol);
        let rel = ((1.0 - lambda) * g0 * integral - eps).abs() / eps;
        worst = worse(worst, rel);
    }
    outcome(
        worst < 1e-6,
        format!("worst relative error over 50 draws = {worst:.2e} (< 1e-6)"),
    )
}

fn degeneracy_continuity() -> Outcome {
    let a = atom(0.033);
    let expected = 4.0 * 0.033 * (-2.0f64).exp();
    let mut worst = 0.0f64;
    for ratio in [1.0 - 1e-7, 1.0, 1.0 + 1e-7] {
        let v = theory::peak_excitation(&a, &photon(&a, ratio));
        worst = worse(worst, (v - expected).abs() / expected);
    }
    outcome(
        worst < 1e-6,
        format!("worst relative deviation from 4 Lambda e^-2 = {worst:.2e} (< 1e-6)"),
    )
}

fn figure_runs() -> Vec<commands::FigureRun> {
    let args = FiguresArgs {
        bandwidths: vec![1.96, 6.09],
        ..FiguresArgs::default()
    };
    commands::figure_runs(&args).unwrap()
}

fn bandwidth_recovery(runs: &[commands::FigureRun]) -> Outcome {
    let a = atom(0.033);
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let truth = run.nominal * a.gamma0;
        let fit = &run.result.bandwidth;
        let pull = (fit.gammap_hat - truth) / fit.std_errors.gammap;
        let rel = (fit.gammap_hat - truth) / truth;
        pass &= pull.abs() <= 3.0 && rel.abs() < 0.01;
        parts.push(format!(
            "{:.2} G0: fit {:.4}({:.0e}) G0, pull {pull:+.2}, rel {rel:+.1e}",
            run.nominal,
            fit.gammap_hat / a.gamma0,
            fit.std_errors.gammap / a.gamma0
        ));
    }
    outcome(pass, parts.join("; "))
}

fn extinction_recovery(runs: &[commands::FigureRun]) -> Outcome {
    let a = atom(0.033);
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let truth = theory::scattering_probability(&a, &photon(&a, run.nominal));
        let e = &run.result.extinction;
        let pull = (e.epsilon_hat - truth) / e.sigma;
        pass &= pull.abs() <= 3.0;
        parts.push(format!(
            "{:.2} G0: {:.5}({:.5}) vs {truth:.5}",
            run.nominal, e.epsilon_hat, e.sigma
        ));
    }
    let s = commands::summarize(&a, runs).extinction_ratio;
    let theory_ok = (s.value - s.theory_nominal).abs() <= 3.0 * s.sigma;
    let measured_ok = (s.value - 2.6).abs() <= (0.4f64.powi(2) + s.sigma.powi(2)).sqrt();
    pass &= theory_ok && measured_ok;
    parts.push(format!(
        "ratio {:.3}({:.3}) vs {:.3} (3 sigma) and 2.6(4)",
        s.value, s.sigma, s.theory_nominal
    ));
    outcome(pass, parts.join("; "))
}

/// Max |P_e reconstructed − P_e exact| over the bins, relative to the peak.
fn reconstruction_error(bin_width: f64) -> f64 {
    let (c, r, w) = common::noise_free(0.033, 1.96, common::LONG_WINDOW, bin_width);
    let trace = analysis::reconstruct_excitation(&r, &w, &c.atom, &common::LONG_WINDOW).unwrap();
    let peak = theory::peak_excitation(&c.atom, &c.photon);
    trace
        .times
        .iter()
        .zip(&trace.p_e)
        .map(|(&t, &p)| (p - theory::excited_population(&c.atom, &c.photon, t)).abs())
        .fold(0.0, worse)
        / peak
}

fn reconstruction_fidelity() -> Outcome {
    let e1 = reconstruction_error(1e-9);
    let e01 = reconstruction_error(0.1e-9);
    // Observed order between successive halvings, extrapolated linearly in
    // bin width to the asymptotic order.
    let widths = [1e-9, 0.5e-9, 0.25e-9, 0.125e-9];
    let errs: Vec<f64> = widths.iter().map(|&h| reconstruction_error(h)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let mids: Vec<f64> = widths.windows(2).map(|h| (h[0] * h[1]).sqrt()).collect();
    let n = orders.len() as f64;
    let (mx, my) = (mids.iter().sum::<f64>() / n, orders.iter().sum::<f64>() / n);
    let sxy: f64 = mids
        .iter()
        .zip(&orders)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let sxx: f64 = mids.iter().map(|x| (x - mx) * (x - mx)).sum();
    let asymptotic = my - sxy / sxx * mx;
    let pass = e1 < 1e-2 && e01 < 1e-4 && asymptotic.round() >= 2.0;
    outcome(
        pass,
        format!(
            "max error/peak {e1:.2e} at 1 ns (< 1e-2), {e01:.2e} at 0.1 ns (< 1e-4); \
             pairwise orders {:.3?}, asymptotic order {asymptotic:.3} (>= 2)",
            orders
        ),
    )
}

fn peak_reproduction(runs: &[commands::FigureRun]) -> Outcome {
    let a = atom(0.033);
    let s = commands::summarize(&a, runs).peak_ratio;
    let theory_ok = (s.value - s.theory_nominal).abs() <= 3.0 * s.sigma;
    let measured_ok = (s.value - 1.5).abs() <= (0.2f64.powi(2) + s.sigma.powi(2)).sqrt();
    outcome(
        theory_ok && measured_ok,
        format!(
            "ratio {:.3}({:.3}) vs {:.4} (3 sigma) and 1.5(2)",
            s.value, s.sigma, s.theory_nominal
        ),
    )
}

fn bootstrap_calibration() -> Outcome {
    const EXPERIMENTS: u64 = 200;
    let mut c = common::config(0.033, 1.96, 1_000_000);
    c.heralding_efficiency = 0.5;
    let truth = theory::scattering_probability(&c.atom, &c.photon);
    let mut covered = 0;
    for i in 0..EXPERIMENTS {
        let seed = replica_seed(8_000_000, i);
        let c = c.clone().with_seed(seed);
        let (r, w) = simulate::simulate_pair(&c).unwrap();
        let eps = analysis::extinction(&r.histogram, &w.histogram, &TimeWindow::SUMMATION).unwrap();
        let boot = analysis::bootstrap_uncertainty(
            &r.histogram,
            &w.histogram,
            &c.atom,
            &TimeWindow::SUMMATION,
            400,
            seed,
        )
        .unwrap();
        if (eps.epsilon_hat - truth).abs() <= boot.epsilon_sigma {
            covered += 1;
        }
    }
    let coverage = covered as f64 / EXPERIMENTS as f64;
    outcome(
        (coverage - 0.68).abs() <= 0.07,
        format!("coverage {covered}/{EXPERIMENTS} = {coverage:.3} (0.68 +- 0.07)"),
    )
}

fn same_outputs(a: &Path, b: &Path, manifest: &RunManifest) -> bool {
    manifest
        .outputs
        .iter()
        .all(|rec| std::fs::read(a.join(&rec.path)).ok() == std::fs::read(b.join(&rec.path)).ok())
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let dir = |name: &str| root.path().join(name);
    let sim = Command::Simulate(SimulateArgs {
        config: SimConfigFile {
            seed: 42,
            ..SimConfigFile::default()
        },
    });
    let first_sim = commands::run(&sim, &dir("sim")).unwrap();
    let analyze = Command::Analyze(AnalyzeArgs {
        bootstrap: Some(200),
        seed: 7,
        ..AnalyzeArgs::new(
            dir("sim").join(commands::REFERENCE_FILE),
            dir("sim").join(commands::WITH_ATOM_FILE),
        )
    });
    let figures = Command::ReproduceFigures(FiguresArgs {
        bootstrap: 100,
        n_heralds: 1_000_000,
        ..FiguresArgs::default()
    });
    let theory = Command::Theory(TheoryArgs::default());
    let mut runs = vec![("simulate", "sim", first_sim)];
    for (name, command) in [
        ("analyze", &analyze),
        ("reproduce-figures", &figures),
        ("theory", &theory),
    ] {
        runs.push((name, name, commands::run(command, &dir(name)).unwrap()));
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, sub, original) in runs {
        let replay_dir = dir(&format!("{sub}-replay"));
        let replayed = commands::replay(&dir(sub).join(MANIFEST_FILE), &replay_dir).unwrap();
        let identical = original.output_differences(&replayed).is_empty()
            && replayed.output_differences(&original).is_empty()
            && same_outputs(&dir(sub), &replay_dir, &original);
        pass &= identical;
        parts.push(format!(
            "{name} {} files {}",
            original.outputs.len(),
            if identical { "identical" } else { "DIFFER" }
        ));
    }
    outcome(pass, parts.join(", "))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} [{id}] {name}: {} ({:.2} s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failures += 1;
        }
    };
    report(1, "theory spot values", &theory_spot_values);
    report(2, "conservation identity", &conservation_identity);
    report(3, "degeneracy continuity", &degeneracy_continuity);
    let start = Instant::now();
    let runs = figure_runs();
    println!(
        "     simulated 1e7 heralds at 1.96 and 6.09 G0 in {:.2} s",
        start.elapsed().as_secs_f64()
    );
    report(4, "bandwidth recovery", &|| bandwidth_recovery(&runs));
    report(5, "extinction recovery", &|| extinction_recovery(&runs));
    report(6, "reconstruction fidelity", &reconstruction_fidelity);
    report(7, "peak excitation ratio", &|| peak_reproduction(&runs));
    report(8, "bootstrap calibration", &bootstrap_calibration);
    report(9, "determinism", &determinism);
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
