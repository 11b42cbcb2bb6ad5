mod common;

use atomscatter::analysis;
use atomscatter::simulate::{self, replica_seed};
use atomscatter::theory::{self, AtomParams, PhotonParams};
use atomscatter::{Label, SimConfig, TimeWindow};

fn replicas(config: &SimConfig, label: Label, n: u64) -> Vec<Vec<u64>> {
    (0..n)
        .map(|i| {
            let c = config.clone().with_seed(replica_seed(99, i));
            let sim = match label {
                Label::Reference => simulate::simulate_reference(&c),
                Label::WithAtom => simulate::simulate_with_atom(&c),
            };
            sim.unwrap().histogram.counts
        })
        .collect()
}

fn column_stats(rows: &[Vec<u64>], bin: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[bin] as f64).sum::<f64>() / n;
    let var = rows
        .iter()
        .map(|r| (r[bin] as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    (mean, var)
}

#[test]
fn reference_total_matches_envelope_integral() {
    let atom = AtomParams::from_linewidth_mhz(6.07, 0.033).unwrap();
    let photon = PhotonParams::new(theory::mhz_to_rad_per_s(12.0), 0.0).unwrap();
    let mut c = SimConfig::new(atom, photon, 1_000_000).with_seed(3);
    c.heralding_efficiency = 1.0;
    let total = simulate::simulate_reference(&c).unwrap().histogram.total() as f64;
    let expected = 1e6 * (1.0 - (-photon.gammap * 1e-7).exp());
    assert!(
        (total - expected).abs() < 5.0 * expected.sqrt(),
        "{total} vs {expected}"
    );
}

#[test]
fn single_herald_gives_small_integer_counts() {
    let c = common::config(0.033, 1.96, 1);
    let totals: Vec<u64> = (0..2000)
        .map(|i| {
            let c = c.clone().with_seed(i);
            simulate::simulate_reference(&c).unwrap().histogram.total()
        })
        .collect();
    let mean = totals.iter().sum::<u64>() as f64 / totals.len() as f64;
    assert!((mean - 1.0).abs() < 0.1, "{mean}");
}

#[test]
fn same_seed_same_histogram() {
    let c = common::config(0.033, 1.96, 1_000_000).with_seed(11);
    let (a, b) = simulate::simulate_pair(&c).unwrap();
    let (a2, b2) = simulate::simulate_pair(&c).unwrap();
    assert_eq!(a.histogram, a2.histogram);
    assert_eq!(b.histogram, b2.histogram);
    let other = simulate::simulate_reference(&c.clone().with_seed(12)).unwrap();
    assert_ne!(a.histogram.counts, other.histogram.counts);
}

#[test]
fn mean_field_over_200_seeds() {
    let mut c = common::config(0.033, 1.96, 100_000);
    c.heralding_efficiency = 0.5;
    c.background_rate = 2e5;
    for label in [Label::Reference, Label::WithAtom] {
        let expected = simulate::expected_means(&c, label).unwrap().means;
        let rows = replicas(&c, label, 200);
        for (bin, &mu) in expected.iter().enumerate() {
            let (mean, _) = column_stats(&rows, bin);
            let se = (mu / 200.0).sqrt().max(1e-3);
            assert!(
                (mean - mu).abs() < 5.0 * se,
                "{label:?} bin {bin}: {mean} vs {mu}"
            );
        }
    }
}

#[test]
fn poisson_dispersion() {
    let mut c = common::config(0.033, 6.09, 100_000);
    c.heralding_efficiency = 0.5;
    let rows = replicas(&c, Label::WithAtom, 5000);
    let expected = simulate::expected_means(&c, Label::WithAtom).unwrap().means;
    let mut checked = 0;
    for (bin, &mu) in expected.iter().enumerate() {
        if mu < 50.0 {
            continue;
        }
        let (mean, var) = column_stats(&rows, bin);
        let ratio = var / mean;
        assert!((0.9..=1.1).contains(&ratio), "bin {bin}: {ratio}");
        checked += 1;
    }
    assert!(checked > 20);
}

#[test]
fn zero_overlap_is_indistinguishable_from_reference() {
    let c = common::config(0.0, 1.96, 1_000_000).with_seed(5);
    let (r, w) = simulate::simulate_pair(&c).unwrap();
    let (r, w) = (r.histogram.counts, w.histogram.counts);
    // Two-sample chi-square over bins with counts.
    let (s1, s2) = (r.iter().sum::<u64>() as f64, w.iter().sum::<u64>() as f64);
    let (k1, k2) = ((s2 / s1).sqrt(), (s1 / s2).sqrt());
    let mut chi2 = 0.0;
    let mut dof = 0;
    for (&a, &b) in r.iter().zip(&w) {
        if a + b == 0 {
            continue;
        }
        chi2 += (k1 * a as f64 - k2 * b as f64).powi(2) / (a + b) as f64;
        dof += 1;
    }
    assert!(dof >= 100);
    // p > 1e-3 for chi-square with ~110 dof corresponds to chi2 < ~167.
    let dof = dof as f64;
    let z = ((chi2 / dof).cbrt() - (1.0 - 2.0 / (9.0 * dof))) / (2.0 / (9.0 * dof)).sqrt();
    assert!(z < 3.09, "chi2 {chi2} over {dof} dof (z = {z})");
}

#[test]
fn extinction_converges_to_closed_form() {
    let mut c = common::config(0.033, 1.96, 10_000_000).with_seed(21);
    c.window = common::LONG_WINDOW;
    let (r, w) = simulate::simulate_pair(&c).unwrap();
    let e = analysis::extinction(&r.histogram, &w.histogram, &c.window).unwrap();
    let truth = theory::scattering_probability(&c.atom, &c.photon);
    assert!(
        (e.epsilon_hat - truth).abs() < 3.0 * e.sigma,
        "{} +- {} vs {truth}",
        e.epsilon_hat,
        e.sigma
    );
}

#[test]
fn bin_means_match_scattered_rate_quadrature() {
    let mut c = common::config(0.033, 1.96, 1_000_000);
    c.heralding_efficiency = 0.7;
    let reference = simulate::expected_means(&c, Label::Reference).unwrap();
    let with_atom = simulate::expected_means(&c, Label::WithAtom).unwrap();
    let scale = c.n_heralds as f64 * c.heralding_efficiency;
    for i in 0..reference.means.len() {
        let a = reference.t_start + i as f64 * reference.bin_width;
        let b = a + reference.bin_width;
        let a = a.max(c.photon.t0);
        let deficit = if b > a {
            common::integrate(
                |t| theory::scattered_rate(&c.atom, &c.photon, t),
                a,
                b,
                1e-15,
            )
        } else {
            0.0
        };
        let want = reference.means[i] - scale * deficit;
        assert!(
            (with_atom.means[i] - want).abs() < 1e-9 * reference.means[i].max(1.0),
            "bin {i}"
        );
    }
    // The deficit sums to the windowed share of epsilon.
    let total: f64 = reference
        .means
        .iter()
        .zip(&with_atom.means)
        .map(|(r, w)| r - w)
        .sum();
    let windowed = common::integrate(
        |t| theory::scattered_rate(&c.atom, &c.photon, t),
        0.0,
        c.window.t_max,
        1e-14,
    );
    assert!((total / scale - windowed).abs() < 1e-9);
}

#[test]
fn edge_smearing_preserves_integral_and_widens_support() {
    let dt = 0.01e-9;
    let photon = PhotonParams::new(2.0 * theory::mhz_to_rad_per_s(6.07), 0.0).unwrap();
    let times: Vec<f64> = (0..40_000).map(|i| -50e-9 + i as f64 * dt).collect();
    let samples: Vec<f64> = times
        .iter()
        .map(|&t| theory::photon_envelope(&photon, t))
        .collect();
    assert_eq!(simulate::apply_edge_smearing(&samples, dt, 0.0), samples);
    let smeared = simulate::apply_edge_smearing(&samples, dt, 2e-9);
    let sum = |v: &[f64]| v.iter().sum::<f64>() * dt;
    assert!((sum(&smeared) - sum(&samples)).abs() < 1e-6 * sum(&samples));
    let edge = times.iter().position(|&t| t >= 0.0).unwrap();
    assert_eq!(samples[edge - 10], 0.0);
    assert!(smeared[edge - 10] > 0.0);
}

#[test]
fn smeared_simulation_keeps_reference_total() {
    let mut ideal = common::config(0.033, 1.96, 1_000_000_000_000);
    ideal.window = common::LONG_WINDOW;
    let mut smeared = ideal.clone();
    smeared.edge_smearing = 2e-9;
    let total = |c: &SimConfig, label| -> f64 {
        simulate::expected_means(c, label)
            .unwrap()
            .means
            .iter()
            .sum()
    };
    let (a, b) = (
        total(&ideal, Label::Reference),
        total(&smeared, Label::Reference),
    );
    assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    // A softer edge changes the pulse shape, so the extinction may change,
    // but it stays a deficit.
    let w = total(&smeared, Label::WithAtom);
    assert!(w < b && w > 0.9 * b);
}

#[test]
fn truncated_window_is_reported() {
    let mut c = common::config(0.033, 0.5, 1000);
    c.window = TimeWindow::new(-10e-9, 20e-9).unwrap();
    let means = simulate::expected_means(&c, Label::Reference).unwrap();
    assert!(means.diagnostics.truncated_fraction > 0.1);
    assert_eq!(means.diagnostics.clamped_bins, 0);
}

#[test]
fn invalid_configs_rejected() {
    let base = common::config(0.033, 1.96, 10);
    let mut bad = vec![];
    let mut c = base.clone();
    c.n_heralds = 0;
    bad.push(c);
    let mut c = base.clone();
    c.heralding_efficiency = 0.0;
    bad.push(c);
    let mut c = base.clone();
    c.background_rate = -1.0;
    bad.push(c);
    let mut c = base.clone();
    c.bin_width = 0.3e-9;
    bad.push(c);
    let mut c = base;
    c.window = TimeWindow {
        t_min: 1e-8,
        t_max: 0.0,
    };
    bad.push(c);
    for c in bad {
        assert!(simulate::simulate_reference(&c).is_err());
    }
}
