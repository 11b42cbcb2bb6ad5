//! Poissonian parametric bootstrap: every bin of both histograms is redrawn
//! from a Poisson distribution with the observed count as mean and the
//! estimators are rerun on each replica.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extinction_from_sums;
use super::reconstruct::{extract_peak, integrate};
use crate::error::{Error, Result};
use crate::histogram::{Histogram, TimeWindow};
use crate::simulate::{poisson_draw, stream_rng};
use crate::theory::AtomParams;

pub const MIN_RESAMPLES: usize = 100;

/// Replica streams start here so they never coincide with the simulator streams
/// of the same seed.
const BOOTSTRAP_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub n_resamples: usize,
    pub epsilon_samples: Vec<f64>,
    pub peak_value_samples: Vec<f64>,
    pub peak_time_samples: Vec<f64>,
    pub epsilon_sigma: f64,
    pub peak_sigma: f64,
    pub peak_time_sigma: f64,
    /// Per-bin standard deviation of the reconstructed P_e.
    pub p_e_sigma: Vec<f64>,
}

struct Replica {
    epsilon: f64,
    peak_value: f64,
    peak_time: f64,
    p_e: Vec<f64>,
}

fn std_dev(samples: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = samples
        .clone()
        .fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n < 2 {
        return 0.0;
    }
    let mean = sum / n as f64;
    let ss: f64 = samples.map(|x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Bootstrap the extinction, excitation trace and peak.
///
/// Each replica draws from its own RNG stream of `seed`, so the result does not
/// depend on how replicas are scheduled across threads.
pub fn bootstrap_uncertainty(
    reference: &Histogram,
    with_atom: &Histogram,
    atom: &AtomParams,
    window: &TimeWindow,
    n_resamples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if n_resamples < MIN_RESAMPLES {
        return Err(Error::domain(
            "n_resamples",
            format!("need at least {MIN_RESAMPLES}, got {n_resamples}"),
        ));
    }
    reference.check_same_binning(with_atom)?;
    atom.validate()?;
    let range = reference.window_range(window)?;
    if reference.counts[range.clone()].iter().all(|&c| c == 0) {
        return Err(Error::Normalization(
            "reference histogram has no counts in the summation window".into(),
        ));
    }
    let times: Vec<f64> = range.clone().map(|i| reference.bin_center(i)).collect();
    let g0_obs = &reference.counts[range.clone()];
    let g_obs = &with_atom.counts[range];

    let replicas: Vec<Replica> = (0..n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, BOOTSTRAP_STREAM_BASE + r as u64);
            let g0: Vec<f64> = g0_obs
                .iter()
                .map(|&c| poisson_draw(&mut rng, c as f64) as f64)
                .collect();
            let g: Vec<f64> = g_obs
                .iter()
                .map(|&c| poisson_draw(&mut rng, c as f64) as f64)
                .collect();
            let s0: f64 = g0.iter().sum();
            let s: f64 = g.iter().sum();
            // A replica with an empty reference is degenerate; count it as
            // no extinction and no excitation.
            let Ok(ext) = extinction_from_sums(s0, s, window) else {
                return Replica {
                    epsilon: 0.0,
                    peak_value: 0.0,
                    peak_time: times[0],
                    p_e: vec![0.0; times.len()],
                };
            };
            let trace = integrate(&g0, &g, s0, reference.bin_width, times.clone(), atom);
            let (peak_value, peak_time) = match extract_peak(&trace) {
                Ok(p) => (p.value, p.time),
                Err(_) => (trace.p_e[0], trace.times[0]),
            };
            Replica {
                epsilon: ext.epsilon_hat,
                peak_value,
                peak_time,
                p_e: trace.p_e,
            }
        })
        .collect();

    let epsilon_samples: Vec<f64> = replicas.iter().map(|r| r.epsilon).collect();
    let peak_value_samples: Vec<f64> = replicas.iter().map(|r| r.peak_value).collect();
    let peak_time_samples: Vec<f64> = replicas.iter().map(|r| r.peak_time).collect();
    let p_e_sigma = (0..times.len())
        .map(|i| std_dev(replicas.iter().map(move |r| r.p_e[i])))
        .collect();
    Ok(BootstrapResult {
        n_resamples,
        epsilon_sigma: std_dev(epsilon_samples.iter().copied()),
        peak_sigma: std_dev(peak_value_samples.iter().copied()),
        peak_time_sigma: std_dev(peak_time_samples.iter().copied()),
        epsilon_samples,
        peak_value_samples,
        peak_time_samples,
        p_e_sigma,
    })
}
