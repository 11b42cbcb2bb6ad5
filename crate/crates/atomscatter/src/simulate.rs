//! Forward model of the heralded transmission experiment.
//!
//! Each bin of a coincidence histogram is an independent Poisson draw whose
//! mean is the number of heralds times the detection probability in that bin.
//! Sampling the binned means directly is exact for an inhomogeneous Poisson
//! process that is histogrammed afterwards.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{Histogram, Label, TimeWindow};
use crate::theory::{self, AtomParams, PhotonParams};

/// Fraction of the photon envelope that may fall outside the window before a
/// truncation warning is logged.
pub const TRUNCATION_WARNING: f64 = 1e-3;

/// Sub-steps per bin on the fine grid used when the rising edge is smeared.
const SMEARING_SUBSTEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub atom: AtomParams,
    pub photon: PhotonParams,
    pub n_heralds: u64,
    /// Forward detection probability per herald without the atom (η_f).
    pub heralding_efficiency: f64,
    /// Flat rate of uncorrelated detector events per herald (1/s).
    pub background_rate: f64,
    pub window: TimeWindow,
    pub bin_width: f64,
    pub seed: u64,
    /// Time constant of the rising-edge smearing kernel (s); 0 keeps the ideal edge.
    pub edge_smearing: f64,
}

impl SimConfig {
    /// Defaults: 1 ns bins over −10..100 ns, ideal edge, no background.
    pub fn new(atom: AtomParams, photon: PhotonParams, n_heralds: u64) -> Self {
        SimConfig {
            atom,
            photon,
            n_heralds,
            heralding_efficiency: 1.0,
            background_rate: 0.0,
            window: TimeWindow::SUMMATION,
            bin_width: 1e-9,
            seed: 0,
            edge_smearing: 0.0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.atom.validate()?;
        self.photon.validate()?;
        if self.n_heralds < 1 {
            return Err(Error::domain("n_heralds", "must be at least 1"));
        }
        if !(self.heralding_efficiency > 0.0 && self.heralding_efficiency <= 1.0) {
            return Err(Error::domain(
                "heralding_efficiency",
                format!("must lie in (0, 1], got {}", self.heralding_efficiency),
            ));
        }
        if !(self.background_rate >= 0.0 && self.background_rate.is_finite()) {
            return Err(Error::domain("background_rate", "must be finite and >= 0"));
        }
        TimeWindow::new(self.window.t_min, self.window.t_max)?;
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::domain("bin_width", "must be > 0"));
        }
        let ratio = self.window.len() / self.bin_width;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) || ratio.round() < 1.0 {
            return Err(Error::domain(
                "bin_width",
                format!(
                    "window length {:e} s is not an integer multiple of {:e} s",
                    self.window.len(),
                    self.bin_width
                ),
            ));
        }
        if !(self.edge_smearing >= 0.0 && self.edge_smearing.is_finite()) {
            return Err(Error::domain("edge_smearing", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        (self.window.len() / self.bin_width).round() as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Bins whose with-atom mean came out negative and was set to 0.
    pub clamped_bins: usize,
    /// Fraction of the incident photon envelope that lies outside the window.
    pub truncated_fraction: f64,
}

/// Per-bin Poisson means of a histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct BinMeans {
    pub t_start: f64,
    pub bin_width: f64,
    pub means: Vec<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub histogram: Histogram,
    pub diagnostics: Diagnostics,
}

// 16-point Gauss-Legendre on [-1, 1], positive half.
const GL16_NODES: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_WEIGHTS: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

/// 16-point Gauss-Legendre integral of `f` over `[a, b]`.
pub fn gauss_legendre_16(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
        sum += w * (f(mid - half * x) + f(mid + half * x));
    }
    sum * half
}

/// Integral over a bin, split at the envelope edge `t0` so the quadrature
/// never straddles the kink.
fn bin_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, t0: f64) -> f64 {
    if b <= t0 {
        0.0
    } else if a >= t0 {
        gauss_legendre_16(&f, a, b)
    } else {
        gauss_legendre_16(&f, t0, b)
    }
}

/// Convolve uniformly sampled envelope values (spacing `dt`) with a normalized
/// exponential kernel of time constant `tau`.
///
/// The kernel is causal in shape but shifted earlier by `tau`, so the mean
/// arrival time is unchanged and the edge is rounded on both sides. Mass
/// pushed past either end of the sample range is lost; pad the input if the
/// integral must be preserved.
pub fn apply_edge_smearing(samples: &[f64], dt: f64, tau: f64) -> Vec<f64> {
    if tau <= 0.0 || samples.is_empty() {
        return samples.to_vec();
    }
    let decay = (-dt / tau).exp();
    let gain = 1.0 - decay;
    let shift = (tau / dt).round() as usize;
    let mut out = Vec::with_capacity(samples.len());
    let mut state = 0.0;
    for n in 0..samples.len() + shift {
        let x = samples.get(n).copied().unwrap_or(0.0);
        state = decay * state + gain * x;
        if n >= shift {
            out.push(state);
        }
    }
    out
}

/// Expected counts per bin for the reference (`Label::Reference`) or
/// with-atom configuration.
pub fn expected_means(config: &SimConfig, label: Label) -> Result<BinMeans> {
    config.validate()?;
    let (incident, transmitted) = if config.edge_smearing > 0.0 {
        smeared_bin_integrals(config)
    } else {
        ideal_bin_integrals(config)
    };
    let per_herald = match label {
        Label::Reference => incident.clone(),
        Label::WithAtom => transmitted,
    };
    let mut clamped_bins = 0;
    let n = config.n_heralds as f64;
    let background = config.background_rate * config.bin_width;
    let means = per_herald
        .into_iter()
        .map(|p| {
            let p = if p < 0.0 {
                clamped_bins += 1;
                0.0
            } else {
                p
            };
            n * (config.heralding_efficiency * p + background)
        })
        .collect();
    let truncated_fraction = (1.0 - incident.iter().sum::<f64>()).max(0.0);
    if truncated_fraction > TRUNCATION_WARNING {
        log::warn!(
            "window [{:e}, {:e}] s misses {:.3e} of the photon envelope; extinction and normalization are biased",
            config.window.t_min,
            config.window.t_max,
            truncated_fraction
        );
    }
    if clamped_bins > 0 {
        log::debug!("{clamped_bins} with-atom bin means clamped to zero");
    }
    Ok(BinMeans {
        t_start: config.window.t_min,
        bin_width: config.bin_width,
        means,
        diagnostics: Diagnostics {
            clamped_bins,
            truncated_fraction,
        },
    })
}

/// Per-herald bin probabilities `(∫P_p, ∫(P_p − δ))` for the ideal edge.
fn ideal_bin_integrals(config: &SimConfig) -> (Vec<f64>, Vec<f64>) {
    let atom = &config.atom;
    let photon = &config.photon;
    let mut incident = Vec::with_capacity(config.n_bins());
    let mut transmitted = Vec::with_capacity(config.n_bins());
    for i in 0..config.n_bins() {
        let a = config.window.t_min + i as f64 * config.bin_width;
        let b = a + config.bin_width;
        let envelope = bin_integral(|t| theory::photon_envelope(photon, t), a, b, photon.t0);
        let scattered = bin_integral(|t| theory::scattered_rate(atom, photon, t), a, b, photon.t0);
        incident.push(envelope);
        transmitted.push(envelope - scattered);
    }
    (incident, transmitted)
}

/// Same as [`ideal_bin_integrals`] but with the envelope smeared on a fine grid
/// and the atom driven by the smeared field.
fn smeared_bin_integrals(config: &SimConfig) -> (Vec<f64>, Vec<f64>) {
    let atom = &config.atom;
    let photon = &config.photon;
    let tau = config.edge_smearing;
    let bw = config.bin_width;
    let n_bins = config.n_bins();
    // Prepend whole bins so mass moved ahead of the edge is still on the grid.
    let lead_bins = ((config.window.t_min - (photon.t0 - 2.0 * tau)) / bw)
        .ceil()
        .max(0.0) as usize;
    let h = bw / SMEARING_SUBSTEPS as f64;
    let grid_start = config.window.t_min - lead_bins as f64 * bw;
    let n_fine = (lead_bins + n_bins) * SMEARING_SUBSTEPS;

    // Exact sub-interval averages of the ideal envelope.
    let ideal: Vec<f64> = (0..n_fine)
        .map(|j| {
            let a = (grid_start + j as f64 * h).max(photon.t0);
            let b = grid_start + (j + 1) as f64 * h;
            if b <= photon.t0 {
                0.0
            } else {
                let ea = (-photon.gammap * (a - photon.t0)).exp();
                let eb = (-photon.gammap * (b - photon.t0)).exp();
                (ea - eb) / h
            }
        })
        .collect();
    let smeared = apply_edge_smearing(&ideal, h, tau);

    let g = atom.coupling();
    let half_decay = 0.5 * atom.gamma0;
    let full = (-half_decay * h).exp();
    let half = (-half_decay * 0.5 * h).exp();
    let mut amplitude = 0.0;
    let mut incident = vec![0.0; n_bins];
    let mut transmitted = vec![0.0; n_bins];
    for (j, &flux) in smeared.iter().enumerate() {
        let psi = flux.max(0.0).sqrt();
        let drive = g * psi / half_decay;
        let mid = amplitude * half + drive * (1.0 - half);
        amplitude = amplitude * full + drive * (1.0 - full);
        let bin = j / SMEARING_SUBSTEPS;
        if bin < lead_bins {
            continue;
        }
        let scattered = 2.0 * g * psi * mid - g * g * mid * mid;
        incident[bin - lead_bins] += flux * h;
        transmitted[bin - lead_bins] += (flux - scattered) * h;
    }
    (incident, transmitted)
}

/// Independent RNG stream for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for replica `index` of a run seeded with `seed` (SplitMix64 finalizer).
pub fn replica_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw one Poisson variate; a mean of zero always yields zero.
pub fn poisson_draw(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean > 0.0 {
        // Poisson::new only fails for non-positive or non-finite means.
        Poisson::new(mean)
            .map(|d| d.sample(rng) as u64)
            .unwrap_or(0)
    } else {
        0
    }
}

fn sample(config: &SimConfig, label: Label) -> Result<Simulated> {
    let means = expected_means(config, label)?;
    let stream = match label {
        Label::Reference => 0,
        Label::WithAtom => 1,
    };
    let mut rng = stream_rng(config.seed, stream);
    let counts = means
        .means
        .iter()
        .map(|&m| poisson_draw(&mut rng, m))
        .collect();
    let histogram = Histogram {
        t_start: config.window.t_min,
        bin_width: config.bin_width,
        counts,
        n_heralds: config.n_heralds,
        label,
        seed: Some(config.seed),
    };
    Ok(Simulated {
        histogram,
        diagnostics: means.diagnostics,
    })
}

/// Reference histogram with no atom in the probe path.
pub fn simulate_reference(config: &SimConfig) -> Result<Simulated> {
    sample(config, Label::Reference)
}

/// Probe histogram with the atom scattering part of each photon out of the mode.
pub fn simulate_with_atom(config: &SimConfig) -> Result<Simulated> {
    sample(config, Label::WithAtom)
}

/// Both histograms of one simulated experiment.
pub fn simulate_pair(config: &SimConfig) -> Result<(Simulated, Simulated)> {
    Ok((simulate_reference(config)?, simulate_with_atom(config)?))
}

/// Histogram holding the rounded expected counts instead of a Poisson draw.
/// With a large `n_heralds` this is a noise-free synthetic data set.
pub fn expected_histogram(config: &SimConfig, label: Label) -> Result<Histogram> {
    let means = expected_means(config, label)?;
    Ok(Histogram {
        t_start: means.t_start,
        bin_width: means.bin_width,
        counts: means.means.iter().map(|m| m.round() as u64).collect(),
        n_heralds: config.n_heralds,
        label,
        seed: None,
    })
}
