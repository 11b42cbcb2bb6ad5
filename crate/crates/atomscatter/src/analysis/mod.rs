//! Measurement pipeline: normalization, bandwidth fit, extinction,
//! excitation reconstruction and Poissonian bootstrap.

mod bootstrap;
mod fit;
mod reconstruct;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{bin_range, Histogram, TimeWindow};
use crate::theory::AtomParams;

pub use bootstrap::{bootstrap_uncertainty, BootstrapResult, MIN_RESAMPLES};
pub use fit::{fit_bandwidth, BandwidthFit, FitErrors, MAX_ITERATIONS, MIN_FIT_BINS};
pub use reconstruct::{extract_peak, reconstruct_excitation, ExcitationTrace, PeakEstimate};

/// Reference histogram normalized to the heralding efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedTrace {
    pub t_start: f64,
    pub bin_width: f64,
    /// `G0(t_i)/(n_heralds · η_f)` for every bin of the histogram.
    pub rates: Vec<f64>,
    /// Heralding efficiency: window sum of counts per herald.
    pub eta_f: f64,
    pub n_heralds: u64,
    pub window: TimeWindow,
}

impl NormalizedTrace {
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.t_start + (i as f64 + 0.5) * self.bin_width
    }

    /// Counts per bin reconstructed from the rates.
    pub fn counts(&self) -> Vec<f64> {
        let scale = self.n_heralds as f64 * self.eta_f;
        self.rates.iter().map(|r| r * scale).collect()
    }
}

/// Normalize a reference histogram so that its rates sum to one over `window`.
pub fn normalize(reference: &Histogram, window: &TimeWindow) -> Result<NormalizedTrace> {
    reference.validate()?;
    if reference.n_heralds == 0 {
        return Err(Error::Normalization("histogram has zero heralds".into()));
    }
    let total = reference.window_sum(window)?;
    if total == 0 {
        return Err(Error::Normalization(format!(
            "no counts in window [{:e}, {:e}] s",
            window.t_min, window.t_max
        )));
    }
    let total = total as f64;
    Ok(NormalizedTrace {
        t_start: reference.t_start,
        bin_width: reference.bin_width,
        rates: reference.counts.iter().map(|&c| c as f64 / total).collect(),
        eta_f: total / reference.n_heralds as f64,
        n_heralds: reference.n_heralds,
        window: *window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionEstimate {
    pub epsilon_hat: f64,
    pub sigma: f64,
    pub window: TimeWindow,
}

/// `ε̂ = 1 − ΣG/ΣG0` over `window`, with independent-Poisson error propagation.
pub fn extinction(
    reference: &Histogram,
    with_atom: &Histogram,
    window: &TimeWindow,
) -> Result<ExtinctionEstimate> {
    reference.check_same_binning(with_atom)?;
    let range = reference.window_range(window)?;
    let s0: u64 = reference.counts[range.clone()].iter().sum();
    let s: u64 = with_atom.counts[range].iter().sum();
    extinction_from_sums(s0 as f64, s as f64, window)
}

pub(crate) fn extinction_from_sums(
    s0: f64,
    s: f64,
    window: &TimeWindow,
) -> Result<ExtinctionEstimate> {
    if s0 <= 0.0 {
        return Err(Error::Normalization(
            "reference histogram has no counts in the summation window".into(),
        ));
    }
    let ratio = s / s0;
    // var = s/s0^2 + s^2/s0^3
    let sigma = (ratio / s0 * (1.0 + ratio)).sqrt();
    Ok(ExtinctionEstimate {
        epsilon_hat: 1.0 - ratio,
        sigma,
        window: *window,
    })
}

/// Windows and options for [`analyze`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub atom: AtomParams,
    pub sum_window: TimeWindow,
    pub fit_window: TimeWindow,
    /// Number of bootstrap replicas; `None` uses first-order error propagation.
    pub bootstrap: Option<usize>,
    pub seed: u64,
}

impl AnalysisOptions {
    pub fn new(atom: AtomParams) -> Self {
        AnalysisOptions {
            atom,
            sum_window: TimeWindow::SUMMATION,
            fit_window: TimeWindow::FIT,
            bootstrap: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default)]
    pub inputs: Vec<InputDigest>,
    pub sum_window: TimeWindow,
    pub fit_window: TimeWindow,
    pub bootstrap_resamples: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub eta_f: f64,
    pub bandwidth: BandwidthFit,
    pub extinction: ExtinctionEstimate,
    pub excitation: ExcitationTrace,
    pub peak: PeakEstimate,
    pub provenance: Provenance,
}

/// Run the whole pipeline on one reference/with-atom pair.
///
/// With `options.bootstrap = Some(n)` the extinction, per-bin excitation and
/// peak uncertainties are replaced by bootstrap standard deviations.
pub fn analyze(
    reference: &Histogram,
    with_atom: &Histogram,
    options: &AnalysisOptions,
) -> Result<AnalysisResult> {
    options.atom.validate()?;
    reference.check_same_binning(with_atom)?;
    let trace = normalize(reference, &options.sum_window)?;
    let bandwidth = fit_bandwidth(&trace, &options.fit_window)?;
    let mut extinction = extinction(reference, with_atom, &options.sum_window)?;
    let mut excitation =
        reconstruct_excitation(reference, with_atom, &options.atom, &options.sum_window)?;
    let mut peak = extract_peak(&excitation)?;
    if let Some(n) = options.bootstrap {
        let boot = bootstrap_uncertainty(
            reference,
            with_atom,
            &options.atom,
            &options.sum_window,
            n,
            options.seed,
        )?;
        extinction.sigma = boot.epsilon_sigma;
        excitation.sigma = boot.p_e_sigma.clone();
        peak.sigma = boot.peak_sigma;
    }
    Ok(AnalysisResult {
        eta_f: trace.eta_f,
        bandwidth,
        extinction,
        excitation,
        peak,
        provenance: Provenance {
            inputs: Vec::new(),
            sum_window: options.sum_window,
            fit_window: options.fit_window,
            bootstrap_resamples: options.bootstrap,
            seed: options.seed,
        },
    })
}

pub(crate) fn window_bins(
    t_start: f64,
    bin_width: f64,
    len: usize,
    window: &TimeWindow,
) -> Result<std::ops::Range<usize>> {
    bin_range(t_start, bin_width, len, window)
}
