//! Excited-population reconstruction from the transmission deficit.
//!
//! The deficit rate `δ_i = (G0_i − G_i)/(η_f n Δt)` drives
//! `dP_e/dt = δ − k P_e` with `k = (1−Λ)Γ0`. Treating δ as constant within a
//! bin, each bin is advanced with the exact exponential update
//! `P ← P e^{−kΔt} + δ (1 − e^{−kΔt})/k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{Histogram, TimeWindow};
use crate::theory::AtomParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationTrace {
    /// Bin centers (s).
    pub times: Vec<f64>,
    pub p_e: Vec<f64>,
    /// Per-bin standard deviation.
    pub sigma: Vec<f64>,
    pub lambda_used: f64,
    pub gamma0_used: f64,
    pub bin_width: f64,
}

impl ExcitationTrace {
    pub fn len(&self) -> usize {
        self.p_e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_e.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    pub value: f64,
    pub sigma: f64,
    pub time: f64,
}

/// `(1 − e^{−k h})/k`, equal to `h` at k = 0.
fn source_gain(k: f64, h: f64) -> f64 {
    if k * h < 1e-12 {
        h
    } else {
        -(-k * h).exp_m1() / k
    }
}

/// Integrate the rate equation over the bins of `window`, starting from
/// `P_e = 0` at the window start.
///
/// `sigma` is the first-order Poisson propagation of the bin counts through
/// the linear update.
pub fn reconstruct_excitation(
    reference: &Histogram,
    with_atom: &Histogram,
    atom: &AtomParams,
    window: &TimeWindow,
) -> Result<ExcitationTrace> {
    reference.check_same_binning(with_atom)?;
    atom.validate()?;
    let range = reference.window_range(window)?;
    let norm = reference.counts[range.clone()].iter().sum::<u64>() as f64;
    if norm <= 0.0 {
        return Err(Error::Normalization(
            "heralding efficiency is zero: no reference counts in window".into(),
        ));
    }
    let g0: Vec<f64> = reference.counts[range.clone()]
        .iter()
        .map(|&c| c as f64)
        .collect();
    let g: Vec<f64> = with_atom.counts[range.clone()]
        .iter()
        .map(|&c| c as f64)
        .collect();
    let times: Vec<f64> = range.map(|i| reference.bin_center(i)).collect();
    Ok(integrate(&g0, &g, norm, reference.bin_width, times, atom))
}

pub(crate) fn integrate(
    g0: &[f64],
    g: &[f64],
    norm: f64,
    bin_width: f64,
    times: Vec<f64>,
    atom: &AtomParams,
) -> ExcitationTrace {
    let k = atom.loss_rate();
    let full_decay = (-k * bin_width).exp();
    let half_decay = (-k * 0.5 * bin_width).exp();
    let full_gain = source_gain(k, bin_width);
    let half_gain = source_gain(k, 0.5 * bin_width);
    let scale = 1.0 / (norm * bin_width);

    let mut p_e = Vec::with_capacity(g0.len());
    let mut sigma = Vec::with_capacity(g0.len());
    let (mut edge, mut edge_var) = (0.0, 0.0);
    for (&r, &a) in g0.iter().zip(g) {
        let delta = (r - a) * scale;
        let delta_var = (r + a) * scale * scale;
        p_e.push(edge * half_decay + delta * half_gain);
        sigma.push((edge_var * half_decay * half_decay + delta_var * half_gain * half_gain).sqrt());
        edge = edge * full_decay + delta * full_gain;
        edge_var = edge_var * full_decay * full_decay + delta_var * full_gain * full_gain;
    }
    ExcitationTrace {
        times,
        p_e,
        sigma,
        lambda_used: atom.overlap,
        gamma0_used: atom.gamma0,
        bin_width,
    }
}

/// Index of the largest element; the earliest index wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

/// Peak of the trace, refined by a parabola through the argmax bin and its
/// two neighbours.
///
/// The returned `sigma` is the trace's per-bin sigma at the argmax bin; the
/// bootstrap replaces it with the spread of this same statistic.
pub fn extract_peak(trace: &ExcitationTrace) -> Result<PeakEstimate> {
    let n = trace.p_e.len();
    if n < 3 {
        return Err(Error::domain(
            "trace",
            format!("need at least 3 bins, got {n}"),
        ));
    }
    let i = argmax(&trace.p_e);
    let sigma = trace.sigma.get(i).copied().unwrap_or(0.0);
    let (value, time) = if i == 0 || i == n - 1 {
        (trace.p_e[i], trace.times[i])
    } else {
        let (l, c, r) = (trace.p_e[i - 1], trace.p_e[i], trace.p_e[i + 1]);
        let curvature = l - 2.0 * c + r;
        if curvature < 0.0 {
            let offset = 0.5 * (l - r) / curvature;
            let value = c - 0.25 * (l - r) * offset;
            let step = trace.times[i + 1] - trace.times[i];
            (value, trace.times[i] + offset * step)
        } else {
            (c, trace.times[i])
        }
    };
    Ok(PeakEstimate { value, sigma, time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::Label;

    fn atom() -> AtomParams {
        AtomParams::from_linewidth_mhz(6.07, 0.033).unwrap()
    }

    #[test]
    fn identical_histograms_give_zero() {
        let h = Histogram::new(-10e-9, 1e-9, vec![1234; 110], 1 << 20, Label::Reference).unwrap();
        let tr = reconstruct_excitation(&h, &h, &atom(), &TimeWindow::SUMMATION).unwrap();
        assert_eq!(tr.len(), 110);
        assert!(tr.p_e.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn zero_reference_is_error() {
        let h = Histogram::new(-10e-9, 1e-9, vec![0; 110], 10, Label::Reference).unwrap();
        assert!(matches!(
            reconstruct_excitation(&h, &h, &atom(), &TimeWindow::SUMMATION),
            Err(Error::Normalization(_))
        ));
    }

    #[test]
    fn mismatched_binning_is_error() {
        let a = Histogram::new(-10e-9, 1e-9, vec![1; 110], 10, Label::Reference).unwrap();
        let b = Histogram::new(-10e-9, 1e-9, vec![1; 100], 10, Label::WithAtom).unwrap();
        assert!(reconstruct_excitation(&a, &b, &atom(), &TimeWindow::SUMMATION).is_err());
    }

    fn trace(values: Vec<f64>) -> ExcitationTrace {
        let n = values.len();
        ExcitationTrace {
            times: (0..n).map(|i| i as f64 + 0.5).collect(),
            sigma: vec![0.1; n],
            p_e: values,
            lambda_used: 0.0,
            gamma0_used: 1.0,
            bin_width: 1.0,
        }
    }

    #[test]
    fn constant_trace_peak_is_first_bin() {
        let p = extract_peak(&trace(vec![0.25; 8])).unwrap();
        assert_eq!(p.value, 0.25);
        assert_eq!(p.time, 0.5);
    }

    #[test]
    fn parabola_recovered_exactly() {
        let f = |t: f64| 1.0 - (t - 3.3).powi(2);
        let p = extract_peak(&trace((0..8).map(|i| f(i as f64 + 0.5)).collect())).unwrap();
        assert!((p.value - 1.0).abs() < 1e-12);
        assert!((p.time - 3.3).abs() < 1e-12);
    }

    #[test]
    fn short_trace_rejected() {
        assert!(extract_peak(&trace(vec![1.0, 2.0])).is_err());
    }
}
