//! Weighted least-squares fit of the exponential photon envelope.
//!
//! The per-bin model integrates the envelope over each bin:
//! `m_i = A (exp(−Γp(a_i−t0)) − exp(−Γp(b_i−t0)))`. Inside a fit window that
//! starts after the rising edge, `A` and `t0` enter only through the product
//! `A·exp(Γp t0)`, so `t0` is held at the leading edge of the brightest bin and
//! only `A` and `Γp` are fitted (Levenberg-Marquardt).

use serde::{Deserialize, Serialize};

use super::{window_bins, NormalizedTrace};
use crate::error::{Error, Result};
use crate::histogram::TimeWindow;

pub const MIN_FIT_BINS: usize = 10;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitErrors {
    pub gammap: f64,
    pub amplitude: f64,
    /// Zero: `t0` is not a free parameter.
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthFit {
    pub gammap_hat: f64,
    pub t0_hat: f64,
    pub amplitude_hat: f64,
    pub std_errors: FitErrors,
    pub fit_window: TimeWindow,
    /// χ²/(n − 2).
    pub goodness: f64,
    pub iterations: usize,
}

struct Problem {
    /// Bin left edges relative to t0.
    left: Vec<f64>,
    width: f64,
    y: Vec<f64>,
    inv_var: Vec<f64>,
}

impl Problem {
    fn model(&self, i: usize, amplitude: f64, gammap: f64) -> (f64, f64, f64) {
        let a = self.left[i];
        let b = a + self.width;
        let ea = (-gammap * a).exp();
        let eb = (-gammap * b).exp();
        let m = amplitude * (ea - eb);
        let d_amp = ea - eb;
        let d_gamma = amplitude * (-a * ea + b * eb);
        (m, d_amp, d_gamma)
    }

    fn chi2(&self, amplitude: f64, gammap: f64) -> f64 {
        (0..self.y.len())
            .map(|i| {
                let r = self.y[i] - self.model(i, amplitude, gammap).0;
                r * r * self.inv_var[i]
            })
            .sum()
    }

    /// Normal equations `(JᵀWJ, JᵀWr)` at the given point.
    fn normal(&self, amplitude: f64, gammap: f64) -> ([[f64; 2]; 2], [f64; 2]) {
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for i in 0..self.y.len() {
            let (m, da, dg) = self.model(i, amplitude, gammap);
            let w = self.inv_var[i];
            let r = self.y[i] - m;
            jtj[0][0] += w * da * da;
            jtj[0][1] += w * da * dg;
            jtj[1][1] += w * dg * dg;
            jtr[0] += w * da * r;
            jtr[1] += w * dg * r;
        }
        jtj[1][0] = jtj[0][1];
        (jtj, jtr)
    }

    /// Weighted linear least-squares amplitude for a fixed bandwidth.
    fn best_amplitude(&self, gammap: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..self.y.len() {
            let (_, basis, _) = self.model(i, 1.0, gammap);
            num += self.inv_var[i] * basis * self.y[i];
            den += self.inv_var[i] * basis * basis;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

fn invert(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det.is_finite() && det.abs() > 0.0) {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// Initial bandwidth from a count-weighted regression of `ln(y)` on time.
fn log_linear_guess(times: &[f64], y: &[f64]) -> Option<f64> {
    let (mut sw, mut st, mut sl, mut stt, mut stl) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &v) in times.iter().zip(y) {
        if v <= 0.0 {
            continue;
        }
        let l = v.ln();
        sw += v;
        st += v * t;
        sl += v * l;
        stt += v * t * t;
        stl += v * t * l;
    }
    let den = sw * stt - st * st;
    if den <= 0.0 {
        return None;
    }
    let slope = (sw * stl - st * sl) / den;
    (slope < 0.0).then_some(-slope)
}

/// Fit `amplitude · Γp · exp(−Γp (t − t0))` to the normalized reference trace.
///
/// Each bin is weighted by its Poisson variance, `max(counts, 1)`.
pub fn fit_bandwidth(trace: &NormalizedTrace, window: &TimeWindow) -> Result<BandwidthFit> {
    let range = window_bins(trace.t_start, trace.bin_width, trace.len(), window)?;
    if range.len() < MIN_FIT_BINS {
        return Err(Error::EmptyWindow {
            t_min: window.t_min,
            t_max: window.t_max,
            reason: format!("{} bins in fit window, need {MIN_FIT_BINS}", range.len()),
        });
    }
    let scale = trace.n_heralds as f64 * trace.eta_f;
    let y: Vec<f64> = trace.rates[range.clone()].to_vec();
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::EmptyWindow {
            t_min: window.t_min,
            t_max: window.t_max,
            reason: "all bins in the fit window are empty".into(),
        });
    }

    // Leading edge of the brightest bin; earliest bin wins ties.
    let brightest =
        trace.rates.iter().enumerate().fold(
            0,
            |best, (i, &v)| if v > trace.rates[best] { i } else { best },
        );
    let t0 = trace.t_start + brightest as f64 * trace.bin_width;

    let problem = Problem {
        left: range
            .clone()
            .map(|i| trace.t_start + i as f64 * trace.bin_width - t0)
            .collect(),
        width: trace.bin_width,
        inv_var: y
            .iter()
            .map(|&r| {
                let counts = (r * scale).round().max(1.0);
                scale * scale / counts
            })
            .collect(),
        y,
    };

    let centers: Vec<f64> = problem
        .left
        .iter()
        .map(|a| a + 0.5 * problem.width)
        .collect();
    let mut gammap = log_linear_guess(&centers, &problem.y).unwrap_or(1.0 / window.len());
    let mut amplitude = problem.best_amplitude(gammap);
    let mut chi2 = problem.chi2(amplitude, gammap);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = problem.normal(amplitude, gammap);
        let mut accepted = false;
        while lambda < 1e16 {
            let damped = [
                [jtj[0][0] * (1.0 + lambda), jtj[0][1]],
                [jtj[1][0], jtj[1][1] * (1.0 + lambda)],
            ];
            let Some(inv) = invert(damped) else {
                lambda *= 10.0;
                continue;
            };
            let step_a = inv[0][0] * jtr[0] + inv[0][1] * jtr[1];
            let step_g = inv[1][0] * jtr[0] + inv[1][1] * jtr[1];
            let (na, ng) = (amplitude + step_a, gammap + step_g);
            if ng > 0.0 {
                let nc = problem.chi2(na, ng);
                if nc <= chi2 {
                    let small =
                        step_g.abs() <= 1e-13 * ng && step_a.abs() <= 1e-13 * na.abs().max(1e-300);
                    let flat = chi2 - nc <= 1e-15 * chi2.max(1e-300);
                    amplitude = na;
                    gammap = ng;
                    chi2 = nc;
                    lambda = (lambda * 0.1).max(1e-12);
                    accepted = true;
                    converged = small || flat;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: we are at the minimum to
            // machine precision.
            converged = true;
        }
        if converged {
            break;
        }
    }

    if !converged || !(gammap > 0.0) || !gammap.is_finite() {
        return Err(Error::FitFailed {
            iterations,
            gammap,
            amplitude,
            reason: "Levenberg-Marquardt did not converge".into(),
        });
    }

    let (jtj, _) = problem.normal(amplitude, gammap);
    let cov = invert(jtj).ok_or_else(|| Error::FitFailed {
        iterations,
        gammap,
        amplitude,
        reason: "singular Fisher information at the optimum".into(),
    })?;
    let dof = (problem.y.len() - 2) as f64;
    Ok(BandwidthFit {
        gammap_hat: gammap,
        t0_hat: t0,
        amplitude_hat: amplitude,
        std_errors: FitErrors {
            gammap: cov[1][1].max(0.0).sqrt(),
            amplitude: cov[0][0].max(0.0).sqrt(),
            t0: 0.0,
        },
        fit_window: *window,
        goodness: chi2 / dof,
        iterations,
    })
}
