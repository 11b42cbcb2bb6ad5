//! Closed-form scattering model for a single photon with an exponentially
//! decaying envelope incident on a two-level atom.
//!
//! All rates are angular frequencies in rad/s and all times are in seconds.
//! The atom couples to the incident mode with strength `g = sqrt(overlap * gamma0)`;
//! its excitation amplitude `c(t)` obeys `c' = -gamma0/2 c + g psi(t)` where
//! `psi(t)^2` is the photon envelope. Everything below follows from that.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural linewidth Γ0/2π of the probed transition, in MHz.
pub const NATURAL_LINEWIDTH_MHZ: f64 = 6.07;

/// Spatial overlap between probe mode and atomic dipole mode used for the
/// reference data set.
pub const REFERENCE_OVERLAP: f64 = 0.033;

/// Relative bandwidth mismatch |Γp−Γ0|/Γ0 below which the degenerate
/// (Γp = Γ0) limit formulas are used.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;

/// Convert a linewidth quoted as Γ/2π in MHz to an angular rate in rad/s.
pub fn mhz_to_rad_per_s(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    /// Natural linewidth Γ0 (rad/s).
    pub gamma0: f64,
    /// Spatial overlap Λ in [0, 1].
    pub overlap: f64,
    /// Resonance frequency ω0 (rad/s); 0 works in the rotating frame.
    #[serde(default)]
    pub omega0: f64,
}

impl AtomParams {
    pub fn new(gamma0: f64, overlap: f64) -> Result<Self> {
        let atom = AtomParams {
            gamma0,
            overlap,
            omega0: 0.0,
        };
        atom.validate()?;
        Ok(atom)
    }

    /// Atom with linewidth given as Γ0/2π in MHz.
    pub fn from_linewidth_mhz(linewidth_mhz: f64, overlap: f64) -> Result<Self> {
        Self::new(mhz_to_rad_per_s(linewidth_mhz), overlap)
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0.is_finite() && self.gamma0 > 0.0) {
            return Err(Error::domain(
                "gamma0",
                format!("must be > 0, got {}", self.gamma0),
            ));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::domain(
                "overlap",
                format!("must lie in [0, 1], got {}", self.overlap),
            ));
        }
        if !self.omega0.is_finite() {
            return Err(Error::domain("omega0", "must be finite"));
        }
        Ok(())
    }

    /// Coupling strength `sqrt(Λ Γ0)` between the probe mode and the atom.
    pub fn coupling(&self) -> f64 {
        (self.overlap * self.gamma0).sqrt()
    }

    /// Decay rate of the excited population out of the probe mode, `(1−Λ)Γ0`.
    pub fn loss_rate(&self) -> f64 {
        (1.0 - self.overlap) * self.gamma0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonParams {
    /// Bandwidth Γp (rad/s).
    pub gammap: f64,
    /// Position of the rising edge of the envelope (s).
    #[serde(default)]
    pub t0: f64,
}

impl PhotonParams {
    pub fn new(gammap: f64, t0: f64) -> Result<Self> {
        let photon = PhotonParams { gammap, t0 };
        photon.validate()?;
        Ok(photon)
    }

    /// Photon whose bandwidth is `ratio` times the atomic linewidth.
    pub fn relative_to(atom: &AtomParams, ratio: f64, t0: f64) -> Result<Self> {
        Self::new(ratio * atom.gamma0, t0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gammap.is_finite() && self.gammap > 0.0) {
            return Err(Error::domain(
                "gammap",
                format!("must be > 0, got {}", self.gammap),
            ));
        }
        if !self.t0.is_finite() {
            return Err(Error::domain("t0", "must be finite"));
        }
        Ok(())
    }
}

fn is_degenerate(atom: &AtomParams, photon: &PhotonParams) -> bool {
    ((photon.gammap - atom.gamma0) / atom.gamma0).abs() < DEGENERACY_THRESHOLD
}

/// Unit-area Lorentzian power spectrum of the photon, centered on the atomic
/// resonance.
pub fn lorentzian_spectrum(atom: &AtomParams, photon: &PhotonParams, omega: f64) -> Result<f64> {
    if !(photon.gammap > 0.0) {
        return Err(Error::domain(
            "gammap",
            format!("must be > 0, got {}", photon.gammap),
        ));
    }
    let detuning = omega - atom.omega0;
    let half_width = 0.5 * photon.gammap;
    Ok(photon.gammap / (2.0 * PI) / (detuning * detuning + half_width * half_width))
}

/// Probability that the photon is scattered out of the probe mode,
/// `4Λ(1−Λ) Γ0/(Γ0+Γp)`.
pub fn scattering_probability(atom: &AtomParams, photon: &PhotonParams) -> f64 {
    4.0 * atom.overlap * (1.0 - atom.overlap) * atom.gamma0 / (atom.gamma0 + photon.gammap)
}

/// Normalized photon envelope `Γp Θ(t−t0) exp(−Γp (t−t0))`, in 1/s.
pub fn photon_envelope(photon: &PhotonParams, t: f64) -> f64 {
    let tau = t - photon.t0;
    if tau < 0.0 {
        0.0
    } else {
        photon.gammap * (-photon.gammap * tau).exp()
    }
}

/// `(1 − exp(−x)) / x`, continuous through x = 0.
fn one_minus_exp_over(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Real excitation amplitude `c(t)` of the atom, with `|c|^2 = P_e`.
///
/// Written in the form `sqrt(ΛΓ0Γp) τ e^{−sτ/2} (1−e^{−dτ})/(dτ)` with
/// `s = min(Γ0, Γp)` and `d = |Γp−Γ0|/2`, which neither cancels near
/// Γp = Γ0 nor overflows at late times.
pub fn excitation_amplitude(atom: &AtomParams, photon: &PhotonParams, t: f64) -> f64 {
    let tau = t - photon.t0;
    if tau <= 0.0 {
        return 0.0;
    }
    let slow = atom.gamma0.min(photon.gammap);
    let d = 0.5 * (photon.gammap - atom.gamma0).abs();
    let shape = if is_degenerate(atom, photon) {
        1.0
    } else {
        one_minus_exp_over(d * tau)
    };
    (atom.overlap * atom.gamma0 * photon.gammap).sqrt() * tau * (-0.5 * slow * tau).exp() * shape
}

/// Excited-state population P_e(t).
///
/// Within [`DEGENERACY_THRESHOLD`] of Γp = Γ0 this returns the limit
/// `ΛΓ0² τ² e^{−Γ0τ}`.
pub fn excited_population(atom: &AtomParams, photon: &PhotonParams, t: f64) -> f64 {
    let tau = t - photon.t0;
    if tau <= 0.0 {
        return 0.0;
    }
    if is_degenerate(atom, photon) {
        return atom.overlap * atom.gamma0 * atom.gamma0 * tau * tau * (-atom.gamma0 * tau).exp();
    }
    let c = excitation_amplitude(atom, photon, t);
    c * c
}

/// Maximum over time of P_e(t): `4Λ (Γp/Γ0)^((Γ0+Γp)/(Γ0−Γp))`, or `4Λe^{−2}`
/// at degeneracy.
pub fn peak_excitation(atom: &AtomParams, photon: &PhotonParams) -> f64 {
    if is_degenerate(atom, photon) {
        return 4.0 * atom.overlap * (-2.0f64).exp();
    }
    let x = photon.gammap / atom.gamma0;
    // ln(x)/(1−x) evaluated through ln_1p to stay accurate close to x = 1.
    let exponent = (1.0 + x) * (x - 1.0).ln_1p() / (1.0 - x);
    4.0 * atom.overlap * exponent.exp()
}

/// Time of maximum excitation `t0 + 2 ln(Γp/Γ0)/(Γp−Γ0)` (`t0 + 2/Γ0` at degeneracy).
pub fn peak_time(atom: &AtomParams, photon: &PhotonParams) -> f64 {
    if is_degenerate(atom, photon) {
        return photon.t0 + 2.0 / atom.gamma0;
    }
    let rel = photon.gammap / atom.gamma0 - 1.0;
    photon.t0 + 2.0 * rel.ln_1p() / (atom.gamma0 * rel)
}

/// Rate δ(t) = dP_e/dt + (1−Λ)Γ0 P_e at which probability leaves the probe
/// mode, in 1/s.
///
/// This is the deficit of the forward-detected flux relative to the
/// no-atom reference. It is negative once the atom re-emits into the probe
/// mode faster than the residual incident flux feeds it, which happens at
/// late times whenever Γp > (1−Λ)Γ0. `photon_envelope − scattered_rate` is
/// never negative.
pub fn scattered_rate(atom: &AtomParams, photon: &PhotonParams, t: f64) -> f64 {
    let tau = t - photon.t0;
    if tau <= 0.0 {
        return 0.0;
    }
    let c = excitation_amplitude(atom, photon, t);
    let psi = photon_envelope(photon, t).sqrt();
    let g = atom.coupling();
    2.0 * g * psi * c - g * g * c * c
}

/// Forward-mode flux with the atom present, `(psi − g c)^2`.
pub fn transmitted_rate(atom: &AtomParams, photon: &PhotonParams, t: f64) -> f64 {
    let psi = photon_envelope(photon, t).sqrt();
    let field = psi - atom.coupling() * excitation_amplitude(atom, photon, t);
    field * field
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Envelope,
    Excitation,
    ScatteredRate,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Envelope => "envelope",
            CurveKind::Excitation => "excitation",
            CurveKind::ScatteredRate => "scattered_rate",
        }
    }
}

/// A sampled theory curve.
///
/// `ScatteredRate` curves can contain negative values (see [`scattered_rate`]);
/// the other kinds are non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryCurve {
    pub kind: CurveKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TheoryCurve {
    /// Evaluate `kind` on `n` equally spaced points spanning `[t_min, t_max]`.
    pub fn sample(
        kind: CurveKind,
        atom: &AtomParams,
        photon: &PhotonParams,
        t_min: f64,
        t_max: f64,
        n: usize,
    ) -> Result<Self> {
        if !(t_max > t_min) {
            return Err(Error::domain("t_max", "must exceed t_min"));
        }
        if n < 2 {
            return Err(Error::domain("points", "need at least two samples"));
        }
        let step = (t_max - t_min) / (n - 1) as f64;
        let times: Vec<f64> = (0..n).map(|i| t_min + step * i as f64).collect();
        let values = times
            .iter()
            .map(|&t| match kind {
                CurveKind::Envelope => photon_envelope(photon, t),
                CurveKind::Excitation => excited_population(atom, photon, t),
                CurveKind::ScatteredRate => scattered_rate(atom, photon, t),
            })
            .collect();
        Ok(TheoryCurve {
            kind,
            times,
            values,
        })
    }

    /// CSV with a `# kind=` header and `t_ns,value` rows; values are in 1/s
    /// for envelope and scattered-rate curves and dimensionless for excitation.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# kind={}\n# t_ns,value\n", self.kind.as_str());
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", t * 1e9, v));
        }
        out
    }
}
