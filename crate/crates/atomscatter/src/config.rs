//! Versioned JSON configuration for simulation runs.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "atom": { "linewidth_mhz": 6.07, "overlap": 0.033 },
//!   "photon": { "bandwidth_over_gamma0": 1.96, "t0": 0.0 },
//!   "n_heralds": 10000000,
//!   "heralding_efficiency": 0.5,
//!   "background_rate": 0.0,
//!   "window": [-1e-8, 1e-7],
//!   "bin_width": 1e-9,
//!   "seed": 1,
//!   "edge_smearing": 0.0
//! }
//! ```
//!
//! Times are in seconds and `background_rate` is per second per herald.
//! Everything except `schema` has a default; unknown fields are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::TimeWindow;
use crate::simulate::SimConfig;
use crate::theory::{AtomParams, PhotonParams, NATURAL_LINEWIDTH_MHZ, REFERENCE_OVERLAP};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    /// Γ0/2π in MHz.
    #[serde(default = "default_linewidth")]
    pub linewidth_mhz: f64,
    #[serde(default = "default_overlap")]
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonConfig {
    #[serde(default = "default_bandwidth")]
    pub bandwidth_over_gamma0: f64,
    #[serde(default)]
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfigFile {
    pub schema: u32,
    #[serde(default)]
    pub atom: AtomConfig,
    #[serde(default)]
    pub photon: PhotonConfig,
    #[serde(default = "default_heralds")]
    pub n_heralds: u64,
    #[serde(default = "default_efficiency")]
    pub heralding_efficiency: f64,
    #[serde(default)]
    pub background_rate: f64,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub edge_smearing: f64,
}

fn default_linewidth() -> f64 {
    NATURAL_LINEWIDTH_MHZ
}
fn default_overlap() -> f64 {
    REFERENCE_OVERLAP
}
fn default_bandwidth() -> f64 {
    1.96
}
fn default_heralds() -> u64 {
    1_000_000
}
fn default_efficiency() -> f64 {
    0.5
}
fn default_window() -> [f64; 2] {
    [TimeWindow::SUMMATION.t_min, TimeWindow::SUMMATION.t_max]
}
fn default_bin_width() -> f64 {
    1e-9
}

impl Default for AtomConfig {
    fn default() -> Self {
        AtomConfig {
            linewidth_mhz: default_linewidth(),
            overlap: default_overlap(),
        }
    }
}

impl Default for PhotonConfig {
    fn default() -> Self {
        PhotonConfig {
            bandwidth_over_gamma0: default_bandwidth(),
            t0: 0.0,
        }
    }
}

impl Default for SimConfigFile {
    fn default() -> Self {
        SimConfigFile {
            schema: SCHEMA_VERSION,
            atom: AtomConfig::default(),
            photon: PhotonConfig::default(),
            n_heralds: default_heralds(),
            heralding_efficiency: default_efficiency(),
            background_rate: 0.0,
            window: default_window(),
            bin_width: default_bin_width(),
            seed: 0,
            edge_smearing: 0.0,
        }
    }
}

fn config_error(pointer: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        pointer: pointer.to_string(),
        reason: reason.into(),
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

impl SimConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let parsed: SimConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = pointer_of(e.path());
            config_error(&pointer, e.into_inner().to_string())
        })?;
        parsed.to_sim_config()?;
        Ok(parsed)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Validate and convert to SI simulation parameters. Errors carry the
    /// JSON pointer of the offending field.
    pub fn to_sim_config(&self) -> Result<SimConfig> {
        if self.schema != SCHEMA_VERSION {
            return Err(config_error(
                "/schema",
                format!(
                    "unsupported schema {}, expected {SCHEMA_VERSION}",
                    self.schema
                ),
            ));
        }
        if !(self.atom.linewidth_mhz > 0.0 && self.atom.linewidth_mhz.is_finite()) {
            return Err(config_error("/atom/linewidth_mhz", "must be > 0"));
        }
        let atom = AtomParams::from_linewidth_mhz(self.atom.linewidth_mhz, self.atom.overlap)
            .map_err(|e| config_error("/atom/overlap", e.to_string()))?;
        if !(self.photon.bandwidth_over_gamma0 > 0.0
            && self.photon.bandwidth_over_gamma0.is_finite())
        {
            return Err(config_error("/photon/bandwidth_over_gamma0", "must be > 0"));
        }
        let photon =
            PhotonParams::relative_to(&atom, self.photon.bandwidth_over_gamma0, self.photon.t0)
                .map_err(|e| config_error("/photon/t0", e.to_string()))?;
        let window = TimeWindow::new(self.window[0], self.window[1])
            .map_err(|e| config_error("/window", e.to_string()))?;
        let config = SimConfig {
            atom,
            photon,
            n_heralds: self.n_heralds,
            heralding_efficiency: self.heralding_efficiency,
            background_rate: self.background_rate,
            window,
            bin_width: self.bin_width,
            seed: self.seed,
            edge_smearing: self.edge_smearing,
        };
        config.validate().map_err(|e| match e {
            Error::Domain { name, reason } => config_error(&format!("/{name}"), reason),
            other => other,
        })?;
        Ok(config)
    }
}
