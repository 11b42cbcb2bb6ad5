//! Single-photon scattering off a single two-level atom.
//!
//! The crate has three layers that close a loop:
//!
//! - [`theory`]: closed-form scattering probability, photon envelope,
//!   excited-state population and its peak for an exponentially decaying
//!   single-photon wavepacket.
//! - [`simulate`]: a Poisson forward model of the heralded transmission
//!   experiment producing reference and with-atom coincidence histograms.
//! - [`analysis`]: the measurement pipeline that turns a histogram pair back
//!   into a photon bandwidth, an extinction, a reconstructed P_e(t) and its
//!   peak, with Poissonian bootstrap uncertainties.
//!
//! [`commands`] wires these into the `atomscatter` binary (`theory`,
//! `simulate`, `analyze`, `reproduce-figures`), writing plot-ready CSV/JSON
//! and a [`manifest::RunManifest`] for every run.
//!
//! ```
//! use atomscatter::theory::{self, AtomParams, PhotonParams};
//!
//! let atom = AtomParams::from_linewidth_mhz(6.07, 0.1).unwrap();
//! let photon = PhotonParams::relative_to(&atom, 1.0, 0.0).unwrap();
//! let eps = theory::scattering_probability(&atom, &photon);
//! assert!((eps - 0.18).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod histogram;
pub mod io;
pub mod manifest;
pub mod simulate;
pub mod theory;

pub use error::{Error, Result};
pub use histogram::{Histogram, Label, TimeWindow};
pub use simulate::SimConfig;
pub use theory::{AtomParams, PhotonParams};
