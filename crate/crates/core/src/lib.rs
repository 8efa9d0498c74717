//! Simulation library for two-axis beam-deflection metrology.
//!
//! Models a bench that measures yaw and pitch tilt angles simultaneously:
//! a ring interferometer and an unbalanced two-arm interferometer in
//! cascade, each post-selecting on a dark port so the tilt signal emerges
//! amplified on a first-order Hermite-Gaussian mode, read out by balanced
//! homodyne detection against first-order-mode local oscillators.
//!
//! Module map:
//!
//! * [`hg_pointer`] — transverse-mode algebra: mode functions, momentum
//!   kicks, exact and first-order decompositions.
//! * [`selection_states`] — path-space states, measurement operators, weak
//!   values and post-selection probabilities.
//! * [`wva_pipeline`] — the cascaded chain: dark-port output states and the
//!   optical power budget.
//! * [`detection`] — balanced difference signal, shot-noise-limited SNR,
//!   minimum measurable angles and the lever-arm geometry.
//! * [`spectrum_lab`] — Monte-Carlo trace synthesis and Welch spectrum
//!   estimation, emulating the spectrum-analyzer readout.

pub mod detection;
pub mod error;
pub mod hg_pointer;
pub mod selection_states;
pub mod spectrum_lab;
pub mod wva_pipeline;

pub use error::{Error, Result};
pub use hg_pointer::{Axis, BeamGeometry, Deflection, PointerExpansion};
pub use wva_pipeline::{DarkPort, DarkPortState, SystemConfig};
