//! Multipath-assisted indoor navigation and tracking with a cognitive
//! perception–action loop.
//!
//! The pipeline per step: [`signal`] synthesizes the received UWB signal from
//! floor-plan geometry, [`chest`] extracts multipath components, [`association`]
//! matches them to virtual anchors, [`tracker`] updates the joint agent/VA
//! state, and [`cognition`] chooses the next carrier frequency from the
//! posterior entropy. [`harness`] wires these into runs and Monte Carlo sweeps.

pub mod association;
pub mod chest;
pub mod cognition;
pub mod dsp;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod signal;
pub mod tracker;
pub mod uncertainty;

pub use error::{MintError, Result};
