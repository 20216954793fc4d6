//! Four-wave-mixing readout of Raman spin-wave memories.
//!
//! - [`model`]: closed-form gains and spontaneous noise of the coupled
//!   anti-Stokes/Stokes readout.
//! - [`geometry`]: phase matching and the far-field pixel layout.
//! - [`sim`]: thermal write-in, readout photon numbers, camera frames and
//!   gated counting traces.
//! - [`analysis`]: correlation maps, effective-gain estimators and
//!   exponential fits.
//! - [`config`] and [`cli`]: run configuration and the `fwm` pipelines.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod io;
pub mod model;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
