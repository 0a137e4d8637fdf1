//! Decay of quantum accelerator modes: classical islands, Floquet operators,
//! resonance spectra and tunneling rates.

pub mod classical;
pub mod curve;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod quantum;
pub mod spectral;
pub mod tunneling;

pub use error::{Error, Result};
