//! Linearized dynamics and fluctuation spectra of a driven optomechanical
//! cavity containing a degenerate parametric amplifier.

pub mod config;
pub mod error;
pub mod linear_dynamics;
pub mod params;
pub mod peaks;
pub mod poly;
pub mod presets;
pub mod spectra;
pub mod steady_state;
pub mod sweep;

pub use error::{Error, Result};
