//! Wave-packet transport through 1D devices coupled to a single cavity mode,
//! with Bohmian trajectories and two scattering-transition models.

pub mod bohmian;
mod error;
pub mod evolution;
pub mod experiments;
pub mod grid_potential;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};
