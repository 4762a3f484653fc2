//! Scattering states, transmission spectra and energy-basis projection.

mod basis;
mod eigen;
mod resonance;
mod scattering_state;

pub use basis::{
    project_energy, synthesize, EnergyBasis, ProjectionRegion, SpectralCoefficients, DEFAULT_DE, DEFAULT_E_MAX,
    DEFAULT_E_MIN,
};
pub use eigen::box_eigenstates;
pub use resonance::{resonance_search, transmission_spectrum, uniform_energies, SpectrumPoint};
pub use scattering_state::{
    lattice_wave, solve_scattering_state, stationary_residual, Injection, ScatteringState,
};
