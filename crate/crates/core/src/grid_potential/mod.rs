//! Grids, potential profiles, initial packets, photon states and units.

mod grid;
mod packet;
mod photon;
mod potential;
pub mod units;

pub use grid::{ComplexField1D, QuadratureGrid, SpatialGrid};
pub use packet::{build_gaussian_packet, Direction};
pub use photon::{apply_h_gamma, build_photon_states, PhotonStates, D2_STENCIL, MAX_TAIL};
pub use potential::{build_double_barrier, PotentialKind, PotentialProfile, MIN_LEAD_NM};
pub use units::PhysicalConstants;
