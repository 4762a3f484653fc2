//! Quantum-equilibrium sampling, guidance velocities, trajectory integration,
//! conditional wave functions and the Ramo current.

mod ensemble;
mod sampling;
mod stats;
mod velocity;

pub use ensemble::{ramo_current, Guide, TrajectoryEnsemble};
pub use sampling::{experiment_rng, sample_quantum_equilibrium, sample_quantum_equilibrium_2d};
pub use stats::{ks_critical_1pct, ks_statistic, pearson, quantile_map, GridCdf};
pub use velocity::{
    slice_bcwf, slice_two_channel, velocity_1d, velocity_2d, TwoChannelGuide, VelocityField, VelocityField2D,
    VelocitySource, NODE_THRESHOLD,
};
