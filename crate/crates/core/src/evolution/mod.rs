//! Time propagation: 1D Crank-Nicolson, the coupled two-channel system and
//! the joint electron-photon (x, q) problem.

mod joint2d;
pub mod linalg;
mod propagator;
mod two_channel;

pub use joint2d::{project_channels, step_joint_2d, Joint2DStepper, JointState2D};
pub use propagator::{electron_energy, step_1d, Absorber, Propagator1D};
pub use two_channel::{step_two_channel, CouplingParams, TwoChannelState, TwoChannelStepper};
