//! Single-shot scattering transitions applied to a conditional wave function:
//! energy shift in the device eigenbasis (model A) and momentum shift (model B).

mod event;
mod models;

pub use event::{matched_wavenumber, ScatteringEvent, TransitionKind, TransitionModel};
pub use models::{
    apply_gradual, apply_model_a, apply_model_b, apply_phase_ramp, negative_branch_weight, shift_coefficients,
    TransitionReport, MAX_LEAKAGE,
};
