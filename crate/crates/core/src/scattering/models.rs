use num_complex::Complex64;

use super::event::{ScatteringEvent, TransitionModel};
use crate::evolution::Propagator1D;
use crate::grid_potential::{ComplexField1D, PhysicalConstants};
use crate::spectral::{project_energy, synthesize, EnergyBasis, ProjectionRegion, SpectralCoefficients};
use crate::{Error, Result};

/// Leakage above which model A refuses the transition.
pub const MAX_LEAKAGE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionReport {
    pub pre_mean_energy: f64,
    pub post_mean_energy: f64,
    pub leaked_probability: f64,
    pub negative_branch_weight: f64,
    pub pre_negative_branch_weight: f64,
    pub pre_support_width: f64,
    pub post_support_width: f64,
}

impl TransitionReport {
    fn from_coefficients(pre: &SpectralCoefficients, post: &SpectralCoefficients, leaked: f64) -> Self {
        Self {
            pre_mean_energy: pre.mean_abs_energy(),
            post_mean_energy: post.mean_abs_energy(),
            leaked_probability: leaked,
            negative_branch_weight: negative_branch_weight(post),
            pre_negative_branch_weight: negative_branch_weight(pre),
            pre_support_width: pre.support_width(),
            post_support_width: post.support_width(),
        }
    }
}

/// Σ_{E<0}|c|²dE / Σ|c|²dE.
pub fn negative_branch_weight(c: &SpectralCoefficients) -> f64 {
    let total = c.total_weight();
    if total > 0.0 {
        c.negative_weight() / total
    } else {
        0.0
    }
}

/// Shifts each branch's coefficient profile along |E| by `delta_e` (linear
/// interpolation). Returns the shifted coefficients and the leaked fraction.
pub fn shift_coefficients(c: &SpectralCoefficients, basis: &EnergyBasis, delta_e: f64) -> (SpectralCoefficients, f64) {
    let n = basis.per_branch();
    let de = basis.de;
    let mut out = SpectralCoefficients::zeros(basis, c.region);
    let total = c.total_weight();
    let mut leaked = 0.0;
    let steps = delta_e / de;
    for negative in [true, false] {
        let src: Vec<Complex64> = (0..n).map(|j| c.c[basis.index(negative, j)]).collect();
        for (j, a) in src.iter().enumerate() {
            let target = j as f64 + steps;
            if target < -1e-9 || target > (n - 1) as f64 + 1e-9 {
                leaked += a.norm_sqr() * de;
            }
        }
        for j in 0..n {
            let f = j as f64 - steps;
            let value = if f < -1e-9 || f > (n - 1) as f64 + 1e-9 {
                Complex64::new(0.0, 0.0)
            } else {
                let f = f.clamp(0.0, (n - 1) as f64);
                let i = (f.floor() as usize).min(n.saturating_sub(2));
                let s = f - i as f64;
                if s.abs() < 1e-12 {
                    src[i]
                } else {
                    src[i] * (1.0 - s) + src[i + 1] * s
                }
            };
            out.c[basis.index(negative, j)] = value;
        }
    }
    let leaked = if total > 0.0 { (leaked / total).clamp(0.0, 1.0) } else { 0.0 };
    (out, leaked)
}

/// Energy shift in the device eigenbasis: a'(E) = a(E ∓ E_γ) per branch, the
/// part pushed off the basis dropped, renormalised to the input norm.
pub fn apply_model_a(
    psi: &ComplexField1D,
    basis: &EnergyBasis,
    event: &ScatteringEvent,
) -> Result<(ComplexField1D, TransitionReport)> {
    shift_energy(psi, basis, event.signed_energy())
}

fn shift_energy(
    psi: &ComplexField1D,
    basis: &EnergyBasis,
    delta_e: f64,
) -> Result<(ComplexField1D, TransitionReport)> {
    let pre = project_energy(psi, basis, ProjectionRegion::WholeGrid)?;
    let (shifted, leaked) = shift_coefficients(&pre, basis, delta_e);
    if leaked > MAX_LEAKAGE {
        return Err(Error::FailedTransition { leaked });
    }
    let mut out = synthesize(&shifted, basis)?;
    let (n_in, n_out) = (psi.norm_sqr(), out.norm_sqr());
    if n_out > 0.0 {
        let s = (n_in / n_out).sqrt();
        out.values.iter_mut().for_each(|v| *v *= s);
    }
    let post = project_energy(&out, basis, ProjectionRegion::WholeGrid)?;
    Ok((out, TransitionReport::from_coefficients(&pre, &post, leaked)))
}

/// ψ·e^{ik_γ x}.
pub fn apply_phase_ramp(psi: &ComplexField1D, k_gamma: f64) -> ComplexField1D {
    let grid = psi.grid;
    let values = psi
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * Complex64::from_polar(1.0, k_gamma * grid.x(i)))
        .collect();
    ComplexField1D { grid, values }
}

/// Momentum shift ψ → e^{ip_γx/ħ}ψ. `central_energy` and `direction_sign`
/// fix p_γ when the event gives only E_γ; `basis` (optional) fills the
/// spectral part of the report.
pub fn apply_model_b(
    psi: &ComplexField1D,
    event: &ScatteringEvent,
    central_energy: f64,
    direction_sign: f64,
    constants: &PhysicalConstants,
    basis: Option<&EnergyBasis>,
) -> Result<(ComplexField1D, TransitionReport)> {
    let k = event.wavenumber(central_energy, direction_sign, constants)?;
    let out = apply_phase_ramp(psi, k);
    let report = match basis {
        Some(b) => {
            let pre = project_energy(psi, b, ProjectionRegion::WholeGrid)?;
            let post = project_energy(&out, b, ProjectionRegion::WholeGrid)?;
            TransitionReport::from_coefficients(&pre, &post, 0.0)
        }
        None => TransitionReport {
            pre_mean_energy: f64::NAN,
            post_mean_energy: f64::NAN,
            leaked_probability: 0.0,
            negative_branch_weight: f64::NAN,
            pre_negative_branch_weight: f64::NAN,
            pre_support_width: f64::NAN,
            post_support_width: f64::NAN,
        },
    };
    Ok((out, report))
}

/// N_ts partial shifts (E_γ/N_ts or p_γ/N_ts), each followed by one step of
/// `stepper`. N_ts = 1 is the instantaneous transition followed by one step.
#[allow(clippy::too_many_arguments)]
pub fn apply_gradual(
    psi: &ComplexField1D,
    event: &ScatteringEvent,
    stepper: &Propagator1D,
    basis: Option<&EnergyBasis>,
    central_energy: f64,
    direction_sign: f64,
    constants: &PhysicalConstants,
) -> Result<(ComplexField1D, TransitionReport)> {
    let n = event.n_ts.max(1);
    let mut cur = psi.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); psi.values.len()];
    let mut kept = 1.0;
    match event.model {
        TransitionModel::A => {
            let basis = basis.ok_or_else(|| Error::config("model A needs an energy basis"))?;
            let part = event.signed_energy() / n as f64;
            for _ in 0..n {
                let (next, r) = shift_energy(&cur, basis, part)?;
                kept *= 1.0 - r.leaked_probability;
                cur = next;
                stepper.apply(&mut cur.values, &mut scratch);
            }
        }
        TransitionModel::B => {
            let k = event.wavenumber(central_energy, direction_sign, constants)? / n as f64;
            for _ in 0..n {
                cur = apply_phase_ramp(&cur, k);
                stepper.apply(&mut cur.values, &mut scratch);
            }
        }
    }
    let report = match basis {
        Some(b) => {
            let pre = project_energy(psi, b, ProjectionRegion::WholeGrid)?;
            let post = project_energy(&cur, b, ProjectionRegion::WholeGrid)?;
            TransitionReport::from_coefficients(&pre, &post, 1.0 - kept)
        }
        None => TransitionReport {
            pre_mean_energy: f64::NAN,
            post_mean_energy: f64::NAN,
            leaked_probability: 1.0 - kept,
            negative_branch_weight: f64::NAN,
            pre_negative_branch_weight: f64::NAN,
            pre_support_width: f64::NAN,
            post_support_width: f64::NAN,
        },
    };
    Ok((cur, report))
}
