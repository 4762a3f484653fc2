use crate::grid_potential::PhysicalConstants;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionModel {
    /// Shift of the central energy in the device eigenbasis.
    A,
    /// Shift of the central momentum by a phase ramp e^{ip_γx/ħ}.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    Absorption,
    Emission,
}

impl TransitionKind {
    pub fn sign(self) -> f64 {
        match self {
            TransitionKind::Absorption => 1.0,
            TransitionKind::Emission => -1.0,
        }
    }
}

/// A prescribed scattering event. For model B `k_gamma` (= p_γ/ħ, 1/nm) may
/// be given directly; otherwise it is matched to `e_gamma` at the packet's
/// central energy, see [`matched_wavenumber`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringEvent {
    pub t_s: f64,
    pub model: TransitionModel,
    pub kind: TransitionKind,
    pub e_gamma: f64,
    pub k_gamma: Option<f64>,
    pub n_ts: usize,
}

impl ScatteringEvent {
    pub fn new(t_s: f64, model: TransitionModel, kind: TransitionKind, e_gamma: f64) -> Result<Self> {
        let e = Self {
            t_s,
            model,
            kind,
            e_gamma,
            k_gamma: None,
            n_ts: 1,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_s >= 0.0 && self.t_s.is_finite()) {
            return Err(Error::config(format!("scattering time must be >= 0, got {}", self.t_s)));
        }
        if self.n_ts == 0 {
            return Err(Error::config("N_ts must be at least 1"));
        }
        match (self.model, self.k_gamma) {
            (TransitionModel::B, Some(k)) if k.is_finite() => Ok(()),
            _ if self.e_gamma > 0.0 && self.e_gamma.is_finite() => Ok(()),
            _ => Err(Error::config(format!("E_gamma must be > 0, got {}", self.e_gamma))),
        }
    }

    /// Signed energy change: +E_γ for absorption, −E_γ for emission.
    pub fn signed_energy(&self) -> f64 {
        self.kind.sign() * self.e_gamma
    }

    /// p_γ/ħ for model B: the explicit value or the match at `central_energy`
    /// for a packet moving in the direction of `direction_sign`.
    pub fn wavenumber(&self, central_energy: f64, direction_sign: f64, constants: &PhysicalConstants) -> Result<f64> {
        match self.k_gamma {
            Some(k) => Ok(k),
            None => matched_wavenumber(central_energy, self.signed_energy(), direction_sign, constants),
        }
    }
}

/// (√(2m*(E + ΔE)) − √(2m*E))/ħ, signed by the direction of motion.
pub fn matched_wavenumber(
    central_energy: f64,
    delta_e: f64,
    direction_sign: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if central_energy < 0.0 || central_energy + delta_e < 0.0 {
        return Err(Error::domain(format!(
            "cannot match a momentum shift of {delta_e} eV at central energy {central_energy} eV"
        )));
    }
    let k = |e: f64| (2.0 * constants.m_star * e).sqrt() / constants.hbar;
    Ok(direction_sign.signum() * (k(central_energy + delta_e) - k(central_energy)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ScatteringEvent::new(10.0, TransitionModel::A, TransitionKind::Absorption, 0.0).is_err());
        assert!(ScatteringEvent::new(-1.0, TransitionModel::A, TransitionKind::Absorption, 0.1).is_err());
        let mut e = ScatteringEvent::new(10.0, TransitionModel::B, TransitionKind::Absorption, 0.1).unwrap();
        e.n_ts = 0;
        assert!(e.validate().is_err());
    }

    #[test]
    fn matched_momentum_reproduces_the_energy_gain() {
        let k = PhysicalConstants::default();
        let kg = matched_wavenumber(0.2, 0.1, 1.0, &k).unwrap();
        let k0 = k.wavenumber(0.2);
        let e1 = (k.hbar * (k0 + kg)).powi(2) / (2.0 * k.m_star);
        assert!((e1 - 0.3).abs() < 1e-12);
        assert!(matched_wavenumber(0.2, 0.1, -1.0, &k).unwrap() < 0.0);
        assert!(matched_wavenumber(0.05, -0.1, 1.0, &k).is_err());
    }
}
