//! Unit system: energies in eV, lengths in nm, times in fs.

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// Free-electron mass in eV·fs²/nm² (m_e c² / c², c = 299.792458 nm/fs).
pub const ELECTRON_MASS: f64 = 5.685_630;

/// Effective-mass ratio reproducing the 0.058 / 0.23 eV well levels of the
/// 10 nm / 2 nm / 0.5 eV double barrier on the default grid.
pub const DEFAULT_MASS_RATIO: f64 = 0.040;

/// Converts a coupling strength given per metre (eV/m) to eV/nm.
pub fn ev_per_m_to_ev_per_nm(alpha: f64) -> f64 {
    alpha * 1e-9
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// ħ in eV·fs.
    pub hbar: f64,
    /// Effective mass m* in eV·fs²/nm².
    pub m_star: f64,
    /// Carrier charge in arbitrary current units.
    pub e_charge: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, m_star: f64, e_charge: f64) -> crate::Result<Self> {
        if !(hbar > 0.0 && m_star > 0.0 && e_charge > 0.0) {
            return Err(crate::Error::config(
                "physical constants must be strictly positive",
            ));
        }
        Ok(Self {
            hbar,
            m_star,
            e_charge,
        })
    }

    pub fn with_mass_ratio(ratio: f64) -> crate::Result<Self> {
        Self::new(HBAR_EV_FS, ratio * ELECTRON_MASS, 1.0)
    }

    /// ħ²/(2m*) in eV·nm².
    pub fn kinetic_prefactor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.m_star)
    }

    /// Continuum wavenumber √(2m*E)/ħ in 1/nm.
    pub fn wavenumber(&self, energy: f64) -> f64 {
        (2.0 * self.m_star * energy.max(0.0)).sqrt() / self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: HBAR_EV_FS,
            m_star: DEFAULT_MASS_RATIO * ELECTRON_MASS,
            e_charge: 1.0,
        }
    }
}
