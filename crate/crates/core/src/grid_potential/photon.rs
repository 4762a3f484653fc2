use num_complex::Complex64;

use super::grid::{ComplexField1D, QuadratureGrid, SpatialGrid};
use crate::{Error, Result};

/// One-sided coefficients of the 9-point, 8th-order second-derivative stencil.
pub const D2_STENCIL: [f64; 5] = [
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Largest tail probability tolerated at the quadrature-grid edges.
pub const MAX_TAIL: f64 = 1e-12;

/// Zero- and one-photon states of the single cavity mode sampled on a q grid.
#[derive(Debug, Clone)]
pub struct PhotonStates {
    pub qgrid: QuadratureGrid,
    pub omega: f64,
    pub hbar: f64,
    pub psi0: ComplexField1D,
    pub psi1: ComplexField1D,
}

impl QuadratureGrid {
    /// The q grid as a generic uniform line, for fields sampled on it.
    pub fn as_line(&self) -> SpatialGrid {
        SpatialGrid::new(self.q_min(), self.q_max(), self.len()).expect("validated q grid")
    }
}

fn psi0_analytic(q: f64, hbar: f64, omega: f64) -> f64 {
    (omega / (std::f64::consts::PI * hbar)).powf(0.25) * (-omega * q * q / (2.0 * hbar)).exp()
}

fn psi1_analytic(q: f64, hbar: f64, omega: f64) -> f64 {
    (2.0 * omega / hbar).sqrt() * q * psi0_analytic(q, hbar, omega)
}

/// Harmonic-oscillator ground and first excited states of
/// H_γ = −(ħ²/2)∂²_q + ω²q²/2 (unit mass).
pub fn build_photon_states(qgrid: QuadratureGrid, hbar: f64, omega: f64) -> Result<PhotonStates> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::domain("photon angular frequency must be positive"));
    }
    let qm = qgrid.q_max();
    let scale = (hbar / omega).sqrt();
    let tail = psi1_analytic(qm, hbar, omega).powi(2) * scale;
    if tail > MAX_TAIL {
        return Err(Error::config(format!(
            "q grid half-width {qm} leaves tail probability {tail:.2e} > {MAX_TAIL:e}"
        )));
    }
    let line = qgrid.as_line();
    let psi0 = ComplexField1D::from_fn(line, |q| psi0_analytic(q, hbar, omega).into());
    let psi1 = ComplexField1D::from_fn(line, |q| psi1_analytic(q, hbar, omega).into());
    Ok(PhotonStates {
        qgrid,
        omega,
        hbar,
        psi0,
        psi1,
    })
}

impl PhotonStates {
    pub fn photon_energy(&self) -> f64 {
        self.hbar * self.omega
    }

    pub fn psi0_at(&self, q: f64) -> f64 {
        psi0_analytic(q, self.hbar, self.omega)
    }

    pub fn psi1_at(&self, q: f64) -> f64 {
        psi1_analytic(q, self.hbar, self.omega)
    }

    /// dψ₀/dq.
    pub fn dpsi0_at(&self, q: f64) -> f64 {
        -self.omega * q / self.hbar * self.psi0_at(q)
    }

    /// dψ₁/dq.
    pub fn dpsi1_at(&self, q: f64) -> f64 {
        let c = (2.0 * self.omega / self.hbar).sqrt();
        c * self.psi0_at(q) + c * q * self.dpsi0_at(q)
    }

    /// Numerical ∫ψ₀ q ψ₁ dq; analytically √(ħ/(2ω)).
    pub fn dipole(&self) -> f64 {
        let dq = self.qgrid.dq();
        (0..self.qgrid.len())
            .map(|j| self.psi0.values[j].re * self.qgrid.q(j) * self.psi1.values[j].re)
            .sum::<f64>()
            * dq
    }
}

/// H_γ applied with the 8th-order stencil; values beyond the grid are zero.
pub fn apply_h_gamma(values: &[Complex64], qgrid: &QuadratureGrid, hbar: f64, omega: f64) -> Vec<Complex64> {
    let n = values.len();
    let dq = qgrid.dq();
    let kin = -0.5 * hbar * hbar / (dq * dq);
    (0..n)
        .map(|j| {
            let mut lap = values[j] * D2_STENCIL[0];
            for (s, &c) in D2_STENCIL.iter().enumerate().skip(1) {
                if j >= s {
                    lap += values[j - s] * c;
                }
                if j + s < n {
                    lap += values[j + s] * c;
                }
            }
            let q = qgrid.q(j);
            lap * kin + values[j] * (0.5 * omega * omega * q * q)
        })
        .collect()
}
