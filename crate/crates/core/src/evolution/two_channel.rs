use num_complex::Complex64;
use rayon::prelude::*;

use super::propagator::{electron_energy, Absorber, Propagator1D};
use crate::grid_potential::{units, ComplexField1D, PhysicalConstants, PotentialProfile, SpatialGrid};
use crate::{Error, Result};

/// Light-matter coupling. `alpha` is the two-channel strength in eV/nm,
/// `alpha_prime = alpha / ∫ψ₀ q ψ₁ dq` the joint-space strength, and the
/// coupling profile is α·x·w(x) with w = cos²(πx/(2L)) for |x| < L, 0 outside
/// (w ≡ 1 when `envelope_half_width` is None).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub omega: f64,
    pub envelope_half_width: Option<f64>,
}

impl CouplingParams {
    /// From α in eV/m and the photon energy ħω in eV.
    pub fn from_si_alpha(
        alpha_ev_per_m: f64,
        photon_energy: f64,
        constants: &PhysicalConstants,
        envelope_half_width: Option<f64>,
    ) -> Result<Self> {
        Self::new(
            units::ev_per_m_to_ev_per_nm(alpha_ev_per_m),
            photon_energy / constants.hbar,
            constants.hbar,
            envelope_half_width,
        )
    }

    pub fn new(alpha: f64, omega: f64, hbar: f64, envelope_half_width: Option<f64>) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::config("photon angular frequency must be positive"));
        }
        if !alpha.is_finite() {
            return Err(Error::config("coupling strength must be finite"));
        }
        if let Some(l) = envelope_half_width {
            if !(l > 0.0) {
                return Err(Error::config("coupling envelope half-width must be positive"));
            }
        }
        Ok(Self {
            alpha,
            alpha_prime: alpha / (hbar / (2.0 * omega)).sqrt(),
            omega,
            envelope_half_width,
        })
    }

    pub fn photon_energy(&self, hbar: f64) -> f64 {
        hbar * self.omega
    }

    /// x·w(x), the spatial factor shared by both formulations.
    pub fn dipole_profile(&self, x: f64) -> f64 {
        match self.envelope_half_width {
            None => x,
            Some(l) if x.abs() < l => {
                let c = (std::f64::consts::FRAC_PI_2 * x / l).cos();
                x * c * c
            }
            Some(_) => 0.0,
        }
    }

    pub fn profile_on(&self, grid: &SpatialGrid) -> Vec<f64> {
        grid.points().into_iter().map(|x| self.alpha * self.dipole_profile(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoChannelState {
    pub psi_a: ComplexField1D,
    pub psi_b: ComplexField1D,
    pub t: f64,
}

impl TwoChannelState {
    pub fn new(psi_a: ComplexField1D, psi_b: ComplexField1D, t: f64) -> Result<Self> {
        psi_a.grid.check_same(&psi_b.grid)?;
        Ok(Self { psi_a, psi_b, t })
    }

    /// Electron in channel A, no photon in B.
    pub fn from_electron(psi: ComplexField1D) -> Self {
        let psi_b = ComplexField1D::zeros(psi.grid);
        Self {
            psi_a: psi,
            psi_b,
            t: 0.0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi_a.norm_sqr() + self.psi_b.norm_sqr()
    }

    pub fn presence(&self) -> Vec<f64> {
        self.psi_a
            .values
            .iter()
            .zip(&self.psi_b.values)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }
}

/// Strang splitting: CN(dt/2) per channel, exact local 2×2 unitary for
/// [[ħω/2, c(x)], [c(x), 3ħω/2]] over dt, CN(dt/2).
#[derive(Debug, Clone)]
pub struct TwoChannelStepper {
    half: Propagator1D,
    u11: Vec<Complex64>,
    u22: Vec<Complex64>,
    u12: Vec<Complex64>,
    dt: f64,
    coupling: Vec<f64>,
    photon_energy: f64,
}

impl TwoChannelStepper {
    pub fn new(
        v: &PotentialProfile,
        constants: &PhysicalConstants,
        coupling: &CouplingParams,
        dt: f64,
        absorber: Option<&Absorber>,
    ) -> Result<Self> {
        let half = Propagator1D::new(v, constants, 0.5 * dt, absorber)?;
        let hw = coupling.photon_energy(constants.hbar);
        let d = 0.5 * hw;
        let glob = Complex64::from_polar(1.0, -hw * dt / constants.hbar);
        let c = coupling.profile_on(&v.grid);
        let mut u11 = Vec::with_capacity(c.len());
        let mut u22 = Vec::with_capacity(c.len());
        let mut u12 = Vec::with_capacity(c.len());
        for &cx in &c {
            let om = (d * d + cx * cx).sqrt();
            let th = om * dt / constants.hbar;
            let sinc = if om > 0.0 { th.sin() / om } else { dt / constants.hbar };
            let cs = th.cos();
            u11.push(glob * Complex64::new(cs, d * sinc));
            u22.push(glob * Complex64::new(cs, -d * sinc));
            u12.push(glob * Complex64::new(0.0, -cx * sinc));
        }
        Ok(Self {
            half,
            u11,
            u22,
            u12,
            dt,
            coupling: c,
            photon_energy: hw,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, state: &mut TwoChannelState) {
        let n = state.psi_a.values.len();
        let half = &self.half;
        let run_half = |a: &mut Vec<Complex64>, b: &mut Vec<Complex64>| {
            rayon::join(
                || half.apply(a, &mut vec![Complex64::new(0.0, 0.0); n]),
                || half.apply(b, &mut vec![Complex64::new(0.0, 0.0); n]),
            );
        };
        run_half(&mut state.psi_a.values, &mut state.psi_b.values);
        state
            .psi_a
            .values
            .par_iter_mut()
            .zip(state.psi_b.values.par_iter_mut())
            .enumerate()
            .with_min_len(512)
            .for_each(|(i, (a, b))| {
                let (na, nb) = (self.u11[i] * *a + self.u12[i] * *b, self.u12[i] * *a + self.u22[i] * *b);
                *a = na;
                *b = nb;
            });
        run_half(&mut state.psi_a.values, &mut state.psi_b.values);
        state.t += self.dt;
    }

    /// ⟨H⟩ of the two-channel system, including the photon offsets.
    pub fn energy(&self, state: &TwoChannelState, v: &PotentialProfile, constants: &PhysicalConstants) -> f64 {
        let dx = v.grid.dx();
        let ea = electron_energy(&state.psi_a.values, v, constants);
        let eb = electron_energy(&state.psi_b.values, v, constants);
        let na = state.psi_a.norm_sqr();
        let nb = state.psi_b.norm_sqr();
        let cross: f64 = state
            .psi_a
            .values
            .iter()
            .zip(&state.psi_b.values)
            .zip(&self.coupling)
            .map(|((a, b), c)| 2.0 * c * (a.conj() * b).re)
            .sum::<f64>()
            * dx;
        ea + eb + 0.5 * self.photon_energy * na + 1.5 * self.photon_energy * nb + cross
    }
}

/// One two-channel step, building the stepper on the fly.
pub fn step_two_channel(
    state: &TwoChannelState,
    v: &PotentialProfile,
    constants: &PhysicalConstants,
    coupling: &CouplingParams,
    dt: f64,
) -> Result<TwoChannelState> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("time step must be positive, got {dt}")));
    }
    state.psi_a.grid.check_same(&v.grid)?;
    let stepper = TwoChannelStepper::new(v, constants, coupling, dt, None)?;
    let mut out = state.clone();
    stepper.step(&mut out);
    Ok(out)
}
