use num_complex::Complex64;

use crate::grid_potential::{ComplexField1D, PhysicalConstants, PotentialProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injection {
    FromLeft,
    FromRight,
}

impl Injection {
    pub fn sign(self) -> f64 {
        match self {
            Injection::FromLeft => 1.0,
            Injection::FromRight => -1.0,
        }
    }
}

/// Stationary scattering state of the lattice Hamiltonian
/// H = −a(ψ_{i+1} − 2ψ_i + ψ_{i−1}) + V_i ψ_i, a = ħ²/(2m*dx²),
/// delta-normalised in energy: Σ φ_E* φ_E' dx ≈ δ(E − E').
#[derive(Debug, Clone)]
pub struct ScatteringState {
    pub energy: f64,
    pub direction: Injection,
    pub amplitudes: ComplexField1D,
    pub transmission: f64,
    pub reflection: f64,
    /// Transmitted and reflected amplitudes for unit incident amplitude.
    pub t_amp: Complex64,
    pub r_amp: Complex64,
}

impl ScatteringState {
    pub fn signed_energy(&self) -> f64 {
        self.direction.sign() * self.energy
    }
}

/// Lattice wavenumber and group velocity in a flat lead at level `v_lead`.
pub fn lattice_wave(constants: &PhysicalConstants, dx: f64, kinetic: f64) -> Result<(f64, f64)> {
    let (hbar, m) = (constants.hbar, constants.m_star);
    let cos_kdx = 1.0 - kinetic * m * dx * dx / (hbar * hbar);
    if !(cos_kdx < 1.0 && cos_kdx > -1.0) {
        return Err(Error::domain(format!(
            "kinetic energy {kinetic} eV is outside the propagating band of the grid"
        )));
    }
    let kdx = cos_kdx.acos();
    Ok((kdx / dx, hbar * kdx.sin() / (m * dx)))
}

fn decompose(
    psi0: Complex64,
    psi1: Complex64,
    x0: f64,
    x1: f64,
    k: f64,
) -> (Complex64, Complex64) {
    // psi = A e^{ikx} + B e^{-ikx} on two lattice sites
    let e0p = Complex64::from_polar(1.0, k * x0);
    let e1p = Complex64::from_polar(1.0, k * x1);
    let e0m = e0p.conj();
    let e1m = e1p.conj();
    let det = e0p * e1m - e0m * e1p;
    let a = (psi0 * e1m - e0m * psi1) / det;
    let b = (e0p * psi1 - psi0 * e1p) / det;
    (a, b)
}

pub fn solve_scattering_state(
    v: &PotentialProfile,
    constants: &PhysicalConstants,
    energy: f64,
    direction: Injection,
) -> Result<ScatteringState> {
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::domain(format!("scattering energy must be > 0, got {energy}")));
    }
    let (v_left, v_right) = v.lead_levels()?;
    let grid = v.grid;
    let n = grid.len();
    let dx = grid.dx();
    let (k_l, vel_l) = lattice_wave(constants, dx, energy - v_left)?;
    let (k_r, vel_r) = lattice_wave(constants, dx, energy - v_right)?;
    let c = 2.0 * constants.m_star * dx * dx / (constants.hbar * constants.hbar);
    let mut psi = vec![Complex64::new(0.0, 0.0); n];

    let (t_amp, r_amp, transmission, v_in) = match direction {
        Injection::FromLeft => {
            psi[n - 1] = Complex64::from_polar(1.0, k_r * grid.x(n - 1));
            psi[n - 2] = Complex64::from_polar(1.0, k_r * grid.x(n - 2));
            for i in (1..n - 1).rev() {
                psi[i - 1] = psi[i] * (2.0 + c * (v.values[i] - energy)) - psi[i + 1];
            }
            let (a, b) = decompose(psi[0], psi[1], grid.x(0), grid.x(1), k_l);
            let t = a.inv();
            (t, b / a, t.norm_sqr() * vel_r / vel_l, vel_l)
        }
        Injection::FromRight => {
            psi[0] = Complex64::from_polar(1.0, -k_l * grid.x(0));
            psi[1] = Complex64::from_polar(1.0, -k_l * grid.x(1));
            for i in 1..n - 1 {
                psi[i + 1] = psi[i] * (2.0 + c * (v.values[i] - energy)) - psi[i - 1];
            }
            // incident e^{-ikx}, reflected e^{+ikx}
            let (b, a) = decompose(psi[n - 2], psi[n - 1], grid.x(n - 2), grid.x(n - 1), k_r);
            let t = a.inv();
            (t, b / a, t.norm_sqr() * vel_l / vel_r, vel_r)
        }
    };
    let reflection = r_amp.norm_sqr();
    let scale = t_amp / (2.0 * std::f64::consts::PI * constants.hbar * v_in).sqrt();
    psi.iter_mut().for_each(|p| *p *= scale);
    Ok(ScatteringState {
        energy,
        direction,
        amplitudes: ComplexField1D::from_values(grid, psi)?,
        transmission,
        reflection,
        t_amp,
        r_amp,
    })
}

/// Relative residual ‖(H − E)φ‖/‖Eφ‖ over interior points at least `margin` sites from the edges.
pub fn stationary_residual(
    state: &ScatteringState,
    v: &PotentialProfile,
    constants: &PhysicalConstants,
    margin: usize,
) -> f64 {
    let psi = &state.amplitudes.values;
    let n = psi.len();
    let dx = v.grid.dx();
    let a = constants.kinetic_prefactor() / (dx * dx);
    let (mut num, mut den) = (0.0, 0.0);
    for i in margin.max(1)..n - margin.max(1) {
        let h = -a * (psi[i + 1] + psi[i - 1]) + psi[i] * (2.0 * a + v.values[i]);
        num += (h - psi[i] * state.energy).norm_sqr();
        den += (psi[i] * state.energy).norm_sqr();
    }
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_potential::{build_double_barrier, SpatialGrid};

    #[test]
    fn flat_potential_is_plane_wave() {
        let grid = SpatialGrid::default_device();
        let v = PotentialProfile::flat(grid, 0.0).unwrap();
        let k = PhysicalConstants::default();
        let s = solve_scattering_state(&v, &k, 0.1, Injection::FromLeft).unwrap();
        assert!((s.transmission - 1.0).abs() < 1e-10);
        assert!(s.reflection < 1e-20);
        let (kl, vel) = lattice_wave(&k, grid.dx(), 0.1).unwrap();
        let norm = 1.0 / (2.0 * std::f64::consts::PI * k.hbar * vel).sqrt();
        for i in (0..grid.len()).step_by(97) {
            let expect = Complex64::from_polar(norm, kl * grid.x(i));
            assert!((s.amplitudes.values[i] - expect).norm() < 1e-9 * norm);
        }
    }

    #[test]
    fn non_positive_energy_is_a_domain_error() {
        let v = PotentialProfile::flat(SpatialGrid::default_device(), 0.0).unwrap();
        let k = PhysicalConstants::default();
        assert!(matches!(
            solve_scattering_state(&v, &k, 0.0, Injection::FromLeft),
            Err(Error::Domain(_))
        ));
        assert!(solve_scattering_state(&v, &k, -1.0, Injection::FromRight).is_err());
    }

    #[test]
    fn rtd_flux_and_reciprocity() {
        let grid = SpatialGrid::default_device();
        let v = build_double_barrier(grid, 10.0, 2.0, 0.5).unwrap();
        let k = PhysicalConstants::default();
        for e in [0.01, 0.057, 0.15, 0.2285, 0.6, 1.4] {
            let l = solve_scattering_state(&v, &k, e, Injection::FromLeft).unwrap();
            let r = solve_scattering_state(&v, &k, e, Injection::FromRight).unwrap();
            assert!((l.transmission + l.reflection - 1.0).abs() < 1e-8);
            assert!((r.transmission + r.reflection - 1.0).abs() < 1e-8);
            assert!((l.transmission - r.transmission).abs() < 1e-8);
            assert!(stationary_residual(&l, &v, &k, 2) < 1e-6);
            assert!(stationary_residual(&r, &v, &k, 2) < 1e-6);
        }
    }
}
