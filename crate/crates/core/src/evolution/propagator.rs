use num_complex::Complex64;

use super::linalg::Tridiagonal;
use crate::grid_potential::{ComplexField1D, PhysicalConstants, PotentialProfile};
use crate::{Error, Result};

/// Polynomial complex absorbing potential −iW(x) in the outer `width` nm:
/// W = strength·s^power, s the fractional depth into the layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absorber {
    pub width: f64,
    pub strength: f64,
    pub power: i32,
}

impl Default for Absorber {
    fn default() -> Self {
        Self {
            width: 40.0,
            strength: 0.1,
            power: 3,
        }
    }
}

impl Absorber {
    pub fn profile(&self, v: &PotentialProfile) -> Vec<f64> {
        let (lo, hi) = (v.grid.x_min() + self.width, v.grid.x_max() - self.width);
        (0..v.grid.len())
            .map(|i| {
                let x = v.grid.x(i);
                let depth = if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    0.0
                };
                self.strength * (depth / self.width).powi(self.power)
            })
            .collect()
    }
}

/// Crank-Nicolson propagator for the 3-point lattice Hamiltonian with hard
/// walls beyond the grid ends: (1 + iτH')ψ' = (1 − iτH')ψ, τ = dt/(2ħ).
/// H' = H − V_ref with V_ref = min V; the offset is applied as an exact phase.
#[derive(Debug, Clone)]
pub struct Propagator1D {
    dt: f64,
    offset_phase: Complex64,
    /// iτ·H_ii and iτ·H_{i,i±1}.
    itau_diag: Vec<Complex64>,
    itau_off: Complex64,
    solver: Tridiagonal,
}

impl Propagator1D {
    /// `dt` may be negative (backward propagation); it must be non-zero and finite.
    pub fn new(
        v: &PotentialProfile,
        constants: &PhysicalConstants,
        dt: f64,
        absorber: Option<&Absorber>,
    ) -> Result<Self> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::config(format!("time step must be non-zero and finite, got {dt}")));
        }
        let dx = v.grid.dx();
        let a = constants.kinetic_prefactor() / (dx * dx);
        let tau = dt / (2.0 * constants.hbar);
        let w = absorber.map(|ab| ab.profile(v));
        let v_ref = v.values.iter().copied().fold(f64::INFINITY, f64::min);
        let itau_diag: Vec<Complex64> = (0..v.len())
            .map(|i| {
                let h = Complex64::new(2.0 * a + v.values[i] - v_ref, -w.as_ref().map_or(0.0, |w| w[i]));
                Complex64::i() * tau * h
            })
            .collect();
        let itau_off = Complex64::new(0.0, -tau * a);
        let lhs: Vec<Complex64> = itau_diag.iter().map(|d| 1.0 + d).collect();
        let solver = Tridiagonal::factor(&lhs, itau_off)?;
        Ok(Self {
            dt,
            offset_phase: Complex64::from_polar(1.0, -v_ref * dt / constants.hbar),
            itau_diag,
            itau_off,
            solver,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.itau_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.itau_diag.is_empty()
    }

    /// Advances `psi` by one step in place. `scratch` must have the same length.
    pub fn apply(&self, psi: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = psi.len();
        debug_assert_eq!(n, self.len());
        for i in 0..n {
            let mut r = psi[i] * (1.0 - self.itau_diag[i]);
            if i > 0 {
                r -= self.itau_off * psi[i - 1];
            }
            if i + 1 < n {
                r -= self.itau_off * psi[i + 1];
            }
            scratch[i] = r;
        }
        self.solver.solve(scratch);
        for (p, s) in psi.iter_mut().zip(scratch.iter()) {
            *p = s * self.offset_phase;
        }
    }

    pub fn step(&self, field: &mut ComplexField1D) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); field.values.len()];
        self.apply(&mut field.values, &mut scratch);
    }
}

/// One Crank-Nicolson step with hard walls and no absorber.
pub fn step_1d(
    psi: &ComplexField1D,
    v: &PotentialProfile,
    constants: &PhysicalConstants,
    dt: f64,
) -> Result<ComplexField1D> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("time step must be positive, got {dt}")));
    }
    psi.grid.check_same(&v.grid)?;
    let prop = Propagator1D::new(v, constants, dt, None)?;
    let mut out = psi.clone();
    prop.step(&mut out);
    Ok(out)
}

/// ⟨ψ|H_e|ψ⟩ for the lattice Hamiltonian (real part), with Σ·dx weights.
pub fn electron_energy(psi: &[Complex64], v: &PotentialProfile, constants: &PhysicalConstants) -> f64 {
    let n = psi.len();
    let dx = v.grid.dx();
    let a = constants.kinetic_prefactor() / (dx * dx);
    let mut e = 0.0;
    for i in 0..n {
        let mut h = psi[i] * (2.0 * a + v.values[i]);
        if i > 0 {
            h -= psi[i - 1] * a;
        }
        if i + 1 < n {
            h -= psi[i + 1] * a;
        }
        e += (psi[i].conj() * h).re;
    }
    e * dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_potential::{build_gaussian_packet, Direction, SpatialGrid};

    #[test]
    fn constant_potential_is_a_global_phase() {
        let grid = SpatialGrid::default_device();
        let k = PhysicalConstants::default();
        let c = 0.3;
        let v0 = PotentialProfile::flat(grid, 0.0).unwrap();
        let vc = PotentialProfile::flat(grid, c).unwrap();
        let p = build_gaussian_packet(grid, &k, 0.0, 20.0, 0.05, Direction::LeftToRight, None).unwrap();
        let dt = 0.1;
        let (p0, pc) = (Propagator1D::new(&v0, &k, dt, None).unwrap(), Propagator1D::new(&vc, &k, dt, None).unwrap());
        let (mut a, mut b) = (p.clone(), p.clone());
        let steps = 100;
        for _ in 0..steps {
            p0.step(&mut a);
            pc.step(&mut b);
        }
        let t = steps as f64 * dt;
        let exact = Complex64::from_polar(1.0, -c * t / k.hbar);
        let diff: f64 = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x * exact - y).norm_sqr())
            .sum::<f64>()
            * grid.dx();
        assert!(diff.sqrt() < 1e-6, "{}", diff.sqrt());
    }

    #[test]
    fn absorber_removes_norm_only_at_edges() {
        let grid = SpatialGrid::default_device();
        let k = PhysicalConstants::default();
        let v = PotentialProfile::flat(grid, 0.0).unwrap();
        let ab = Absorber::default();
        let w = ab.profile(&v);
        assert_eq!(w[grid.len() / 2], 0.0);
        assert!((w[0] - ab.strength).abs() < 1e-12);
        let prop = Propagator1D::new(&v, &k, 0.1, Some(&ab)).unwrap();
        let mut p = build_gaussian_packet(grid, &k, 150.0, 10.0, 0.2, Direction::LeftToRight, None).unwrap();
        for _ in 0..3000 {
            prop.step(&mut p);
        }
        assert!(p.norm_sqr() < 0.05, "{}", p.norm_sqr());
    }
}
