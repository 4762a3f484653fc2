use num_complex::Complex64;

use crate::evolution::{JointState2D, TwoChannelState};
use crate::grid_potential::{ComplexField1D, PhotonStates, PhysicalConstants, QuadratureGrid, SpatialGrid};
use crate::{Error, Result};

/// Relative density below which a grid point counts as a node.
pub const NODE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocitySource {
    PhaseGradient,
    CurrentDensity,
}

/// Guidance velocity on grid points; `None` marks nodes.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub grid: SpatialGrid,
    pub v: Vec<Option<f64>>,
    pub source: VelocitySource,
}

impl VelocityField {
    /// Linear interpolation; `None` if either bracketing point is a node.
    pub fn at(&self, x: f64) -> Option<f64> {
        let n = self.v.len();
        let f = self.grid.fractional_index(x).clamp(0.0, (n - 1) as f64);
        let i = (f.floor() as usize).min(n - 2);
        let s = f - i as f64;
        Some(self.v[i]? * (1.0 - s) + self.v[i + 1]? * s)
    }

    pub fn mean_weighted(&self, density: &[f64]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (v, d) in self.v.iter().zip(density) {
            if let Some(v) = v {
                num += v * d;
                den += d;
            }
        }
        num / den
    }
}

fn velocity_line(psi: &[Complex64], d: f64, prefactor: f64, source: VelocitySource) -> Vec<Option<f64>> {
    let n = psi.len();
    let max = psi.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let floor = NODE_THRESHOLD * max;
    (0..n)
        .map(|i| {
            let rho = psi[i].norm_sqr();
            if rho < floor || max == 0.0 {
                return None;
            }
            let (l, r, span) = match i {
                0 => (psi[0], psi[1], d),
                _ if i == n - 1 => (psi[n - 2], psi[n - 1], d),
                _ => (psi[i - 1], psi[i + 1], 2.0 * d),
            };
            Some(match source {
                VelocitySource::PhaseGradient => prefactor * (r * l.conj()).arg() / span,
                VelocitySource::CurrentDensity => prefactor * (psi[i].conj() * (r - l)).im / (span * rho),
            })
        })
        .collect()
}

/// v = (ħ/m*)·Im(ψ*∂ψ)/|ψ|² (current route) or (ħ/m*)·∂ arg ψ (phase route).
pub fn velocity_1d(psi: &ComplexField1D, constants: &PhysicalConstants, source: VelocitySource) -> VelocityField {
    VelocityField {
        grid: psi.grid,
        v: velocity_line(&psi.values, psi.grid.dx(), constants.hbar / constants.m_star, source),
        source,
    }
}

/// Velocity components of Ψ(x, q), both stored q-major like the state.
#[derive(Debug, Clone)]
pub struct VelocityField2D {
    pub xgrid: SpatialGrid,
    pub qgrid: QuadratureGrid,
    pub vx: Vec<Option<f64>>,
    pub vq: Vec<Option<f64>>,
}

impl VelocityField2D {
    /// Bilinear interpolation of (v_x, v_q); `None` if any corner is a node.
    pub fn at(&self, x: f64, q: f64) -> Option<(f64, f64)> {
        let (nx, nq) = (self.xgrid.len(), self.qgrid.len());
        let fx = self.xgrid.fractional_index(x).clamp(0.0, (nx - 1) as f64);
        let fq = ((q - self.qgrid.q_min()) / self.qgrid.dq()).clamp(0.0, (nq - 1) as f64);
        let (i, j) = ((fx.floor() as usize).min(nx - 2), (fq.floor() as usize).min(nq - 2));
        let (s, t) = (fx - i as f64, fq - j as f64);
        let pick = |f: &Vec<Option<f64>>| -> Option<f64> {
            let a = f[j * nx + i]?;
            let b = f[j * nx + i + 1]?;
            let c = f[(j + 1) * nx + i]?;
            let d = f[(j + 1) * nx + i + 1]?;
            Some((a * (1.0 - s) + b * s) * (1.0 - t) + (c * (1.0 - s) + d * s) * t)
        };
        Some((pick(&self.vx)?, pick(&self.vq)?))
    }
}

/// (v_x, v_q) of the joint state; the q "mass" is 1 so v_q = ħ·Im(Ψ*∂_qΨ)/|Ψ|².
pub fn velocity_2d(state: &JointState2D, constants: &PhysicalConstants, source: VelocitySource) -> VelocityField2D {
    let (nx, nq) = (state.nx(), state.nq());
    let max = state.values.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let mut vx = Vec::with_capacity(nx * nq);
    for row in state.values.chunks(nx) {
        // node threshold relative to the global maximum
        let line = velocity_line(row, state.xgrid.dx(), constants.hbar / constants.m_star, source);
        vx.extend(line.into_iter().zip(row).map(|(v, c)| {
            if c.norm_sqr() < NODE_THRESHOLD * max {
                None
            } else {
                v
            }
        }));
    }
    let mut vq = vec![None; nx * nq];
    let mut col = vec![Complex64::new(0.0, 0.0); nq];
    for i in 0..nx {
        for (j, c) in col.iter_mut().enumerate() {
            *c = state.values[j * nx + i];
        }
        let line = velocity_line(&col, state.qgrid.dq(), constants.hbar, source);
        for (j, v) in line.into_iter().enumerate() {
            vq[j * nx + i] = if col[j].norm_sqr() < NODE_THRESHOLD * max { None } else { v };
        }
    }
    VelocityField2D {
        xgrid: state.xgrid,
        qgrid: state.qgrid,
        vx,
        vq,
    }
}

/// Ψ(x, Q) by linear interpolation in q. Not normalised.
pub fn slice_bcwf(state: &JointState2D, q: f64) -> Result<ComplexField1D> {
    let qg = &state.qgrid;
    if !(q >= qg.q_min() && q <= qg.q_max()) {
        return Err(Error::domain(format!(
            "Q = {q} lies outside the quadrature grid [{}, {}]",
            qg.q_min(),
            qg.q_max()
        )));
    }
    let nx = state.nx();
    let f = ((q - qg.q_min()) / qg.dq()).min((qg.len() - 1) as f64);
    let j = (f.floor() as usize).min(qg.len() - 2);
    let t = f - j as f64;
    let vals = (0..nx)
        .map(|i| state.values[j * nx + i] * (1.0 - t) + state.values[(j + 1) * nx + i] * t)
        .collect();
    ComplexField1D::from_values(state.xgrid, vals)
}

/// Ψ(x, Q) = ψ_A(x)ψ₀(Q) + ψ_B(x)ψ₁(Q) for a two-channel state.
pub fn slice_two_channel(state: &TwoChannelState, photons: &PhotonStates, q: f64) -> ComplexField1D {
    let (p0, p1) = (photons.psi0_at(q), photons.psi1_at(q));
    let vals = state
        .psi_a
        .values
        .iter()
        .zip(&state.psi_b.values)
        .map(|(a, b)| a * p0 + b * p1)
        .collect();
    ComplexField1D {
        grid: state.psi_a.grid,
        values: vals,
    }
}

/// Local guidance of a two-channel state at (x, Q): the x part from central
/// differences at the two bracketing grid points, the q part from the analytic
/// photon-state derivatives.
#[derive(Debug, Clone, Copy)]
pub struct TwoChannelGuide<'a> {
    state: &'a TwoChannelState,
    photons: &'a PhotonStates,
    constants: &'a PhysicalConstants,
    floor: f64,
}

impl<'a> TwoChannelGuide<'a> {
    pub fn new(state: &'a TwoChannelState, photons: &'a PhotonStates, constants: &'a PhysicalConstants) -> Self {
        let chan_max = state
            .psi_a
            .values
            .iter()
            .zip(&state.psi_b.values)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .fold(0.0, f64::max);
        let photon_max = photons
            .psi0
            .values
            .iter()
            .chain(&photons.psi1.values)
            .map(|c| c.norm_sqr())
            .fold(0.0, f64::max);
        Self {
            state,
            photons,
            constants,
            floor: NODE_THRESHOLD * chan_max * photon_max,
        }
    }

    pub fn velocity_at(&self, x: f64, q: f64) -> Option<(f64, f64)> {
        let a = &self.state.psi_a.values;
        let b = &self.state.psi_b.values;
        let grid = self.state.psi_a.grid;
        let n = a.len();
        let ph = self.photons;
        let (p0, p1) = (ph.psi0_at(q), ph.psi1_at(q));
        let (d0, d1) = (ph.dpsi0_at(q), ph.dpsi1_at(q));
        let f = grid.fractional_index(x).clamp(1.0, (n - 2) as f64);
        let i = (f.floor() as usize).clamp(1, n - 3);
        let s = f - i as f64;
        let psi = |k: usize| a[k] * p0 + b[k] * p1;
        let dx = grid.dx();
        let mut out = [(0.0, 0.0); 2];
        for (slot, k) in [i, i + 1].into_iter().enumerate() {
            let c = psi(k);
            let rho = c.norm_sqr();
            if rho <= self.floor || rho == 0.0 {
                return None;
            }
            let grad = (psi(k + 1) - psi(k - 1)) / (2.0 * dx);
            let dq = a[k] * d0 + b[k] * d1;
            out[slot] = (
                self.constants.hbar / self.constants.m_star * (c.conj() * grad).im / rho,
                self.constants.hbar * (c.conj() * dq).im / rho,
            );
        }
        Some((
            out[0].0 * (1.0 - s) + out[1].0 * s,
            out[0].1 * (1.0 - s) + out[1].1 * s,
        ))
    }
}
