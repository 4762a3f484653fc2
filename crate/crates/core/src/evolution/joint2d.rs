use num_complex::Complex64;
use rayon::prelude::*;

use super::linalg::BandedLu;
use super::propagator::{Absorber, Propagator1D};
use super::two_channel::{CouplingParams, TwoChannelState};
use crate::grid_potential::{
    ComplexField1D, PhotonStates, PhysicalConstants, PotentialProfile, QuadratureGrid, SpatialGrid, D2_STENCIL,
};
use crate::{Error, Result};

/// Ψ(x, q) stored row-major by q: `values[j * n_x + i]` = Ψ(x_i, q_j).
#[derive(Debug, Clone, PartialEq)]
pub struct JointState2D {
    pub xgrid: SpatialGrid,
    pub qgrid: QuadratureGrid,
    pub values: Vec<Complex64>,
    pub t: f64,
}

impl JointState2D {
    pub fn product(psi: &ComplexField1D, chi: &ComplexField1D, qgrid: QuadratureGrid) -> Result<Self> {
        if chi.values.len() != qgrid.len() {
            return Err(Error::GridMismatch("photon state does not match the q grid".into()));
        }
        let nx = psi.grid.len();
        let mut values = vec![Complex64::new(0.0, 0.0); nx * qgrid.len()];
        for (j, c) in chi.values.iter().enumerate() {
            for (i, p) in psi.values.iter().enumerate() {
                values[j * nx + i] = p * c;
            }
        }
        Ok(Self {
            xgrid: psi.grid,
            qgrid,
            values,
            t: 0.0,
        })
    }

    /// ψ_A(x)ψ₀(q) + ψ_B(x)ψ₁(q).
    pub fn from_channels(state: &TwoChannelState, photons: &PhotonStates) -> Result<Self> {
        let mut out = Self::product(&state.psi_a, &photons.psi0, photons.qgrid)?;
        let nx = out.xgrid.len();
        for (j, c) in photons.psi1.values.iter().enumerate() {
            for (i, b) in state.psi_b.values.iter().enumerate() {
                out.values[j * nx + i] += b * c;
            }
        }
        out.t = state.t;
        Ok(out)
    }

    pub fn nx(&self) -> usize {
        self.xgrid.len()
    }

    pub fn nq(&self) -> usize {
        self.qgrid.len()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.nx() + i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.xgrid.dx() * self.qgrid.dq()
    }

    /// ∫|Ψ(x, q)|² dq.
    pub fn presence(&self) -> Vec<f64> {
        let nx = self.nx();
        let dq = self.qgrid.dq();
        let mut out = vec![0.0; nx];
        for row in self.values.chunks(nx) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v.norm_sqr();
            }
        }
        out.iter_mut().for_each(|o| *o *= dq);
        out
    }

    /// ∫|Ψ(x, q)|² dx per q.
    pub fn q_marginal(&self) -> Vec<f64> {
        let dx = self.xgrid.dx();
        self.values
            .chunks(self.nx())
            .map(|row| row.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx)
            .collect()
    }
}

/// ψ_{A,B}(x) = ∫ψ_{0,1}(q)Ψ(x,q)dq, plus the residual ‖Ψ − ψ_Aψ₀ − ψ_Bψ₁‖.
pub fn project_channels(state: &JointState2D, photons: &PhotonStates) -> Result<(TwoChannelState, f64)> {
    if photons.qgrid != state.qgrid {
        return Err(Error::GridMismatch("photon states and joint state use different q grids".into()));
    }
    let nx = state.nx();
    let dq = state.qgrid.dq();
    let mut a = vec![Complex64::new(0.0, 0.0); nx];
    let mut b = vec![Complex64::new(0.0, 0.0); nx];
    for (j, row) in state.values.chunks(nx).enumerate() {
        let (c0, c1) = (photons.psi0.values[j].conj() * dq, photons.psi1.values[j].conj() * dq);
        for i in 0..nx {
            a[i] += c0 * row[i];
            b[i] += c1 * row[i];
        }
    }
    let mut resid = 0.0;
    for (j, row) in state.values.chunks(nx).enumerate() {
        let (p0, p1) = (photons.psi0.values[j], photons.psi1.values[j]);
        for i in 0..nx {
            resid += (row[i] - a[i] * p0 - b[i] * p1).norm_sqr();
        }
    }
    let resid = (resid * state.xgrid.dx() * dq).sqrt();
    let two = TwoChannelState {
        psi_a: ComplexField1D::from_values(state.xgrid, a)?,
        psi_b: ComplexField1D::from_values(state.xgrid, b)?,
        t: state.t,
    };
    Ok((two, resid))
}

/// Crank-Nicolson in q for H_γ = −(ħ²/2)∂²_q + ω²q²/2 with the 8th-order stencil.
#[derive(Debug, Clone)]
struct QPropagator {
    /// iτ·H_γ band rows (2p+1 entries each).
    itau_band: Vec<Complex64>,
    lu: BandedLu,
    p: usize,
}

impl QPropagator {
    fn new(qgrid: &QuadratureGrid, hbar: f64, omega: f64, dt: f64) -> Result<Self> {
        let n = qgrid.len();
        let p = D2_STENCIL.len() - 1;
        let w = 2 * p + 1;
        let dq = qgrid.dq();
        let kin = -0.5 * hbar * hbar / (dq * dq);
        let tau = dt / (2.0 * hbar);
        let mut itau_band = vec![Complex64::new(0.0, 0.0); n * w];
        for j in 0..n {
            for s in 0..=p {
                let h = kin * D2_STENCIL[s];
                if s == 0 {
                    let q = qgrid.q(j);
                    itau_band[j * w + p] = Complex64::new(0.0, tau * (h + 0.5 * omega * omega * q * q));
                } else {
                    if j >= s {
                        itau_band[j * w + p - s] = Complex64::new(0.0, tau * h);
                    }
                    if j + s < n {
                        itau_band[j * w + p + s] = Complex64::new(0.0, tau * h);
                    }
                }
            }
        }
        let mut lhs = itau_band.clone();
        for j in 0..n {
            lhs[j * w + p] += 1.0;
        }
        let lu = BandedLu::factor(n, p, lhs)?;
        Ok(Self { itau_band, lu, p })
    }

    fn apply(&self, col: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = col.len();
        let p = self.p;
        let w = 2 * p + 1;
        for j in 0..n {
            let mut r = col[j];
            for k in j.saturating_sub(p)..(j + p + 1).min(n) {
                r -= self.itau_band[j * w + (k + p - j)] * col[k];
            }
            scratch[j] = r;
        }
        self.lu.solve(scratch);
        col.copy_from_slice(scratch);
    }
}

/// ADI Strang step X(dt/2) Q(dt/2) C(dt) Q(dt/2) X(dt/2), C the pointwise
/// phase of α′·x·w(x)·q.
#[derive(Debug, Clone)]
pub struct Joint2DStepper {
    x_half: Propagator1D,
    q_half: QPropagator,
    phase: Vec<Complex64>,
    dt: f64,
}

impl Joint2DStepper {
    pub fn new(
        v: &PotentialProfile,
        constants: &PhysicalConstants,
        coupling: &CouplingParams,
        qgrid: QuadratureGrid,
        dt: f64,
        absorber: Option<&Absorber>,
    ) -> Result<Self> {
        let x_half = Propagator1D::new(v, constants, 0.5 * dt, absorber)?;
        let q_half = QPropagator::new(&qgrid, constants.hbar, coupling.omega, 0.5 * dt)?;
        let nx = v.grid.len();
        let xs: Vec<f64> = v.grid.points().iter().map(|&x| coupling.dipole_profile(x)).collect();
        let mut phase = Vec::with_capacity(nx * qgrid.len());
        for j in 0..qgrid.len() {
            let q = qgrid.q(j);
            for &xw in &xs {
                phase.push(Complex64::from_polar(1.0, -coupling.alpha_prime * xw * q * dt / constants.hbar));
            }
        }
        Ok(Self {
            x_half,
            q_half,
            phase,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn x_sweep(&self, state: &mut JointState2D) {
        let nx = state.nx();
        state.values.par_chunks_mut(nx).for_each(|row| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); nx];
            self.x_half.apply(row, &mut scratch);
        });
    }

    fn q_sweep(&self, state: &mut JointState2D) {
        let (nx, nq) = (state.nx(), state.nq());
        let mut cols = vec![Complex64::new(0.0, 0.0); nx * nq];
        for j in 0..nq {
            for i in 0..nx {
                cols[i * nq + j] = state.values[j * nx + i];
            }
        }
        cols.par_chunks_mut(nq).for_each(|col| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); nq];
            self.q_half.apply(col, &mut scratch);
        });
        for j in 0..nq {
            for i in 0..nx {
                state.values[j * nx + i] = cols[i * nq + j];
            }
        }
    }

    pub fn step(&self, state: &mut JointState2D) {
        self.x_sweep(state);
        self.q_sweep(state);
        state
            .values
            .par_iter_mut()
            .zip(self.phase.par_iter())
            .with_min_len(4096)
            .for_each(|(v, p)| *v *= p);
        self.q_sweep(state);
        self.x_sweep(state);
        state.t += self.dt;
    }
}

/// One joint step, building the stepper on the fly.
pub fn step_joint_2d(
    state: &JointState2D,
    v: &PotentialProfile,
    constants: &PhysicalConstants,
    coupling: &CouplingParams,
    dt: f64,
) -> Result<JointState2D> {
    if !(dt > 0.0) {
        return Err(Error::config(format!("time step must be positive, got {dt}")));
    }
    state.xgrid.check_same(&v.grid)?;
    let stepper = Joint2DStepper::new(v, constants, coupling, state.qgrid, dt, None)?;
    let mut out = state.clone();
    stepper.step(&mut out);
    Ok(out)
}
