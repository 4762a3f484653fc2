use rayon::prelude::*;

use super::velocity::{TwoChannelGuide, VelocityField, VelocityField2D};
use crate::grid_potential::{QuadratureGrid, SpatialGrid};
use crate::{Error, Result};

/// Anything that yields a guidance velocity (v_x, v_q) at a configuration
/// point; `None` at nodes.
pub trait Guide: Sync {
    fn velocity(&self, x: f64, q: f64) -> Option<(f64, f64)>;
}

impl Guide for VelocityField {
    fn velocity(&self, x: f64, _q: f64) -> Option<(f64, f64)> {
        self.at(x).map(|v| (v, 0.0))
    }
}

impl Guide for VelocityField2D {
    fn velocity(&self, x: f64, q: f64) -> Option<(f64, f64)> {
        self.at(x, q)
    }
}

impl Guide for TwoChannelGuide<'_> {
    fn velocity(&self, x: f64, q: f64) -> Option<(f64, f64)> {
        self.velocity_at(x, q)
    }
}

/// Most sub-steps a single trajectory may take within one field step.
const MAX_SUBSTEPS: usize = 64;

/// W Bohmian trajectories, one per experiment, with a recorded history.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub seed: u64,
    pub x: Vec<f64>,
    /// Present for (x, q) ensembles.
    pub q: Option<Vec<f64>>,
    pub last_v: Vec<(f64, f64)>,
    pub times: Vec<f64>,
    pub history_x: Vec<Vec<f64>>,
    pub history_q: Vec<Vec<f64>>,
    xlim: (f64, f64, f64),
    qlim: (f64, f64, f64),
}

impl TrajectoryEnsemble {
    pub fn new_1d(x: Vec<f64>, grid: &SpatialGrid, seed: u64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::config("ensemble size must be at least 1"));
        }
        let w = x.len();
        Ok(Self {
            seed,
            x,
            q: None,
            last_v: vec![(0.0, 0.0); w],
            times: Vec::new(),
            history_x: Vec::new(),
            history_q: Vec::new(),
            xlim: (grid.x_min() + grid.dx(), grid.x_max() - grid.dx(), grid.dx()),
            qlim: (0.0, 0.0, 1.0),
        })
    }

    pub fn new_2d(points: Vec<(f64, f64)>, grid: &SpatialGrid, qgrid: &QuadratureGrid, seed: u64) -> Result<Self> {
        let (x, q): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let mut e = Self::new_1d(x, grid, seed)?;
        e.q = Some(q);
        e.qlim = (qgrid.q_min() + qgrid.dq(), qgrid.q_max() - qgrid.dq(), qgrid.dq());
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn record(&mut self, t: f64) {
        self.times.push(t);
        self.history_x.push(self.x.clone());
        if let Some(q) = &self.q {
            self.history_q.push(q.clone());
        }
    }

    /// Midpoint (RK2) step from t to t + dt with the guide linearly
    /// interpolated in time between `g0` (at t) and `g1` (at t + dt).
    /// Fast trajectories sub-step so no sub-step moves more than half a cell.
    pub fn advance(&mut self, g0: &dyn Guide, g1: &dyn Guide, dt: f64) {
        let (xlo, xhi, dx) = self.xlim;
        let (qlo, qhi, dq) = self.qlim;
        let two_d = self.q.is_some();
        let mut qs = self.q.take().unwrap_or_else(|| vec![0.0; self.x.len()]);
        let sample = |s: f64, x: f64, q: f64, last: (f64, f64)| -> (f64, f64) {
            match (g0.velocity(x, q), g1.velocity(x, q)) {
                (Some(a), Some(b)) => ((1.0 - s) * a.0 + s * b.0, (1.0 - s) * a.1 + s * b.1),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => last,
            }
        };
        let clamp = |x: f64, q: f64| -> (f64, f64) {
            (x.clamp(xlo, xhi), if two_d { q.clamp(qlo, qhi) } else { q })
        };
        self.x
            .par_iter_mut()
            .zip(qs.par_iter_mut())
            .zip(self.last_v.par_iter_mut())
            .for_each(|((x, q), last)| {
                let v0 = sample(0.0, *x, *q, *last);
                let reach = (v0.0.abs() * dt / (0.5 * dx)).max(if two_d { v0.1.abs() * dt / (0.5 * dq) } else { 0.0 });
                let m = (reach.ceil() as usize).clamp(1, MAX_SUBSTEPS);
                let h = dt / m as f64;
                for k in 0..m {
                    let s0 = k as f64 / m as f64;
                    let k1 = sample(s0, *x, *q, *last);
                    let (xm, qm) = clamp(*x + 0.5 * h * k1.0, *q + 0.5 * h * k1.1);
                    let k2 = sample(s0 + 0.5 / m as f64, xm, qm, k1);
                    let (xn, qn) = clamp(*x + h * k2.0, *q + h * k2.1);
                    *x = xn;
                    *q = qn;
                    *last = k2;
                }
            });
        if two_d {
            self.q = Some(qs);
        }
    }
}

/// I^j = (e/L)·v_j for trajectories inside [−L/2, L/2], 0 outside.
pub fn ramo_current(x: &[f64], v: &[f64], length: f64, e_charge: f64) -> Result<Vec<f64>> {
    if !(length > 0.0) {
        return Err(Error::domain(format!("Ramo region length must be positive, got {length}")));
    }
    Ok(x
        .iter()
        .zip(v)
        .map(|(&x, &v)| if x.abs() <= 0.5 * length { e_charge * v / length } else { 0.0 })
        .collect())
}
