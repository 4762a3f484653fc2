use crate::evolution::{JointState2D, TwoChannelState};
use crate::grid_potential::{ComplexField1D, SpatialGrid};
use crate::spectral::{project_energy, EnergyBasis, ProjectionRegion, SpectralCoefficients};
use crate::{Error, Result};

/// Level populations (P_A1, P_A2, P_B1, P_B2) at one instant, plus the
/// unnormalised spectral weight N they were divided by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPopulations {
    pub p_a1: f64,
    pub p_a2: f64,
    pub p_b1: f64,
    pub p_b2: f64,
    pub weight: f64,
}

impl LevelPopulations {
    pub fn sum(&self) -> f64 {
        self.p_a1 + self.p_a2 + self.p_b1 + self.p_b2
    }
}

fn split_weight(c: &SpectralCoefficients, e_split: f64) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (e, w) in c.energies.iter().zip(c.weights()) {
        if e.abs() < e_split {
            lo += w;
        } else {
            hi += w;
        }
    }
    (lo, hi)
}

/// Channel populations of the lower and upper well levels: |c(E)|² over
/// |x| <= `half_width`, folded over both branches and split at `e_split`.
pub fn level_populations(
    state: &TwoChannelState,
    basis: &EnergyBasis,
    e_split: f64,
    half_width: f64,
) -> Result<LevelPopulations> {
    let region = ProjectionRegion::Active(half_width);
    let ca = project_energy(&state.psi_a, basis, region)?;
    let cb = project_energy(&state.psi_b, basis, region)?;
    let (a1, a2) = split_weight(&ca, e_split);
    let (b1, b2) = split_weight(&cb, e_split);
    let n = a1 + a2 + b1 + b2;
    if !(n > 0.0) {
        return Err(Error::UndefinedPopulations);
    }
    Ok(LevelPopulations {
        p_a1: a1 / n,
        p_a2: a2 / n,
        p_b1: b1 / n,
        p_b2: b2 / n,
        weight: n,
    })
}

/// Population time series with the diagnostics recorded alongside.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PopulationSeries {
    pub t: Vec<f64>,
    pub p_a1: Vec<f64>,
    pub p_a2: Vec<f64>,
    pub p_b1: Vec<f64>,
    pub p_b2: Vec<f64>,
    /// Unnormalised spectral weight inside the active region.
    pub weight: Vec<f64>,
    /// ‖ψ_B‖² over the whole grid.
    pub b_norm: Vec<f64>,
}

impl PopulationSeries {
    pub fn push(&mut self, t: f64, p: &LevelPopulations, b_norm: f64) {
        self.t.push(t);
        self.p_a1.push(p.p_a1);
        self.p_a2.push(p.p_a2);
        self.p_b1.push(p.p_b1);
        self.p_b2.push(p.p_b2);
        self.weight.push(p.weight);
        self.b_norm.push(b_norm);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Indices where the active-region weight is at least `fraction` of its peak.
    pub fn window(&self, fraction: f64) -> Vec<usize> {
        let peak = self.weight.iter().cloned().fold(0.0, f64::max);
        (0..self.len()).filter(|&i| self.weight[i] >= fraction * peak).collect()
    }

    /// Largest |P − P'| over the four populations at common sample times.
    pub fn max_deviation(&self, other: &PopulationSeries) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, t) in self.t.iter().enumerate() {
            if let Some(j) = other.t.iter().position(|s| (s - t).abs() < 1e-9) {
                worst = worst
                    .max((self.p_a1[i] - other.p_a1[j]).abs())
                    .max((self.p_a2[i] - other.p_a2[j]).abs())
                    .max((self.p_b1[i] - other.p_b1[j]).abs())
                    .max((self.p_b2[i] - other.p_b2[j]).abs());
            }
        }
        worst
    }
}

/// P_e(x, t) = |ψ_A|² + |ψ_B|² or ∫|Ψ(x, q)|²dq.
#[derive(Debug, Clone, PartialEq)]
pub struct PresenceDensity {
    pub t: f64,
    pub grid: SpatialGrid,
    pub values: Vec<f64>,
}

impl PresenceDensity {
    pub fn from_field(psi: &ComplexField1D, t: f64) -> Self {
        Self {
            t,
            grid: psi.grid,
            values: psi.density(),
        }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }
}

pub fn presence_density(state: &TwoChannelState) -> PresenceDensity {
    PresenceDensity {
        t: state.t,
        grid: state.psi_a.grid,
        values: state.presence(),
    }
}

pub fn presence_density_2d(state: &JointState2D) -> PresenceDensity {
    PresenceDensity {
        t: state.t,
        grid: state.xgrid,
        values: state.presence(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_potential::{build_double_barrier, PhysicalConstants};
    use crate::spectral::box_eigenstates;

    #[test]
    fn well_ground_state_is_all_p_a1() {
        let grid = SpatialGrid::default_device();
        let v = build_double_barrier(grid, 10.0, 2.0, 0.5).unwrap();
        let k = PhysicalConstants::default();
        let basis = EnergyBasis::with_defaults(&v, &k).unwrap();
        let levels = box_eigenstates(&v, &k, 1, Some(7.0)).unwrap();
        let (_, phi) = &levels[0];
        // embed the box state into the full grid
        let start = grid.region_indices(7.0).start;
        let mut psi = ComplexField1D::zeros(grid);
        for (i, c) in phi.values.iter().enumerate() {
            psi.values[start + i] = *c;
        }
        let state = TwoChannelState::from_electron(psi);
        let p = level_populations(&state, &basis, 0.14, 7.0).unwrap();
        assert!((p.p_a1 - 1.0).abs() < 0.02, "{p:?}");
        assert!((p.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_well_is_undefined() {
        let grid = SpatialGrid::new(-100.0, 100.0, 801).unwrap();
        let v = build_double_barrier(grid, 10.0, 2.0, 0.5).unwrap();
        let k = PhysicalConstants::default();
        let basis = EnergyBasis::build(&v, &k, 0.01, 0.5, 0.01).unwrap();
        let state = TwoChannelState::from_electron(ComplexField1D::zeros(grid));
        assert!(matches!(
            level_populations(&state, &basis, 0.14, 7.0),
            Err(Error::UndefinedPopulations)
        ));
    }
}
