use num_complex::Complex64;
use rayon::prelude::*;

use super::scattering_state::{solve_scattering_state, Injection, ScatteringState};
use crate::grid_potential::{ComplexField1D, PhysicalConstants, PotentialProfile, SpatialGrid};
use crate::{Error, Result};

/// Lower edge of the default energy window, eV.
pub const DEFAULT_E_MIN: f64 = 0.002;
pub const DEFAULT_E_MAX: f64 = 1.5;
pub const DEFAULT_DE: f64 = 0.001;

/// Signed-energy scattering basis: right-injected states at −E_max..−E_min
/// followed by left-injected states at E_min..E_max.
#[derive(Debug, Clone)]
pub struct EnergyBasis {
    pub energies: Vec<f64>,
    pub states: Vec<ScatteringState>,
    pub de: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub grid: SpatialGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectionRegion {
    WholeGrid,
    /// |x| <= half_width.
    Active(f64),
}

impl EnergyBasis {
    pub fn build(
        v: &PotentialProfile,
        constants: &PhysicalConstants,
        e_min: f64,
        e_max: f64,
        de: f64,
    ) -> Result<Self> {
        if !(e_min > 0.0 && e_max > e_min && de > 0.0) {
            return Err(Error::config(format!(
                "energy window must satisfy 0 < E_min < E_max with dE > 0, got [{e_min}, {e_max}] / {de}"
            )));
        }
        let per_branch = ((e_max - e_min) / de + 1e-9).floor() as usize + 1;
        let mags: Vec<f64> = (0..per_branch).map(|i| e_min + i as f64 * de).collect();
        let mut jobs: Vec<(f64, Injection)> = mags.iter().rev().map(|&e| (e, Injection::FromRight)).collect();
        jobs.extend(mags.iter().map(|&e| (e, Injection::FromLeft)));
        let states = jobs
            .par_iter()
            .map(|&(e, dir)| solve_scattering_state(v, constants, e, dir))
            .collect::<Result<Vec<_>>>()?;
        let energies = states.iter().map(|s| s.signed_energy()).collect();
        Ok(Self {
            energies,
            states,
            de,
            e_min,
            e_max: mags[per_branch - 1],
            grid: v.grid,
        })
    }

    pub fn with_defaults(v: &PotentialProfile, constants: &PhysicalConstants) -> Result<Self> {
        Self::build(v, constants, DEFAULT_E_MIN, DEFAULT_E_MAX, DEFAULT_DE)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn per_branch(&self) -> usize {
        self.states.len() / 2
    }

    /// Index of the state with signed energy sign·|E| at branch position `j`
    /// (j = 0 is E_min on either branch).
    pub fn index(&self, negative: bool, j: usize) -> usize {
        let n = self.per_branch();
        if negative {
            n - 1 - j
        } else {
            n + j
        }
    }
}

/// c(E) on the signed-energy grid of a basis.
#[derive(Debug, Clone)]
pub struct SpectralCoefficients {
    pub energies: Vec<f64>,
    pub c: Vec<Complex64>,
    pub de: f64,
    pub region: ProjectionRegion,
}

impl SpectralCoefficients {
    pub fn zeros(basis: &EnergyBasis, region: ProjectionRegion) -> Self {
        Self {
            energies: basis.energies.clone(),
            c: vec![Complex64::new(0.0, 0.0); basis.len()],
            de: basis.de,
            region,
        }
    }

    /// |c|²·dE per signed energy.
    pub fn weights(&self) -> Vec<f64> {
        self.c.iter().map(|c| c.norm_sqr() * self.de).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights().iter().sum()
    }

    pub fn negative_weight(&self) -> f64 {
        self.energies
            .iter()
            .zip(self.weights())
            .filter(|(e, _)| **e < 0.0)
            .map(|(_, w)| w)
            .sum()
    }

    /// Weighted mean of |E|.
    pub fn mean_abs_energy(&self) -> f64 {
        let w = self.weights();
        let total: f64 = w.iter().sum();
        self.energies.iter().zip(&w).map(|(e, w)| e.abs() * w).sum::<f64>() / total
    }

    /// Quantile of the |E|-folded distribution.
    pub fn folded_quantile(&self, p: f64) -> f64 {
        let mut pairs: Vec<(f64, f64)> = self
            .energies
            .iter()
            .zip(self.weights())
            .map(|(e, w)| (e.abs(), w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let mut acc = 0.0;
        for &(e, w) in &pairs {
            acc += w;
            if acc >= p * total {
                return e;
            }
        }
        pairs.last().map(|p| p.0).unwrap_or(0.0)
    }

    /// Width of the folded |E| band holding the central 98% of the weight.
    pub fn support_width(&self) -> f64 {
        self.folded_quantile(0.99) - self.folded_quantile(0.01)
    }
}

/// c(E) = Σ ψ(x) φ_E*(x) dx over the chosen region.
pub fn project_energy(
    psi: &ComplexField1D,
    basis: &EnergyBasis,
    region: ProjectionRegion,
) -> Result<SpectralCoefficients> {
    psi.grid.check_same(&basis.grid)?;
    let range = match region {
        ProjectionRegion::WholeGrid => 0..psi.grid.len(),
        ProjectionRegion::Active(half) => psi.grid.region_indices(half),
    };
    let dx = psi.grid.dx();
    let slice = &psi.values[range.clone()];
    let c = basis
        .states
        .par_iter()
        .map(|s| {
            let phi = &s.amplitudes.values[range.clone()];
            slice.iter().zip(phi).map(|(p, f)| p * f.conj()).sum::<Complex64>() * dx
        })
        .collect();
    Ok(SpectralCoefficients {
        energies: basis.energies.clone(),
        c,
        de: basis.de,
        region,
    })
}

/// ψ(x) = Σ c(E) φ_E(x) dE.
pub fn synthesize(coeffs: &SpectralCoefficients, basis: &EnergyBasis) -> Result<ComplexField1D> {
    if coeffs.c.len() != basis.len() {
        return Err(Error::GridMismatch(format!(
            "{} coefficients for a {}-state basis",
            coeffs.c.len(),
            basis.len()
        )));
    }
    let n = basis.grid.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    const CHUNK: usize = 256;
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
        let start = ci * CHUNK;
        for (s, &c) in basis.states.iter().zip(&coeffs.c) {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let cw = c * coeffs.de;
            let phi = &s.amplitudes.values[start..start + chunk.len()];
            for (o, f) in chunk.iter_mut().zip(phi) {
                *o += cw * f;
            }
        }
    });
    ComplexField1D::from_values(basis.grid, out)
}
