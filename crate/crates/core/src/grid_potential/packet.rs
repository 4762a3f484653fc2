use num_complex::Complex64;

use super::grid::{ComplexField1D, SpatialGrid};
use super::potential::PotentialProfile;
use super::units::PhysicalConstants;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::LeftToRight => 1.0,
            Direction::RightToLeft => -1.0,
        }
    }
}

/// Gaussian packet exp(−(x−x0)²/(4σ²))·exp(i k0 x) with k0 = ±√(2m*E)/ħ.
///
/// `device`, when given, must leave 3σ between the packet centre and its
/// active region. The returned field has unit norm on the grid.
pub fn build_gaussian_packet(
    grid: SpatialGrid,
    constants: &PhysicalConstants,
    x0: f64,
    sigma_x: f64,
    energy: f64,
    direction: Direction,
    device: Option<&PotentialProfile>,
) -> Result<ComplexField1D> {
    if !(sigma_x > 0.0) {
        return Err(Error::config("packet width must be positive"));
    }
    if energy < 0.0 {
        return Err(Error::config("packet central energy must be non-negative"));
    }
    let margin = 3.0 * sigma_x;
    if x0 - margin < grid.x_min() || x0 + margin > grid.x_max() {
        return Err(Error::config(format!(
            "packet at {x0} nm with sigma {sigma_x} nm overlaps the grid boundary"
        )));
    }
    if let Some(half) = device.and_then(|v| v.active_half_width()) {
        if x0.abs() - margin < half {
            return Err(Error::config(format!(
                "packet at {x0} nm with sigma {sigma_x} nm overlaps the barrier region |x| < {half} nm"
            )));
        }
    }
    let k0 = direction.sign() * constants.wavenumber(energy);
    let inv4s2 = 1.0 / (4.0 * sigma_x * sigma_x);
    let mut field = ComplexField1D::from_fn(grid, |x| {
        let env = (-(x - x0) * (x - x0) * inv4s2).exp();
        Complex64::from_polar(env, k0 * x)
    });
    field.normalize();
    Ok(field)
}
