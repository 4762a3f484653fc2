use super::grid::SpatialGrid;
use crate::{Error, Result};

/// Minimum flat lead kept between the device and each grid edge, in nm.
pub const MIN_LEAD_NM: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Flat {
        level: f64,
    },
    DoubleBarrier {
        well_width: f64,
        barrier_thickness: f64,
        barrier_height: f64,
    },
    Custom,
}

/// Conduction-band profile V(x) in eV sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    pub grid: SpatialGrid,
    pub values: Vec<f64>,
    pub kind: PotentialKind,
}

impl PotentialProfile {
    pub fn flat(grid: SpatialGrid, level: f64) -> Result<Self> {
        if !level.is_finite() {
            return Err(Error::config("flat potential level must be finite"));
        }
        Ok(Self {
            grid,
            values: vec![level; grid.len()],
            kind: PotentialKind::Flat { level },
        })
    }

    pub fn custom(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} potential samples for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(format!("potential is not finite at x = {}", grid.x(i))));
        }
        Ok(Self {
            grid,
            values,
            kind: PotentialKind::Custom,
        })
    }

    /// Single rectangular barrier `[center - t/2, center + t/2)`; used for tests and custom runs.
    pub fn single_barrier(grid: SpatialGrid, center: f64, thickness: f64, height: f64) -> Result<Self> {
        let tol = 1e-9 * grid.dx();
        let (lo, hi) = (center - 0.5 * thickness, center + 0.5 * thickness);
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.x(i);
                if x >= lo - tol && x < hi - tol {
                    height
                } else {
                    0.0
                }
            })
            .collect();
        Self::custom(grid, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Half-width L_x of the active (barrier) region, when the geometry defines one.
    pub fn active_half_width(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::DoubleBarrier {
                well_width,
                barrier_thickness,
                ..
            } => Some(0.5 * well_width + barrier_thickness),
            _ => None,
        }
    }

    /// Σ V dx.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    /// Lead levels (left, right), or an error if either end is not flat.
    pub fn lead_levels(&self) -> Result<(f64, f64)> {
        let n = self.values.len();
        let flat = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs());
        if !flat(self.values[0], self.values[1]) || !flat(self.values[n - 1], self.values[n - 2]) {
            return Err(Error::config("potential is not flat in the leads"));
        }
        Ok((self.values[0], self.values[n - 1]))
    }
}

/// Symmetric double barrier centred at x = 0: barrier cells satisfy
/// `w/2 <= |x| < w/2 + b`, so each barrier spans exactly `b/dx` cells when the
/// edges sit on grid points.
pub fn build_double_barrier(
    grid: SpatialGrid,
    well_width: f64,
    barrier_thickness: f64,
    barrier_height: f64,
) -> Result<PotentialProfile> {
    if !(well_width > 0.0 && barrier_thickness > 0.0) {
        return Err(Error::config("well width and barrier thickness must be positive"));
    }
    if !barrier_height.is_finite() {
        return Err(Error::config("barrier height must be finite"));
    }
    let outer = 0.5 * well_width + barrier_thickness;
    if -outer - MIN_LEAD_NM < grid.x_min() || outer + MIN_LEAD_NM > grid.x_max() {
        return Err(Error::config(format!(
            "double barrier of half-width {outer} nm leaves less than {MIN_LEAD_NM} nm of lead inside [{}, {}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let inner = 0.5 * well_width;
    let tol = 1e-9 * grid.dx();
    let values = (0..grid.len())
        .map(|i| {
            let ax = grid.x(i).abs();
            if ax >= inner - tol && ax < outer - tol {
                barrier_height
            } else {
                0.0
            }
        })
        .collect();
    Ok(PotentialProfile {
        grid,
        values,
        kind: PotentialKind::DoubleBarrier {
            well_width,
            barrier_thickness,
            barrier_height,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rtd_area_is_two_rectangles() {
        let grid = SpatialGrid::default_device();
        let v = build_double_barrier(grid, 10.0, 2.0, 0.5).unwrap();
        assert!((v.integral() - 2.0 * 2.0 * 0.5).abs() < 1e-12);
        assert_eq!(v.values.iter().filter(|&&e| e > 0.0).count(), 16);
        assert_eq!(v.active_half_width(), Some(7.0));
    }

    #[test]
    fn rtd_is_mirror_symmetric() {
        let grid = SpatialGrid::default_device();
        let v = build_double_barrier(grid, 10.0, 2.0, 0.5).unwrap();
        let n = v.len();
        for i in 0..n {
            // the half-open rule is symmetric on a grid with a point at 0
            assert_eq!(v.values[i], v.values[n - 1 - i], "at x = {}", grid.x(i));
        }
    }

    #[test]
    fn zero_height_is_flat_zero() {
        let grid = SpatialGrid::default_device();
        let v = build_double_barrier(grid, 10.0, 2.0, 0.0).unwrap();
        assert!(v.values.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn geometry_exceeding_grid_is_rejected() {
        let grid = SpatialGrid::new(-20.0, 20.0, 161).unwrap();
        assert!(matches!(
            build_double_barrier(grid, 10.0, 2.0, 0.5),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn leads_must_be_flat() {
        let grid = SpatialGrid::new(-10.0, 10.0, 21).unwrap();
        let mut vals = vec![0.0; 21];
        vals[0] = 0.1;
        let v = PotentialProfile::custom(grid, vals).unwrap();
        assert!(v.lead_levels().is_err());
    }
}
