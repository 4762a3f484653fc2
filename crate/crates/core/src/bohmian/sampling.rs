use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stats::GridCdf;
use crate::grid_potential::{QuadratureGrid, SpatialGrid};
use crate::{Error, Result};

/// Independent generator for experiment `j`: same seed, stream j.
pub fn experiment_rng(seed: u64, experiment: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(experiment as u64);
    rng
}

/// W positions distributed as `density` (inverse CDF).
pub fn sample_quantum_equilibrium(density: &[f64], grid: &SpatialGrid, w: usize, seed: u64) -> Result<Vec<f64>> {
    if w == 0 {
        return Err(Error::config("ensemble size must be at least 1"));
    }
    let cdf = GridCdf::new(density, grid)?;
    Ok((0..w)
        .map(|j| cdf.quantile(experiment_rng(seed, j).gen::<f64>()))
        .collect())
}

/// W points (x, q) from a joint density stored q-major (`density[j * n_x + i]`):
/// x from the marginal, then q from the conditional at the nearest x column.
pub fn sample_quantum_equilibrium_2d(
    density: &[f64],
    xgrid: &SpatialGrid,
    qgrid: &QuadratureGrid,
    w: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if w == 0 {
        return Err(Error::config("ensemble size must be at least 1"));
    }
    let (nx, nq) = (xgrid.len(), qgrid.len());
    if density.len() != nx * nq {
        return Err(Error::GridMismatch("joint density does not match the grids".into()));
    }
    let mut marginal = vec![0.0; nx];
    for row in density.chunks(nx) {
        for (m, d) in marginal.iter_mut().zip(row) {
            *m += d;
        }
    }
    let xcdf = GridCdf::new(&marginal, xgrid)?;
    let qline = qgrid.as_line();
    let mut out = Vec::with_capacity(w);
    for j in 0..w {
        let mut rng = experiment_rng(seed, j);
        let x = xcdf.quantile(rng.gen::<f64>());
        let i = (xgrid.fractional_index(x).round() as usize).min(nx - 1);
        let column: Vec<f64> = (0..nq).map(|k| density[k * nx + i]).collect();
        let q = match GridCdf::new(&column, &qline) {
            Ok(c) => c.quantile(rng.gen::<f64>()),
            // the marginal put x on a zero column edge; fall back to the neighbour
            Err(_) => {
                let i2 = if i + 1 < nx && marginal[i + 1] > 0.0 { i + 1 } else { i.saturating_sub(1) };
                let column: Vec<f64> = (0..nq).map(|k| density[k * nx + i2]).collect();
                GridCdf::new(&column, &qline)?.quantile(rng.gen::<f64>())
            }
        };
        out.push((x, q));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohmian::stats::{ks_critical_1pct, ks_statistic, pearson};

    #[test]
    fn uniform_density_passes_ks() {
        let grid = SpatialGrid::new(0.0, 1.0, 201).unwrap();
        let xs = sample_quantum_equilibrium(&vec![1.0; 201], &grid, 2000, 7).unwrap();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d < ks_critical_1pct(2000), "{d}");
    }

    #[test]
    fn deterministic_for_a_seed() {
        let grid = SpatialGrid::new(0.0, 1.0, 11).unwrap();
        let a = sample_quantum_equilibrium(&[1.0; 11], &grid, 50, 3).unwrap();
        let b = sample_quantum_equilibrium(&[1.0; 11], &grid, 50, 3).unwrap();
        let c = sample_quantum_equilibrium(&[1.0; 11], &grid, 50, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn product_density_is_uncorrelated() {
        let xg = SpatialGrid::new(-5.0, 5.0, 101).unwrap();
        let qg = QuadratureGrid::new(4.0, 81).unwrap();
        let mut d = vec![0.0; 101 * 81];
        for k in 0..81 {
            for i in 0..101 {
                d[k * 101 + i] = (-xg.x(i).powi(2)).exp() * (-2.0 * qg.q(k).powi(2)).exp();
            }
        }
        let w = 2000;
        let pts = sample_quantum_equilibrium_2d(&d, &xg, &qg, w, 11).unwrap();
        let (x, q): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        assert!(pearson(&x, &q).abs() < 3.0 / (w as f64).sqrt());
    }
}
