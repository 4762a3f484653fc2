use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::grid_potential::{ComplexField1D, PhysicalConstants, PotentialProfile, SpatialGrid};
use crate::{Error, Result};

/// Lowest eigenpairs of the 3-point finite-difference Hamiltonian with hard
/// walls just outside the box. `half_width` restricts the box to |x| <= half_width;
/// `None` uses the whole grid. Fields are unit-norm on the box grid.
pub fn box_eigenstates(
    v: &PotentialProfile,
    constants: &PhysicalConstants,
    n_levels: usize,
    half_width: Option<f64>,
) -> Result<Vec<(f64, ComplexField1D)>> {
    let range = match half_width {
        Some(h) => v.grid.region_indices(h),
        None => 0..v.grid.len(),
    };
    let n = range.len();
    if n < 3 {
        return Err(Error::config("eigen box needs at least 3 grid points"));
    }
    if n_levels == 0 || n_levels > n {
        return Err(Error::domain(format!("requested {n_levels} levels from a {n}-point box")));
    }
    let dx = v.grid.dx();
    let a = constants.kinetic_prefactor() / (dx * dx);
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (r, i) in range.clone().enumerate() {
        h[(r, r)] = 2.0 * a + v.values[i];
        if r + 1 < n {
            h[(r, r + 1)] = -a;
            h[(r + 1, r)] = -a;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let sub = SpatialGrid::new(v.grid.x(range.start), v.grid.x(range.end - 1), n)?;
    order
        .into_iter()
        .take(n_levels)
        .map(|col| {
            let vec = eig.eigenvectors.column(col);
            // fix the sign so the first significant sample is positive
            let sign = vec
                .iter()
                .find(|x| x.abs() > 1e-8)
                .map(|x| x.signum())
                .unwrap_or(1.0);
            let s = sign / dx.sqrt();
            let vals = vec.iter().map(|&x| Complex64::new(x * s, 0.0)).collect();
            Ok((eig.eigenvalues[col], ComplexField1D::from_values(sub, vals)?))
        })
        .collect()
}
