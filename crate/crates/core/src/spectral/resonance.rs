use rayon::prelude::*;

use super::scattering_state::{solve_scattering_state, Injection};
use crate::grid_potential::{PhysicalConstants, PotentialProfile};
use crate::{Error, Result};

/// Minimum topographic prominence of a T(E) peak to count as a resonance.
const MIN_PROMINENCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub energy: f64,
    pub transmission: f64,
    pub reflection: f64,
}

pub fn transmission_spectrum(
    v: &PotentialProfile,
    constants: &PhysicalConstants,
    energies: &[f64],
) -> Result<Vec<SpectrumPoint>> {
    energies
        .par_iter()
        .map(|&e| {
            let s = solve_scattering_state(v, constants, e, Injection::FromLeft)?;
            Ok(SpectrumPoint {
                energy: e,
                transmission: s.transmission,
                reflection: s.reflection,
            })
        })
        .collect()
}

pub fn uniform_energies(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn transmission(v: &PotentialProfile, k: &PhysicalConstants, e: f64) -> Result<f64> {
    Ok(solve_scattering_state(v, k, e, Injection::FromLeft)?.transmission)
}

fn prominence(t: &[f64], i: usize) -> f64 {
    let peak = t[i];
    let mut left_min = peak;
    for &x in t[..i].iter().rev() {
        if x > peak {
            break;
        }
        left_min = left_min.min(x);
    }
    let mut right_min = peak;
    for &x in &t[i + 1..] {
        if x > peak {
            break;
        }
        right_min = right_min.min(x);
    }
    peak - left_min.max(right_min)
}

/// Local maxima of T(E) in (lo, hi), refined by bisection on the sign of dT/dE.
pub fn resonance_search(
    v: &PotentialProfile,
    constants: &PhysicalConstants,
    window: (f64, f64),
    tolerance: f64,
) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    let lo = lo.max(1e-4);
    if !(hi > lo && tolerance > 0.0) {
        return Err(Error::config(format!("invalid resonance window ({lo}, {hi})")));
    }
    let step = (0.5e-3f64).min((hi - lo) / 200.0);
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let es = uniform_energies(lo, hi, n);
    let ts: Vec<f64> = transmission_spectrum(v, constants, &es)?
        .into_iter()
        .map(|p| p.transmission)
        .collect();

    let slope = |e: f64| -> Result<f64> {
        let h = (tolerance * 1e-2).max(1e-9);
        Ok(transmission(v, constants, e + h)? - transmission(v, constants, e - h)?)
    };

    let candidates: Vec<usize> = (1..n - 1)
        .filter(|&i| ts[i] > ts[i - 1] && ts[i] >= ts[i + 1] && prominence(&ts, i) >= MIN_PROMINENCE)
        .collect();
    candidates
        .par_iter()
        .map(|&i| {
            let (mut a, mut b) = (es[i - 1], es[i + 1]);
            while b - a > tolerance {
                let mid = 0.5 * (a + b);
                if slope(mid)? > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_potential::{build_double_barrier, SpatialGrid};

    #[test]
    fn flat_potential_has_unit_transmission_and_no_resonances() {
        let v = PotentialProfile::flat(SpatialGrid::default_device(), 0.0).unwrap();
        let k = PhysicalConstants::default();
        let spec = transmission_spectrum(&v, &k, &uniform_energies(0.01, 1.0, 50)).unwrap();
        assert!(spec.iter().all(|p| (p.transmission - 1.0).abs() < 1e-10));
        assert!(resonance_search(&v, &k, (0.0, 0.4), 1e-4).unwrap().is_empty());
    }

    #[test]
    fn rtd_has_two_resonances_below_the_barrier() {
        let v = build_double_barrier(SpatialGrid::default_device(), 10.0, 2.0, 0.5).unwrap();
        let k = PhysicalConstants::default();
        let r = resonance_search(&v, &k, (0.0, 0.4), 1e-4).unwrap();
        assert_eq!(r.len(), 2, "{r:?}");
        assert!((r[0] - 0.058).abs() < 0.006);
        assert!((r[1] - 0.23).abs() < 0.02);
    }
}
