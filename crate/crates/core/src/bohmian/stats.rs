use crate::grid_potential::SpatialGrid;
use crate::{Error, Result};

/// Cumulative distribution of a density sampled on grid points, trapezoid rule,
/// normalised so the last entry is 1.
#[derive(Debug, Clone)]
pub struct GridCdf {
    x0: f64,
    dx: f64,
    cum: Vec<f64>,
}

impl GridCdf {
    pub fn new(density: &[f64], grid: &SpatialGrid) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} density samples for a {}-point grid",
                density.len(),
                grid.len()
            )));
        }
        if density.iter().any(|d| *d < 0.0 || !d.is_finite()) {
            return Err(Error::domain("density must be finite and non-negative"));
        }
        let mut cum = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * (w[0] + w[1]);
            cum.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::domain("density is zero everywhere"));
        }
        cum.iter_mut().for_each(|c| *c /= acc);
        Ok(Self {
            x0: grid.x_min(),
            dx: grid.dx(),
            cum,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let f = (x - self.x0) / self.dx;
        if f <= 0.0 {
            return 0.0;
        }
        let n = self.cum.len();
        if f >= (n - 1) as f64 {
            return 1.0;
        }
        let i = f.floor() as usize;
        let s = f - i as f64;
        self.cum[i] * (1.0 - s) + self.cum[i + 1] * s
    }

    /// Inverse of the piecewise-linear CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = self.cum.partition_point(|&c| c < u);
        if i == 0 {
            // first point with positive mass
            let j = self.cum.partition_point(|&c| c <= 0.0).saturating_sub(1);
            return self.x0 + j as f64 * self.dx;
        }
        let (lo, hi) = (self.cum[i - 1], self.cum[i]);
        let s = if hi > lo { (u - lo) / (hi - lo) } else { 0.0 };
        self.x0 + ((i - 1) as f64 + s) * self.dx
    }
}

/// Two-sided Kolmogorov-Smirnov distance between samples and a CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            ((k + 1) as f64 / n - f).max(f - k as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// KS critical value at 1% significance: 1.63/√W.
pub fn ks_critical_1pct(w: usize) -> f64 {
    1.63 / (w as f64).sqrt()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Carries positions across an instantaneous change of density:
/// X+ = F+⁻¹(F−(X−)), the order-preserving transport map in 1D.
pub fn quantile_map(xs: &[f64], before: &GridCdf, after: &GridCdf) -> Vec<f64> {
    xs.iter().map(|&x| after.quantile(before.cdf(x))).collect()
}
