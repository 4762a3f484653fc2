use num_complex::Complex64;

use crate::{Error, Result};

/// Uniform grid over the electron coordinate, in nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::config(format!("grid needs at least 3 points, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::config(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// [-250, 250] nm with 2001 points (dx = 0.25 nm).
    pub fn default_device() -> Self {
        Self {
            x_min: -250.0,
            x_max: 250.0,
            n: 2001,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n).map(|i| self.x_min + i as f64 * dx).collect()
    }

    /// Fractional index of `x`; not clamped.
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x - self.x_min) / self.dx()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Indices whose points satisfy |x| <= half_width (with a small snapping tolerance).
    pub fn region_indices(&self, half_width: f64) -> std::ops::Range<usize> {
        let tol = 1e-9 * self.dx();
        let lo = ((-half_width - tol - self.x_min) / self.dx()).ceil().max(0.0) as usize;
        let hi = ((half_width + tol - self.x_min) / self.dx()).floor();
        let hi = if hi < 0.0 {
            0
        } else {
            (hi as usize + 1).min(self.n)
        };
        lo.min(hi)..hi
    }

    pub fn check_same(&self, other: &SpatialGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "[{}, {}]x{} vs [{}, {}]x{}",
                self.x_min, self.x_max, self.n, other.x_min, other.x_max, other.n
            )))
        }
    }

    /// Refined grid with the same bounds and `factor`·(n-1)+1 points.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            x_min: self.x_min,
            x_max: self.x_max,
            n: (self.n - 1) * factor.max(1) + 1,
        }
    }
}

/// Symmetric grid over the photon quadrature q ∈ [-q_max, q_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    q_max: f64,
    n: usize,
}

impl QuadratureGrid {
    pub fn new(q_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::config(format!("q grid needs at least 3 points, got {n}")));
        }
        if !(q_max > 0.0 && q_max.is_finite()) {
            return Err(Error::config("q grid half-width must be positive"));
        }
        Ok(Self { q_max, n })
    }

    /// ±`sigmas`·√(ħ/ω), the oscillator length being √(ħ/ω) for unit mass.
    pub fn for_oscillator(hbar: f64, omega: f64, sigmas: f64, n: usize) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::domain("photon angular frequency must be positive"));
        }
        Self::new(sigmas * (hbar / omega).sqrt(), n)
    }

    pub fn q_min(&self) -> f64 {
        -self.q_max
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dq(&self) -> f64 {
        2.0 * self.q_max / (self.n - 1) as f64
    }

    #[inline]
    pub fn q(&self, j: usize) -> f64 {
        -self.q_max + j as f64 * self.dq()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.q(j)).collect()
    }
}

/// Complex amplitudes on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField1D {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
}

impl ComplexField1D {
    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    /// Σ|ψ|² dx.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Trapezoidal ∫|ψ|² dx.
    pub fn norm_sqr_trapezoid(&self) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values.iter().map(|c| c.norm_sqr()).sum();
        (inner - 0.5 * (self.values[0].norm_sqr() + self.values[n - 1].norm_sqr())) * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.values.iter_mut().for_each(|c| *c *= inv);
        }
    }

    /// ⟨self|other⟩ = Σ self* · other dx.
    pub fn inner(&self, other: &ComplexField1D) -> Result<Complex64> {
        self.grid.check_same(&other.grid)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.dx())
    }

    /// ‖self − other‖ on the grid.
    pub fn l2_distance(&self, other: &ComplexField1D) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.grid.dx()).sqrt())
    }

    /// Distance minimised over a global phase: sqrt(‖a‖² + ‖b‖² − 2|⟨a|b⟩|).
    pub fn l2_distance_up_to_phase(&self, other: &ComplexField1D) -> Result<f64> {
        let overlap = self.inner(other)?.norm();
        Ok((self.norm_sqr() + other.norm_sqr() - 2.0 * overlap).max(0.0).sqrt())
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ⟨x⟩ over |ψ|².
    pub fn mean_position(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, c) in self.values.iter().enumerate() {
            let w = c.norm_sqr();
            num += w * self.grid.x(i);
            den += w;
        }
        num / den
    }

    /// Mean wavenumber Im∫ψ*∂ψ / ∫|ψ|² using central differences, in 1/nm.
    pub fn mean_wavenumber(&self) -> f64 {
        let dx = self.grid.dx();
        let n = self.values.len();
        let mut num = 0.0;
        for i in 1..n - 1 {
            let d = (self.values[i + 1] - self.values[i - 1]) / (2.0 * dx);
            num += (self.values[i].conj() * d).im;
        }
        let den: f64 = self.values.iter().map(|c| c.norm_sqr()).sum();
        num / den
    }
}
