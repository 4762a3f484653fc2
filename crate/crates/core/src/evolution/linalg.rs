//! Direct solvers for the implicit half of Crank-Nicolson.

use num_complex::Complex64;

use crate::{Error, Result};

/// Pre-factored tridiagonal system with constant off-diagonals `off` and
/// per-row diagonal `diag` (Thomas algorithm).
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    off: Complex64,
    c_prime: Vec<Complex64>,
    inv_den: Vec<Complex64>,
}

impl Tridiagonal {
    pub fn factor(diag: &[Complex64], off: Complex64) -> Result<Self> {
        let n = diag.len();
        let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_den = vec![Complex64::new(0.0, 0.0); n];
        let mut prev_c = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let den = diag[i] - off * prev_c;
            if den.norm() < 1e-300 {
                return Err(Error::Internal(format!("singular tridiagonal pivot at row {i}")));
            }
            let inv = den.inv();
            inv_den[i] = inv;
            prev_c = off * inv;
            c_prime[i] = prev_c;
        }
        Ok(Self {
            off,
            c_prime,
            inv_den,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_den.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_den.is_empty()
    }

    /// Solves in place.
    pub fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let d = (rhs[i] - self.off * prev) * self.inv_den[i];
            rhs[i] = d;
            prev = d;
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.c_prime[i] * next;
        }
    }
}

/// LU factors of a banded matrix with `p` sub- and super-diagonals, no pivoting.
/// Storage is row-major with 2p+1 entries per row, column offset j - i + p.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    p: usize,
    lu: Vec<Complex64>,
}

impl BandedLu {
    pub fn factor(n: usize, p: usize, mut band: Vec<Complex64>) -> Result<Self> {
        let w = 2 * p + 1;
        if band.len() != n * w {
            return Err(Error::Internal("band storage has the wrong size".into()));
        }
        for k in 0..n {
            let pivot = band[k * w + p];
            if pivot.norm() < 1e-300 {
                return Err(Error::Internal(format!("singular banded pivot at row {k}")));
            }
            let inv = pivot.inv();
            for i in k + 1..(k + p + 1).min(n) {
                let idx_ik = i * w + (k + p - i);
                let l = band[idx_ik] * inv;
                band[idx_ik] = l;
                for j in k + 1..(k + p + 1).min(n) {
                    let kj = band[k * w + (j + p - k)];
                    band[i * w + (j + p - i)] -= l * kj;
                }
            }
        }
        Ok(Self { n, p, lu: band })
    }

    pub fn solve(&self, rhs: &mut [Complex64]) {
        let (n, p) = (self.n, self.p);
        let w = 2 * p + 1;
        for i in 0..n {
            let mut s = rhs[i];
            for k in i.saturating_sub(p)..i {
                s -= self.lu[i * w + (k + p - i)] * rhs[k];
            }
            rhs[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in i + 1..(i + p + 1).min(n) {
                s -= self.lu[i * w + (j + p - i)] * rhs[j];
            }
            rhs[i] = s / self.lu[i * w + p];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn thomas_matches_dense_product() {
        let n = 7;
        let diag: Vec<_> = (0..n).map(|i| c(3.0 + i as f64, 0.5)).collect();
        let off = c(-1.0, 0.2);
        let x: Vec<_> = (0..n).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let mut b: Vec<_> = (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += off * x[i - 1];
                }
                if i + 1 < n {
                    s += off * x[i + 1];
                }
                s
            })
            .collect();
        Tridiagonal::factor(&diag, off).unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn banded_matches_dense_product() {
        let (n, p) = (12, 3);
        let w = 2 * p + 1;
        let mut band = vec![c(0.0, 0.0); n * w];
        for i in 0..n {
            for j in i.saturating_sub(p)..(i + p + 1).min(n) {
                let d = (i as f64 - j as f64).abs();
                band[i * w + (j + p - i)] = if i == j { c(1.0, 4.0) } else { c(0.0, -0.5 / (1.0 + d)) };
            }
        }
        let x: Vec<_> = (0..n).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        let mut b = vec![c(0.0, 0.0); n];
        for i in 0..n {
            for j in i.saturating_sub(p)..(i + p + 1).min(n) {
                b[i] += band[i * w + (j + p - i)] * x[j];
            }
        }
        BandedLu::factor(n, p, band).unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}
