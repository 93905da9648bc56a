use serde::{Deserialize, Serialize};

use super::SpectralError;

/// Default cap on the total number of grid points (`2^26`).
pub const DEFAULT_MAX_POINTS: usize = 1 << 26;

/// A uniform periodic grid on the torus `[-L/2, L/2)ⁿ` with `N` points per axis.
///
/// Point `j` on an axis sits at `x = (j − N/2)·L/N`, so the origin is the
/// grid point with every index equal to `N/2`. Flat indices are row-major
/// (last axis fastest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Grid {
    pub fn new(n: usize, size: usize, length: f64) -> Result<Self, SpectralError> {
        Self::with_budget(n, size, length, DEFAULT_MAX_POINTS)
    }

    pub fn with_budget(
        n: usize,
        size: usize,
        length: f64,
        max_points: usize,
    ) -> Result<Self, SpectralError> {
        if n == 0 {
            return Err(SpectralError::InvalidGrid("dimension must be positive".into()));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(SpectralError::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {size}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!("bad edge length {length}")));
        }
        let total = u32::try_from(n)
            .ok()
            .and_then(|e| size.checked_pow(e))
            .filter(|&t| t <= max_points)
            .ok_or_else(|| {
                SpectralError::InvalidGrid(format!(
                    "{size}^{n} points exceed the budget of {max_points}"
                ))
            })?;
        debug_assert!(total > 0);
        Ok(Self { n, size, length })
    }

    /// `2π`-periodic grid, the default torus.
    pub fn periodic(n: usize, size: usize) -> Result<Self, SpectralError> {
        Self::new(n, size, std::f64::consts::TAU)
    }

    pub fn points(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.size as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.n as i32)
    }

    /// Per-axis indices of a flat index.
    pub fn unflatten(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.n).rev() {
            out[a] = idx % self.size;
            idx /= self.size;
        }
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &j| acc * self.size + j)
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        (j as f64 - (self.size / 2) as f64) * self.spacing()
    }

    /// Physical coordinates of a flat index.
    pub fn position(&self, idx: usize, out: &mut [f64]) {
        let mut multi = vec![0; self.n];
        self.unflatten(idx, &mut multi);
        for (o, j) in out.iter_mut().zip(multi) {
            *o = self.coordinate(j);
        }
    }

    /// Angular wavenumber of FFT index `j` used for derivatives; the Nyquist
    /// index maps to zero so that odd derivatives of real fields stay real.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let half = self.size / 2;
        let k = if j < half {
            j as f64
        } else if j == half {
            0.0
        } else {
            j as f64 - self.size as f64
        };
        std::f64::consts::TAU * k / self.length
    }

    /// Angular wavenumber magnitude including the Nyquist index.
    pub fn wavenumber_abs(&self, j: usize) -> f64 {
        let jj = if j <= self.size / 2 { j } else { self.size - j };
        std::f64::consts::TAU * jj as f64 / self.length
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.size / 2
    }
}
