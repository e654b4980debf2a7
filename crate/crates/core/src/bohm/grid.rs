//! Uniform periodic 1-D spatial grid shared by both configuration axes.

use crate::error::Error;
use crate::Result;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float; // float methods for no_std builds

/// Smallest grid the continuum analyses accept.
pub const MIN_GRID_POINTS: usize = 16;

/// A uniform grid of `n` points on `[x_min, x_max)`; the right endpoint is
/// excluded because the spectral evolution treats the domain as periodic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    x_min: f64,
    x_max: f64,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::BadGrid(alloc::format!(
                "domain [{x_min}, {x_max}) is not a finite, positive-length interval"
            )));
        }
        if n < MIN_GRID_POINTS {
            return Err(Error::BadGrid(alloc::format!(
                "{n} points is below the minimum of {MIN_GRID_POINTS}"
            )));
        }
        if !n.is_power_of_two() {
            return Err(Error::GridNotPowerOfTwo { len: n });
        }
        let dx = (x_max - x_min) / n as f64;
        Ok(Grid1D { n, x_min, x_max, dx })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Domain length.
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Coordinate of grid point `j`.
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    /// All grid point coordinates.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumber of FFT bin `j` (negative frequencies in the upper
    /// half).
    pub fn wavenumber(&self, j: usize) -> f64 {
        let f = if j < self.n / 2 {
            j as f64
        } else {
            j as f64 - self.n as f64
        };
        2.0 * core::f64::consts::PI * f / self.length()
    }

    /// Whether `x` lies inside the periodic fundamental domain.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x < self.x_max
    }

    /// Fractional grid index of a position (0 at `x_min`, `n` at `x_max`).
    pub fn frac_index(&self, x: f64) -> f64 {
        (x - self.x_min) / self.dx
    }

    /// Linear interpolation weights for a position: the base index, its
    /// periodic successor, and the fraction assigned to the successor.
    pub fn interp(&self, x: f64) -> (usize, usize, f64) {
        let f = self.frac_index(x);
        let j = f.floor() as isize;
        let t = f - j as f64;
        let n = self.n as isize;
        let a = j.rem_euclid(n) as usize;
        let b = (j + 1).rem_euclid(n) as usize;
        (a, b, t)
    }
}
