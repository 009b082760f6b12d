//! Structured grids on the cylinder `ℝ/ℤ × [y_min, y_max]` and sampled maps.

use serde::{Deserialize, Serialize};

use crate::jets::DomainPoint;
use crate::{Error, Result, Vec3};

/// `nx` columns at `x_i = i / nx` (the column `x = 1` is the seam and is not
/// stored) and `ny + 1` rows spanning `[y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub nx: usize,
    pub ny: usize,
    pub y_min: f64,
    pub y_max: f64,
}

impl SurfaceGrid {
    pub fn new(nx: usize, ny: usize, y_min: f64, y_max: f64) -> Result<Self> {
        if nx < 3 || ny < 1 {
            return Err(Error::InvalidConfig(format!("grid {nx}x{ny} is too small (need nx ≥ 3, ny ≥ 1)")));
        }
        if !(y_min < y_max) || !y_min.is_finite() || !y_max.is_finite() {
            return Err(Error::InvalidConfig(format!("empty y range [{y_min}, {y_max}]")));
        }
        Ok(SurfaceGrid { nx, ny, y_min, y_max })
    }

    pub fn rows(&self) -> usize {
        self.ny + 1
    }

    pub fn len(&self) -> usize {
        self.nx * self.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny {
            return self.y_max;
        }
        self.y_min + (self.y_max - self.y_min) * (j as f64 / self.ny as f64)
    }

    pub fn point(&self, i: usize, j: usize) -> DomainPoint {
        DomainPoint::new(self.x(i), self.y(j))
    }

    /// Row-major index of node `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.nx as f64
    }
}

/// A map sampled on a [`SurfaceGrid`], row-major, with optional partial
/// derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSample {
    pub grid: SurfaceGrid,
    pub values: Vec<Vec3>,
    pub d1: Option<Vec<Vec3>>,
    pub d2: Option<Vec<Vec3>>,
}

impl MapSample {
    pub fn value(&self, i: usize, j: usize) -> Vec3 {
        self.values[self.grid.index(i, j)]
    }

    /// Values of row `j`, closed up with the seam column.
    pub fn closed_row(&self, j: usize) -> impl Iterator<Item = Vec3> + '_ {
        let start = self.grid.index(0, j);
        self.values[start..start + self.grid.nx].iter().copied().chain(std::iter::once(self.values[start]))
    }

    /// Largest discrete second difference `‖f(x+h) - 2f(x) + f(x-h)‖ / h²`
    /// along `x`, periodic.
    pub fn max_second_difference_x(&self) -> f64 {
        let g = &self.grid;
        let h2 = g.dx() * g.dx();
        let mut worst: f64 = 0.0;
        for j in 0..g.rows() {
            for i in 0..g.nx {
                let prev = self.value((i + g.nx - 1) % g.nx, j);
                let next = self.value((i + 1) % g.nx, j);
                let d = (next - self.value(i, j) * 2.0 + prev).norm() / h2;
                worst = worst.max(d);
            }
        }
        worst
    }
}
