//! Intervals, uniform cell grids and piecewise-constant grid functions.

use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || left >= right {
            return Err(Error::Config(format!("invalid interval ({left}, {right})")));
        }
        Ok(Self { left, right })
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn diameter(&self) -> f64 {
        self.length()
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.left && x < self.right
    }
}

/// Uniform partition of an interval into `n_cells` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub interval: Interval,
    pub n_cells: usize,
    pub h: f64,
    pub centers: Vec<f64>,
}

pub fn build_grid(interval: Interval, n_cells: usize) -> Result<Arc<Grid>> {
    if n_cells < 2 {
        return Err(Error::Config(format!("a grid needs at least 2 cells, got {n_cells}")));
    }
    let h = interval.length() / n_cells as f64;
    let centers = (0..n_cells).map(|i| interval.left + (i as f64 + 0.5) * h).collect();
    Ok(Arc::new(Grid { interval, n_cells, h, centers }))
}

impl Grid {
    pub fn cell(&self, i: usize) -> Interval {
        let a = self.interval.left + i as f64 * self.h;
        let b = if i + 1 == self.n_cells { self.interval.right } else { a + self.h };
        Interval { left: a, right: b }
    }

    /// Distance of every cell center to the boundary.
    pub fn boundary_distances(&self) -> Vec<f64> {
        self.centers
            .iter()
            .map(|&x| (x - self.interval.left).min(self.interval.right - x))
            .collect()
    }
}

/// Distance from x to the complement of the interval, x inside.
pub fn boundary_distance(grid: &Grid, x: f64) -> Result<f64> {
    if !grid.interval.contains(x) {
        return Err(Error::Domain(format!("{x} lies outside the domain")));
    }
    Ok((x - grid.interval.left).min(grid.interval.right - x))
}

/// Boundary gauge ℓ(r) = −1/ln(min(r, 0.1)) for r > 0.
pub fn ell_gauge(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("ell gauge needs r > 0, got {r}")));
    }
    Ok(-1.0 / r.min(0.1).ln())
}

/// Piecewise-constant function on a grid, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: DVector<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: DVector<f64>) -> Result<Self> {
        if values.len() != grid.n_cells {
            return Err(Error::Dimension(format!("{} values for {} cells", values.len(), grid.n_cells)));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.n_cells;
        Self { grid, values: DVector::zeros(n) }
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = DVector::from_iterator(grid.n_cells, grid.centers.iter().map(|&x| f(x)));
        Self { grid, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::Dimension("grid functions live on different grids".into()))
        }
    }

    pub fn with_values(&self, values: DVector<f64>) -> Self {
        Self { grid: self.grid.clone(), values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.map(f))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.with_values(&self.values * c)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn integral(&self) -> f64 {
        self.h() * self.values.sum()
    }

    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.h() * self.values.dot(&other.values))
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.h() * self.values.norm_squared()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("L^q norm needs q >= 1, got {q}")));
        }
        if q.is_infinite() {
            return Ok(self.linf_norm());
        }
        let m = self.linf_norm();
        if m == 0.0 {
            return Ok(0.0);
        }
        let s: f64 = self.values.iter().map(|v| (v.abs() / m).powf(q)).sum();
        Ok(m * (self.h() * s).powf(1.0 / q))
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Flips the sign so that the integral is non-negative.
    pub fn sign_normalized(&self) -> Self {
        if self.values.sum() < 0.0 {
            self.scale(-1.0)
        } else {
            self.clone()
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (x, v) in self.grid.centers.iter().zip(self.values.iter()) {
            writeln!(w, "{x:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    /// Reads a CSV written by [`GridFunction::write_csv`] onto `grid`.
    pub fn read_csv<R: BufRead>(grid: Arc<Grid>, r: R) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_cells);
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                if line.trim() != "x,value" {
                    return Err(Error::Io(format!("unexpected header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (_, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Io(format!("line {}: expected two columns", lineno + 1)))?;
            let v: f64 = v.trim().parse().map_err(|e| Error::Io(format!("line {}: {e}", lineno + 1)))?;
            values.push(v);
        }
        GridFunction::new(grid, DVector::from_vec(values))
    }
}

/// Smooth compactly supported bump on the interval, equal to 1 at the midpoint.
pub fn bump_profile(interval: &Interval, x: f64) -> f64 {
    let xi = (2.0 * x - interval.left - interval.right) / interval.length();
    if xi.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - xi * xi)).exp()
    }
}

/// cos(π ξ / 2) where ξ ∈ (−1, 1) is the normalized position.
pub fn cosine_profile(interval: &Interval, x: f64) -> f64 {
    let xi = (2.0 * x - interval.left - interval.right) / interval.length();
    (std::f64::consts::FRAC_PI_2 * xi).cos().max(0.0)
}
