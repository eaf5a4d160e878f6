//! Principal eigenpairs of the discrete operators and the derivative of
//! s ↦ λ_{1,s} at s = 0.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::assembly::OperatorSet;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::numerics::extrapolate_to_zero;

pub const EIGEN_TOL: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_EIGEN_ITERS: usize = 10_000;

/// First eigenvalue and L²-normalized eigenfunction with positive mean.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub phi: GridFunction,
    /// ‖Aφ − λMφ‖₂.
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest eigenvalue of A φ = λ M φ for a diagonal mass M, by shifted inverse iteration.
pub fn principal_eigenpair(grid: &Arc<Grid>, a: &DMatrix<f64>, mass: &DVector<f64>) -> Result<EigenPair> {
    let n = grid.n_cells;
    if a.nrows() != n || a.ncols() != n || mass.len() != n {
        return Err(Error::Dimension(format!("operator of size {}x{} on {n} cells", a.nrows(), a.ncols())));
    }
    if mass.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::Spectral("mass must be positive".into()));
    }
    let inv_sqrt = mass.map(|m| 1.0 / m.sqrt());
    let b = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let mut lower = f64::INFINITY;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| b[(i, j)].abs()).sum();
        lower = lower.min(b[(i, i)] - off);
        scale = scale.max(b[(i, i)].abs() + off);
    }
    let shift = lower - 1e-3 * (1.0 + scale);
    let mut shifted = b.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let chol = shifted
        .cholesky()
        .ok_or_else(|| Error::Spectral("shifted operator is not positive definite; the matrix is not symmetric".into()))?;

    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = x.dot(&(&b * &x));
    let mut last_change = f64::INFINITY;
    let mut reduced_residual = f64::INFINITY;
    for it in 1..=MAX_EIGEN_ITERS {
        let mut y = chol.solve(&x);
        let norm = y.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Spectral(format!("inverse iteration broke down at step {it}")));
        }
        y /= norm;
        let by = &b * &y;
        let next = y.dot(&by);
        last_change = (next - lambda).abs();
        lambda = next;
        reduced_residual = (&by - &y * lambda).norm();
        x = y;
        if last_change <= EIGEN_TOL * (1.0 + lambda.abs()) && reduced_residual <= RESIDUAL_TOL * (1.0 + lambda.abs()) {
            return Ok(finish(grid, a, mass, &inv_sqrt, x, lambda, it));
        }
    }
    Err(Error::Spectral(format!(
        "no convergence after {MAX_EIGEN_ITERS} iterations: last eigenvalue change {last_change:e}, residual {reduced_residual:e}"
    )))
}

fn finish(
    grid: &Arc<Grid>,
    a: &DMatrix<f64>,
    mass: &DVector<f64>,
    inv_sqrt: &DVector<f64>,
    x: DVector<f64>,
    lambda: f64,
    iterations: usize,
) -> EigenPair {
    let mut phi = x.component_mul(inv_sqrt);
    if phi.sum() < 0.0 {
        phi = -phi;
    }
    let residual = (a * &phi - mass.component_mul(&phi) * lambda).norm();
    EigenPair { lambda, phi: GridFunction { grid: grid.clone(), values: phi }, residual, iterations }
}

impl OperatorSet {
    pub fn log_eigenpair(&self) -> Result<EigenPair> {
        principal_eigenpair(&self.grid, &self.a_log, &self.mass)
    }

    pub fn frac_eigenpair(&self, s: f64) -> Result<EigenPair> {
        principal_eigenpair(&self.grid, &self.frac(s)?.matrix, &self.mass)
    }

    /// Best constant of ‖u‖² ≤ S⁻¹ ℰ(u,u) on the grid.
    pub fn near_form_ground_state(&self) -> Result<EigenPair> {
        principal_eigenpair(&self.grid, &self.e_near, &self.mass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientRow {
    pub s: f64,
    pub lambda_s: f64,
    /// (λ_{1,s} − 1)/s.
    pub quotient: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenDerivative {
    pub rows: Vec<QuotientRow>,
    /// Polynomial extrapolation of the quotients to s = 0.
    pub limit: f64,
    /// Quotients are not monotone in s beyond round-off.
    pub non_monotone: bool,
}

/// Extrapolates (λ_{1,s} − 1)/s to s = 0 from principal eigenvalues at a decreasing schedule.
pub fn eigen_derivative_from(schedule: &[f64], lambdas: &[f64]) -> Result<EigenDerivative> {
    if schedule.len() < 3 {
        return Err(Error::Precondition("the schedule needs at least three orders".into()));
    }
    if schedule.len() != lambdas.len() {
        return Err(Error::Dimension("one eigenvalue per order is required".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) || schedule.iter().any(|s| !(*s > 0.0 && *s < 0.25)) {
        return Err(Error::Precondition("orders must decrease strictly inside (0, 1/4)".into()));
    }
    let rows: Vec<QuotientRow> = schedule
        .iter()
        .zip(lambdas)
        .map(|(&s, &lambda_s)| QuotientRow { s, lambda_s, quotient: (lambda_s - 1.0) / s })
        .collect();
    let q: Vec<f64> = rows.iter().map(|r| r.quotient).collect();
    let limit = extrapolate_to_zero(schedule, &q)?;
    let diffs: Vec<f64> = q.windows(2).map(|w| w[1] - w[0]).collect();
    let tol = 1e-10 * (1.0 + q.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let up = diffs.iter().any(|d| *d > tol);
    let down = diffs.iter().any(|d| *d < -tol);
    Ok(EigenDerivative { rows, limit, non_monotone: up && down })
}

pub fn eigen_derivative_at_zero(ops: &OperatorSet, schedule: &[f64]) -> Result<EigenDerivative> {
    let lambdas = schedule.iter().map(|&s| ops.frac_eigenpair(s).map(|e| e.lambda)).collect::<Result<Vec<_>>>()?;
    eigen_derivative_from(schedule, &lambdas)
}
