//! Exact Galerkin assembly of the nonlocal forms on piecewise-constant spaces.
//!
//! Every pairwise cell integral of the kernels 1/|z| and |z|^{-1-2s} is a
//! second difference of an explicit antiderivative. On a uniform grid the
//! entries only depend on the offset between cells, and far offsets are
//! evaluated with an asymptotic series to avoid cancellation.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Interval};
use crate::numerics::{dimensional_constants, frac_normalization, DimensionalConstants};

/// Radius separating the near kernel 1_{|z|≤1}/|z| from the far kernel.
pub const CUTOFF: f64 = 1.0;

/// Fractional orders must stay strictly below this bound.
pub const MAX_ORDER: f64 = 0.25;

const SERIES_FROM: usize = 4;

fn xlnx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

/// Second antiderivative of 1_{t≤T}/t, vanishing at 0.
fn phi_log(t: f64, cutoff: Option<f64>) -> f64 {
    match cutoff {
        None => xlnx(t) - t,
        Some(c) => {
            let m = t.min(c);
            if t == 0.0 {
                0.0
            } else {
                t * m.ln() - m
            }
        }
    }
}

/// ∫_{I}∫_{J} k(|x − y|) dx dy for the kernel 1/|z| (optionally restricted to |z| ≤ cutoff).
///
/// Identical cells give 0 because the diagonal is handled by the row-sum identity.
pub fn pairwise_log_integral(cell_a: Interval, cell_b: Interval, cutoff: Option<f64>) -> Result<f64> {
    if let Some(c) = cutoff {
        if !(c > 0.0) {
            return Err(Error::Assembly(format!("cutoff must be positive, got {c}")));
        }
    }
    if cell_a == cell_b {
        return Ok(0.0);
    }
    let (p, q) = if cell_a.left <= cell_b.left { (cell_a, cell_b) } else { (cell_b, cell_a) };
    if p.right > q.left {
        return Err(Error::Assembly("cells overlap without being identical".into()));
    }
    let (a, b, c, d) = (p.left, p.right, q.left, q.right);
    let f = |t: f64| phi_log(t, cutoff);
    Ok(f(d - a) - f(d - b) - f(c - a) + f(c - b))
}

/// Normalized second difference m^{α-2}-like series of t^α/(α(α−1)) at offset m ≥ SERIES_FROM.
fn second_difference_series(m: usize, alpha: f64) -> f64 {
    let mf = m as f64;
    let x2 = 1.0 / (mf * mf);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 2..80 {
        let kf = k as f64;
        term *= (alpha - 2.0 * kf + 2.0) * (alpha - 2.0 * kf + 1.0) / ((2.0 * kf) * (2.0 * kf - 1.0)) * x2;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    mf.powf(alpha - 2.0) * sum
}

/// Unit-width cell interaction of the kernel 1/|z| at offset m ≥ 1.
pub fn log_offset_unit(m: usize) -> f64 {
    assert!(m >= 1);
    if m >= SERIES_FROM {
        return second_difference_series(m, 1.0);
    }
    let mf = m as f64;
    xlnx(mf + 1.0) - 2.0 * xlnx(mf) + xlnx(mf - 1.0)
}

/// Unit-width cell interaction of the kernel |z|^{-1-2s} at offset m ≥ 1.
pub fn frac_offset_unit(m: usize, s: f64) -> f64 {
    assert!(m >= 1);
    let alpha = 1.0 - 2.0 * s;
    if m >= SERIES_FROM {
        return second_difference_series(m, alpha);
    }
    // t^α = t + t·expm1(−2s ln t); the linear parts cancel in the second difference.
    let g = |t: f64| if t <= 1.0 { 0.0 } else { t * (-2.0 * s * t.ln()).exp_m1() };
    let mf = m as f64;
    (g(mf + 1.0) - 2.0 * g(mf) + g(mf - 1.0)) / (-2.0 * s * alpha)
}

/// Far-kernel part of the interaction of two width-h cells at offset m.
pub fn far_offset(m: usize, h: f64) -> f64 {
    let t = CUTOFF;
    if m == 0 {
        return if h > t { 2.0 * (h * (h / t).ln() - (h - t)) } else { 0.0 };
    }
    let mf = m as f64;
    let (lo, mid, hi) = ((mf - 1.0) * h, mf * h, (mf + 1.0) * h);
    if hi <= t {
        return 0.0;
    }
    if lo >= t {
        return h * log_offset_unit(m);
    }
    // weight of |x − y| = z is h − |z − mh| on [lo, hi]
    let mut acc = 0.0;
    if t < mid {
        let p = t.max(lo);
        acc += (mid - p) - lo * (mid / p).ln();
    }
    let p = t.max(mid);
    acc += hi * (hi / p).ln() - (hi - p);
    acc
}

/// ∫_0^t ∫_r^∞ 1_{z≤T}/z dz dr.
fn exterior_antiderivative_near(t: f64) -> f64 {
    if t >= CUTOFF {
        CUTOFF
    } else {
        t * CUTOFF.ln() - xlnx(t) + t
    }
}

fn exterior_antiderivative_frac(t: f64, s: f64) -> f64 {
    t.powf(1.0 - 2.0 * s) / (2.0 * s * (1.0 - 2.0 * s))
}

fn exterior_vector(grid: &Grid, h_fn: impl Fn(f64) -> f64) -> DVector<f64> {
    let (l, r) = (grid.interval.left, grid.interval.right);
    DVector::from_iterator(
        grid.n_cells,
        (0..grid.n_cells).map(|i| {
            let c = grid.cell(i);
            h_fn(r - c.left) - h_fn(r - c.right) + h_fn(c.right - l) - h_fn(c.left - l)
        }),
    )
}

fn toeplitz(n: usize, diag: f64, off: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { diag } else { off[i.abs_diff(j)] })
}

/// Stiffness of the fractional form (c(1,s)/2)∬(u(x) − u(y))²|x − y|^{-1-2s} over ℝ².
#[derive(Debug, Clone)]
pub struct FracOperator {
    pub s: f64,
    pub c_s: f64,
    pub matrix: DMatrix<f64>,
    /// Per-cell interaction with the exterior of the domain, without c(1,s).
    pub exterior: DVector<f64>,
}

/// All discrete operators of one grid.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub grid: Arc<Grid>,
    pub constants: DimensionalConstants,
    /// Near form ℰ.
    pub e_near: DMatrix<f64>,
    /// Far kernel 1_{|z|>1}/|z| integrated over pairs of cells (without c_N).
    pub j_far: DMatrix<f64>,
    /// Logarithmic Laplacian ℰ_L = ℰ − c_N J + ρ_N M.
    pub a_log: DMatrix<f64>,
    /// Diagonal of the mass matrix (h on every cell).
    pub mass: DVector<f64>,
    /// Boundary potential h_Ω sampled at cell centers.
    pub h_omega: DVector<f64>,
    /// Cell integrals of h_Ω.
    pub h_omega_cell: DVector<f64>,
    /// Per-cell exterior interaction of the near kernel (without c_N).
    pub exterior_near: DVector<f64>,
    pub frac: Vec<FracOperator>,
}

/// Boundary potential h_Ω(x) = c_N(∫_{B_1(x)∖Ω} − ∫_{Ω∖B_1(x)}) dy/|x − y|.
///
/// In one dimension both the near and the far pieces contribute −ln r on each side.
pub fn h_omega_at(interval: &Interval, c_n: f64, x: f64) -> Result<f64> {
    if !interval.contains(x) {
        return Err(Error::Domain(format!("{x} lies outside the domain")));
    }
    let side = |r: f64| -(r / CUTOFF).ln();
    Ok(c_n * (side(interval.right - x) + side(x - interval.left)))
}

fn h_omega_cell_integrals(grid: &Grid, c_n: f64) -> DVector<f64> {
    let (l, r) = (grid.interval.left, grid.interval.right);
    let phi = |t: f64| xlnx(t) - t;
    DVector::from_iterator(
        grid.n_cells,
        (0..grid.n_cells).map(|i| {
            let c = grid.cell(i);
            c_n * (phi(r - c.right) - phi(r - c.left) + phi(c.left - l) - phi(c.right - l))
        }),
    )
}

fn check_dimension(n_dim: u32) -> Result<DimensionalConstants> {
    if n_dim != 1 {
        return Err(Error::Dimension(format!("grids are one-dimensional, got N = {n_dim}")));
    }
    dimensional_constants(1)
}

fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < MAX_ORDER) {
        return Err(Error::Config(format!("fractional order must lie in (0, {MAX_ORDER}), got {s}")));
    }
    Ok(())
}

/// Assembles the fractional stiffness of order s.
pub fn assemble_frac(grid: &Grid, s: f64) -> Result<FracOperator> {
    check_order(s)?;
    let c_s = frac_normalization(1, s)?;
    let n = grid.n_cells;
    let h = grid.h;
    let scale = h.powf(1.0 - 2.0 * s);
    let mut off = vec![0.0; n];
    for (m, o) in off.iter_mut().enumerate().skip(1) {
        *o = -c_s * scale * frac_offset_unit(m, s);
    }
    let diag = c_s * scale / (s * (1.0 - 2.0 * s));
    let matrix = toeplitz(n, diag, &off);
    let exterior = exterior_vector(grid, |t| exterior_antiderivative_frac(t, s));
    Ok(FracOperator { s, c_s, matrix, exterior })
}

/// Assembles ℰ, J, ℰ_L, the mass and one fractional stiffness per order in `s_list`.
pub fn assemble(grid: Arc<Grid>, n_dim: u32, s_list: &[f64]) -> Result<OperatorSet> {
    let constants = check_dimension(n_dim)?;
    for &s in s_list {
        check_order(s)?;
    }
    let n = grid.n_cells;
    let h = grid.h;
    let c = constants.c_n;
    let mut near_off = vec![0.0; n];
    let mut far_off = vec![0.0; n];
    for m in 1..n {
        let far = far_offset(m, h);
        far_off[m] = far;
        near_off[m] = -c * (h * log_offset_unit(m) - far);
    }
    let near_diag = c * 2.0 * exterior_antiderivative_near(h);
    let e_near = toeplitz(n, near_diag, &near_off);
    let j_far = toeplitz(n, far_offset(0, h), &far_off);
    let mut a_log = &e_near - &j_far * c;
    for i in 0..n {
        a_log[(i, i)] += constants.rho_n * h;
    }
    let h_omega = DVector::from_iterator(
        n,
        grid.centers.iter().map(|&x| h_omega_at(&grid.interval, c, x)).collect::<Result<Vec<_>>>()?,
    );
    let h_omega_cell = h_omega_cell_integrals(&grid, c);
    let exterior_near = exterior_vector(&grid, exterior_antiderivative_near);
    let mut frac = Vec::with_capacity(s_list.len());
    for &s in s_list {
        if frac.iter().any(|f: &FracOperator| (f.s - s).abs() <= 1e-12) {
            continue;
        }
        frac.push(assemble_frac(&grid, s)?);
    }
    Ok(OperatorSet {
        grid,
        constants,
        e_near,
        j_far,
        a_log,
        mass: DVector::from_element(n, h),
        h_omega,
        h_omega_cell,
        exterior_near,
        frac,
    })
}

/// ℰ_L through the boundary-potential representation
/// (c_N/2)∬_{Ω×Ω}(u(x) − u(y))²/|x − y| + ∫(h_Ω + ρ_N)u².
pub fn assemble_log_potential_form(grid: &Grid, n_dim: u32) -> Result<DMatrix<f64>> {
    let constants = check_dimension(n_dim)?;
    let n = grid.n_cells;
    let h = grid.h;
    let c = constants.c_n;
    let mut full = vec![0.0; n];
    for (m, k) in full.iter_mut().enumerate().skip(1) {
        *k = h * log_offset_unit(m);
    }
    // row sums of the full kernel over the other cells of the domain
    let mut prefix = vec![0.0; n];
    for m in 1..n {
        prefix[m] = prefix[m - 1] + full[m];
    }
    let hbar = h_omega_cell_integrals(grid, c);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c * (prefix[i] + prefix[n - 1 - i]) + hbar[i] + constants.rho_n * h
        } else {
            -c * full[i.abs_diff(j)]
        }
    }))
}

/// uᵀ A v for grid functions on the grid of A.
pub fn quadratic_form(matrix: &DMatrix<f64>, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.same_grid(v)?;
    if matrix.nrows() != u.len() || matrix.ncols() != u.len() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{} but the grid has {} cells",
            matrix.nrows(),
            matrix.ncols(),
            u.len()
        )));
    }
    Ok(u.values.dot(&(matrix * &v.values)))
}

impl OperatorSet {
    pub fn n(&self) -> usize {
        self.grid.n_cells
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn frac(&self, s: f64) -> Result<&FracOperator> {
        self.frac
            .iter()
            .find(|f| (f.s - s).abs() <= 1e-12)
            .ok_or_else(|| Error::Config(format!("no fractional operator assembled for s = {s}")))
    }

    pub fn orders(&self) -> Vec<f64> {
        self.frac.iter().map(|f| f.s).collect()
    }

    pub fn check(&self, u: &GridFunction) -> Result<()> {
        if *u.grid != *self.grid {
            return Err(Error::Dimension("grid function does not live on the operator grid".into()));
        }
        Ok(())
    }

    pub fn log_form(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        self.check(u)?;
        quadratic_form(&self.a_log, u, v)
    }

    pub fn near_form(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        self.check(u)?;
        quadratic_form(&self.e_near, u, v)
    }

    pub fn frac_form(&self, s: f64, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        self.check(u)?;
        quadratic_form(&self.frac(s)?.matrix, u, v)
    }

    pub fn grid_function(&self, values: DVector<f64>) -> Result<GridFunction> {
        GridFunction::new(self.grid.clone(), values)
    }
}

/// Near form ℰ(u, u) computed from the support of u only.
///
/// Used for functions concentrated on a few cells of a very fine grid.
pub fn near_energy_sparse(u: &GridFunction, c_n: f64) -> f64 {
    let h = u.h();
    let support: Vec<usize> = (0..u.len()).filter(|&i| u.values[i] != 0.0).collect();
    let (Some(&first), Some(&last)) = (support.first(), support.last()) else {
        return 0.0;
    };
    let span = last - first;
    let mut near = vec![0.0; span + 1];
    for (m, k) in near.iter_mut().enumerate().skip(1) {
        *k = h * log_offset_unit(m) - far_offset(m, h);
    }
    let mut diag = 0.0;
    let mut cross = 0.0;
    for (a, &i) in support.iter().enumerate() {
        let ui = u.values[i];
        diag += ui * ui;
        for &j in &support[a + 1..] {
            cross += ui * u.values[j] * near[j - i];
        }
    }
    c_n * (2.0 * exterior_antiderivative_near(h) * diag - 2.0 * cross)
}

/// Writes the non-zero entries as `i j value` triples with 1-based indices.
pub fn write_triples<W: Write>(matrix: &DMatrix<f64>, mut w: W) -> Result<()> {
    let nnz = matrix.iter().filter(|v| **v != 0.0).count();
    writeln!(w, "{} {} {}", matrix.nrows(), matrix.ncols(), nnz)?;
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            let v = matrix[(i, j)];
            if v != 0.0 {
                writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}
