#![allow(dead_code)]

use std::sync::Arc;

use loglap::assembly::{assemble, OperatorSet};
use loglap::grid::{build_grid, Grid, GridFunction, Interval};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Double-exponential quadrature on [a, b]; tolerates integrable endpoint singularities.
pub fn tanh_sinh(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    tanh_sinh_dist(a, b, |dl, dr| f(if dl < dr { a + dl } else { b - dr }))
}

/// Same rule, handing the integrand the exact distances to both endpoints.
pub fn tanh_sinh_dist(a: f64, b: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let step = 1.0 / 64.0;
    let mut acc = 0.0;
    let kmax = (4.0 / step) as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * step;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        let dl = half * u.exp() / u.cosh();
        let dr = half * (-u).exp() / u.cosh();
        if dl <= 0.0 || dr <= 0.0 {
            continue;
        }
        acc += w * f(dl, dr);
    }
    acc * half * step
}

/// ∫ over cells [a,b]×[c,d] of k(|x − y|), reduced to the distribution of y − x.
pub fn cell_pair_oracle(p: (f64, f64), q: (f64, f64), k: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    let (a, b) = p;
    let (c, d) = q;
    // weight = overlap length of [a,b] and [c − z, d − z]; piecewise linear in z
    let w = |z: f64| (b.min(d - z) - a.max(c - z)).max(0.0);
    let mut pts = vec![c - b, d - a, c - a, d - b];
    for &t in breaks {
        for z in [t, -t] {
            if z > c - b && z < d - a {
                pts.push(z);
            }
        }
    }
    if 0.0 > c - b && 0.0 < d - a {
        pts.push(0.0);
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let mut total = 0.0;
    for win in pts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi <= lo {
            continue;
        }
        let (w0, w1) = (w(lo), w(hi));
        let len = hi - lo;
        total += tanh_sinh_dist(lo, hi, |dl, dr| {
            let z = if lo.abs() <= hi.abs() { lo + dl } else { hi - dr };
            (w0 * dr + w1 * dl) / len * k(z.abs())
        });
    }
    total
}

pub fn unit_interval() -> Interval {
    Interval::new(-0.5, 0.5).unwrap()
}

pub fn grid(n: usize) -> Arc<Grid> {
    build_grid(unit_interval(), n).unwrap()
}

pub fn ops(n: usize, s_list: &[f64]) -> OperatorSet {
    assemble(grid(n), 1, s_list).unwrap()
}

pub fn random_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> GridFunction {
    let v = DVector::from_fn(grid.n_cells, |_, _| rng.gen_range(-1.0..1.0));
    GridFunction::new(grid.clone(), v).unwrap()
}

pub fn random_positive_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> GridFunction {
    let v = DVector::from_fn(grid.n_cells, |_, _| rng.gen_range(lo..hi));
    GridFunction::new(grid.clone(), v).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
