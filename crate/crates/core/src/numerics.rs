//! Special functions, dimensional constants and Gauss–Legendre quadrature.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    // z is the shifted argument x - 1
    let mut acc = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    acc
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("{what} requires a finite positive argument, got {x}")));
    }
    Ok(())
}

/// Gamma function for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    check_positive(x, "gamma")?;
    if x < 0.5 {
        return Ok(gamma(x + 1.0)? / x);
    }
    if x > 171.6 {
        return Err(Error::Domain(format!("gamma overflows at {x}")));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // split the power so that large arguments do not overflow before the exponential
    let half_power = t.powf(0.5 * (z + 0.5)) * (-0.5 * t).exp();
    Ok((2.0 * PI).sqrt() * half_power * half_power * lanczos_sum(z))
}

/// Natural logarithm of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive(x, "ln_gamma")?;
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// Digamma function for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive(x, "digamma")?;
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli tail: B_{2k} / (2k)
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// Constants attached to the logarithmic Laplacian in dimension N.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DimensionalConstants {
    pub dimension: u32,
    /// Kernel normalization π^{-N/2} Γ(N/2).
    pub c_n: f64,
    /// 2 ln 2 + ψ(N/2) − γ.
    pub rho_n: f64,
    /// Sharp constant of the logarithmic Sobolev (Pitt) inequality.
    pub a_n: f64,
    /// Volume of the unit ball.
    pub omega_n: f64,
}

pub fn dimensional_constants(n: u32) -> Result<DimensionalConstants> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let nf = n as f64;
    let half = nf / 2.0;
    let c_n = PI.powf(-half) * gamma(half)?;
    let rho_n = 2.0 * LN_2 + digamma(half)? - EULER_GAMMA;
    let a_n = (2.0 / nf) * (ln_gamma(nf)? - ln_gamma(half)?) - (4.0 * PI).ln() - 2.0 * digamma(half)?;
    let omega_n = PI.powf(half) / gamma(half + 1.0)?;
    Ok(DimensionalConstants { dimension: n, c_n, rho_n, a_n, omega_n })
}

/// Sharp constant κ_{N,s} of the fractional Sobolev inequality, 0 < s < N/2.
pub fn kappa_frac_sobolev(n: u32, s: f64) -> Result<f64> {
    let nf = n as f64;
    if n == 0 || !(s > 0.0 && s < nf / 2.0) {
        return Err(Error::Domain(format!("kappa requires 0 < s < N/2, got N={n}, s={s}")));
    }
    let ln_k = -2.0 * s * LN_2 - s * PI.ln() + ln_gamma((nf - 2.0 * s) / 2.0)? - ln_gamma((nf + 2.0 * s) / 2.0)?
        + (2.0 * s / nf) * (ln_gamma(nf)? - ln_gamma(nf / 2.0)?);
    Ok(ln_k.exp())
}

/// Normalization c(N,s) of the fractional Laplacian kernel, 0 < s < 1.
pub fn frac_normalization(n: u32, s: f64) -> Result<f64> {
    let nf = n as f64;
    if n == 0 || !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("c(N,s) requires 0 < s < 1, got s={s}")));
    }
    let ln_c = 2.0 * s * LN_2 - 0.5 * nf * PI.ln() + s.ln() + ln_gamma((nf + 2.0 * s) / 2.0)? - ln_gamma(1.0 - s)?;
    Ok(ln_c.exp())
}

/// Critical exponent 2N/(N − 2s).
pub fn critical_exponent(n: u32, s: f64) -> Result<f64> {
    let nf = n as f64;
    if !(s > 0.0 && s < nf / 2.0) {
        return Err(Error::Domain(format!("critical exponent requires 0 < s < N/2, got {s}")));
    }
    Ok(2.0 * nf / (nf - 2.0 * s))
}

/// Nodes and weights of the 16-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre_16() -> &'static ([f64; 16], [f64; 16]) {
    static RULE: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule::<16>())
}

fn gauss_legendre_rule<const M: usize>() -> ([f64; M], [f64; M]) {
    let mut nodes = [0.0; M];
    let mut weights = [0.0; M];
    let m = M as f64;
    for i in 0..M {
        let mut x = (PI * (i as f64 + 0.75) / (m + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=M {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// ∫_a^b g with the 16-point Gauss–Legendre rule.
pub fn integrate_gl16(a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre_16();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes.iter().zip(weights).map(|(x, w)| w * g(mid + half * x)).sum::<f64>() * half
}

/// Polynomial extrapolation to x = 0 of samples (x_i, y_i) by Neville's scheme.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Dimension("extrapolation needs matching non-empty samples".into()));
    }
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (xs[i], xs[i + level]);
            if xa == xb {
                return Err(Error::Domain("repeated abscissa in extrapolation".into()));
            }
            p[i] = (xa * p[i + 1] - xb * p[i]) / (xa - xb);
        }
    }
    Ok(p[0])
}
