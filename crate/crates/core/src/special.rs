//! Normal law, log-gamma and the normalizing constants of spherical
//! coordinate densities.

use libm::erfc;
use std::f64::consts::{PI, SQRT_2};

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, accurate in both tails.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// log c_n, where c_n = Γ(n/2) / (√π Γ((n−1)/2)) normalizes the density
/// of the first coordinate of a uniform point on S^{n−1}.
///
/// Differences of log-gamma values lose ~1e−13 to cancellation at large n,
/// so the ratio Γ(x + ½)/Γ(x) is taken from its asymptotic series, shifted
/// upward by recurrence for small x.
pub fn ln_sphere_coord_const(n: usize) -> f64 {
    let x = (n as f64 - 1.0) / 2.0;
    ln_gamma_half_ratio(x) - 0.5 * PI.ln()
}

/// ln(Γ(x + ½)/Γ(x)) for x > 0.
fn ln_gamma_half_ratio(x: f64) -> f64 {
    let mut x = x;
    let mut shift = 0.0;
    while x < 30.0 {
        shift += (x / (x + 0.5)).ln();
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    shift + 0.5 * x.ln() - r / 8.0 + r * r2 * (1.0 / 192.0 + r2 * (-1.0 / 640.0 + r2 * 17.0 / 14336.0))
}

/// H₄(x) = x⁴ − 6x² + 3.
#[inline]
pub fn hermite4(x: f64) -> f64 {
    let x2 = x * x;
    x2 * x2 - 6.0 * x2 + 3.0
}

/// Coefficients of H₄ in increasing powers of x.
pub const HERMITE4_COEFFS: [f64; 5] = [3.0, 0.0, -6.0, 0.0, 1.0];
