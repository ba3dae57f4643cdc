//! Uniform directions on S^{n−1} and the law of one normalized coordinate.

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::RandomStream;
use crate::special::{hermite4, ln_sphere_coord_const, normal_pdf, HERMITE4_COEFFS};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// A point of the unit sphere in Rⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitVector {
    n: usize,
    coords: Vec<f64>,
}

impl UnitVector {
    /// Normalizes `coords`; fails on the zero vector or n < 2.
    pub fn from_coords(mut coords: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::InvalidDimension { n, min: 2 });
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("cannot normalize a zero or non-finite vector".into()));
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { n, coords })
    }

    /// θ = (1/√n, …, 1/√n).
    pub fn equal(n: usize) -> Result<Self> {
        Self::from_coords(vec![1.0; n])
    }

    /// The k-th standard basis vector.
    pub fn axis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidInput(format!("axis {k} out of range for n = {n}")));
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Self::from_coords(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        self.coords.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Uniform point on S^{n−1}: a standard Gaussian vector divided by its norm.
pub fn sample_direction(n: usize, stream: &mut RandomStream) -> Result<UnitVector> {
    if n < 2 {
        return Err(Error::InvalidDimension { n, min: 2 });
    }
    loop {
        let g: Vec<f64> = (0..n).map(|_| stream.standard_normal()).collect();
        if g.iter().any(|&x| x != 0.0) {
            return UnitVector::from_coords(g);
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::InvalidDimension { n, min: 3 })
    } else {
        Ok(())
    }
}

/// c_n′ = c_n/√n, the value at 0 of the density of √n·θ₁.
pub fn coord_density_const(n: usize) -> Result<f64> {
    check_dim(n)?;
    Ok((ln_sphere_coord_const(n) - 0.5 * (n as f64).ln()).exp())
}

/// Density of √n·θ₁ for θ uniform on S^{n−1}: c_n′(1 − x²/n)₊^{(n−3)/2}.
pub fn coord_density(n: usize, x: f64) -> Result<f64> {
    let c = coord_density_const(n)?;
    Ok(coord_density_with_const(n, c, x))
}

#[inline]
fn coord_density_with_const(n: usize, c: f64, x: f64) -> f64 {
    let nf = n as f64;
    let base = 1.0 - x * x / nf;
    if base <= 0.0 {
        return 0.0;
    }
    if n == 3 {
        return c;
    }
    c * (0.5 * (nf - 3.0) * base.ln()).exp()
}

/// φ(x)(1 − H₄(x)/(4n)).
pub fn edgeworth_density(n: usize, x: f64) -> Result<f64> {
    check_dim(n)?;
    Ok(edgeworth_unchecked(n, x))
}

#[inline]
fn edgeworth_unchecked(n: usize, x: f64) -> f64 {
    normal_pdf(x) * (1.0 - hermite4(x) / (4.0 * n as f64))
}

fn check_grid(n: usize, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let edge = (n as f64).sqrt();
    if let Some(x) = grid.iter().find(|x| !x.is_finite() || x.abs() > edge) {
        return Err(Error::InvalidInput(format!("grid point {x} outside [-sqrt(n), sqrt(n)]")));
    }
    Ok(())
}

/// sup over the grid of n²·e^{x²/4}·|φ_n(x) − φ(x)(1 − H₄(x)/(4n))|.
pub fn density_error_budget(n: usize, grid: &[f64]) -> Result<f64> {
    check_dim(n)?;
    check_grid(n, grid)?;
    let c = coord_density_const(n)?;
    let nf = n as f64;
    Ok(grid
        .iter()
        .map(|&x| {
            let d = coord_density_with_const(n, c, x) - edgeworth_unchecked(n, x);
            nf * nf * (0.25 * x * x).exp() * d.abs()
        })
        .fold(0.0, f64::max))
}

/// sup over the grid of n·e^{x²/4}·|φ_n(x) − φ(x)|.
pub fn density_first_order_budget(n: usize, grid: &[f64]) -> Result<f64> {
    check_dim(n)?;
    check_grid(n, grid)?;
    let c = coord_density_const(n)?;
    let nf = n as f64;
    Ok(grid
        .iter()
        .map(|&x| nf * (0.25 * x * x).exp() * (coord_density_with_const(n, c, x) - normal_pdf(x)).abs())
        .fold(0.0, f64::max))
}

/// Symmetric grid with step 0.01 on [−a, a].
pub fn symmetric_grid(a: f64, step: f64) -> Vec<f64> {
    let k = (a / step + 1e-9).floor() as i64;
    (-k..=k).map(|i| i as f64 * step).collect()
}

/// Step-0.01 grid on [−min(6, √n/2), min(6, √n/2)].
pub fn default_budget_grid(n: usize) -> Vec<f64> {
    symmetric_grid((0.5 * (n as f64).sqrt()).min(6.0), 0.01)
}

/// Step-0.01 grid on [−min(6, √n), min(6, √n)], reaching the support edge
/// for small n.
pub fn full_budget_grid(n: usize) -> Vec<f64> {
    symmetric_grid((n as f64).sqrt().min(6.0), 0.01)
}

/// ∫ φ_n over [−√n, √n], split at ±√n/2.
pub fn coord_density_integral(n: usize) -> Result<f64> {
    let c = coord_density_const(n)?;
    let edge = (n as f64).sqrt();
    let f = |x: f64| coord_density_with_const(n, c, x);
    let inner = quad::integrate(f, -0.5 * edge, 0.5 * edge, 1e-12, 0.0).value;
    let outer = quad::integrate(f, 0.5 * edge, edge, 1e-12, 0.0).value;
    Ok(inner + 2.0 * outer)
}

/// Tabulated φ_n, its Edgeworth approximation and φ on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityProfile {
    pub n: usize,
    pub grid: Vec<f64>,
    pub phi_n: Vec<f64>,
    pub edgeworth: Vec<f64>,
    pub normal: Vec<f64>,
    pub norm_const: f64,
    pub hermite4_coeffs: [f64; 5],
}

impl DensityProfile {
    pub fn new(n: usize, grid: Vec<f64>) -> Result<Self> {
        let c = coord_density_const(n)?;
        let phi_n = grid.iter().map(|&x| coord_density_with_const(n, c, x)).collect();
        let edgeworth = grid.iter().map(|&x| edgeworth_unchecked(n, x)).collect();
        let normal = grid.iter().map(|&x| normal_pdf(x)).collect();
        Ok(Self { n, grid, phi_n, edgeworth, normal, norm_const: c, hermite4_coeffs: HERMITE4_COEFFS })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,phi_n,edgeworth,normal\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(s, "{},{},{},{}", self.grid[i], self.phi_n[i], self.edgeworth[i], self.normal[i]);
        }
        s
    }
}
