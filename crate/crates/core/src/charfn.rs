//! The spherical characteristic function J_n, its Gaussian correction, and
//! characteristic functions of weighted sums.
//!
//! With θ uniform on S^{n−1},
//!
//! ```text
//! J_n(u) = E e^{iuθ₁} = 2c_n ∫₀^{π/2} cos(u sin φ) cos^{n−2}φ dφ,
//! ```
//!
//! an entire integrand, so a composite Gauss–Legendre rule in φ converges
//! geometrically. Derivatives are taken under the integral sign.

use crate::error::{Error, Result};
use crate::models::{sample_vector_into, ModelSpec};
use crate::quad;
use crate::rng::RandomStream;
use crate::special::ln_sphere_coord_const;
use crate::sphere::UnitVector;
use crate::stats::{par_chunks, Estimate, MeanVar};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

/// Quadrature rule for J_n and its derivatives, valid for |u| ≤ `u_max`.
#[derive(Clone, Debug)]
pub struct SphereKernel {
    n: usize,
    u_max: f64,
    sin: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereKernel {
    pub fn new(n: usize, u_max: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidDimension { n, min: 3 });
        }
        let u_max = u_max.abs().max(1.0);
        let m = (n - 2) as f64;
        // cos^m φ ≤ e^{−mφ²/2} < e^{−45} beyond φ_max.
        let phi_max = (90.0 / m).sqrt().min(FRAC_PI_2);
        let panels = 4 + (u_max * phi_max / 8.0).ceil() as usize;
        let (nodes, gw) = quad::composite_rule(0.0, phi_max, panels);
        let ln_c = ln_sphere_coord_const(n) + std::f64::consts::LN_2;
        let weights = nodes.iter().zip(&gw).map(|(&p, &w)| w * (ln_c + m * p.cos().ln()).exp()).collect();
        let sin = nodes.iter().map(|p| p.sin()).collect();
        Ok(Self { n, u_max, sin, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn covers(&self, u: f64) -> bool {
        u.abs() <= self.u_max * (1.0 + 1e-12)
    }

    /// J_n(u).
    pub fn j(&self, u: f64) -> f64 {
        if !self.covers(u) {
            return Self::new(self.n, u).expect("valid n").j(u);
        }
        self.sin.iter().zip(&self.weights).map(|(s, w)| w * (u * s).cos()).sum()
    }

    /// J_n′(u).
    pub fn j_d1(&self, u: f64) -> f64 {
        if !self.covers(u) {
            return Self::new(self.n, u).expect("valid n").j_d1(u);
        }
        -self.sin.iter().zip(&self.weights).map(|(s, w)| w * s * (u * s).sin()).sum::<f64>()
    }

    /// J_n″(u).
    pub fn j_d2(&self, u: f64) -> f64 {
        if !self.covers(u) {
            return Self::new(self.n, u).expect("valid n").j_d2(u);
        }
        -self.sin.iter().zip(&self.weights).map(|(s, w)| w * s * s * (u * s).cos()).sum::<f64>()
    }

    /// K_n′(s) for K_n(s) = J_n(√(sn)), s ≥ 0:
    /// −(n/2) ∫ sin²φ · sinc(√(sn) sin φ), which needs no special case at 0.
    pub fn k_prime(&self, s: f64) -> f64 {
        let a = (s.max(0.0) * self.n as f64).sqrt();
        if !self.covers(a) {
            return Self::new(self.n, a).expect("valid n").k_prime(s);
        }
        let sum: f64 = self
            .sin
            .iter()
            .zip(&self.weights)
            .map(|(&x, w)| {
                let z = a * x;
                let sinc = if z.abs() < 1e-4 { 1.0 - z * z / 6.0 } else { z.sin() / z };
                w * x * x * sinc
            })
            .sum();
        -0.5 * self.n as f64 * sum
    }
}

/// J_n(t) = E e^{itθ₁}, θ uniform on S^{n−1}.
pub fn jn(n: usize, t: f64) -> Result<f64> {
    Ok(SphereKernel::new(n, t)?.j(t))
}

/// k-th derivative (k ∈ {1, 2}) of t ↦ J_n(t√n).
pub fn jn_scaled_deriv(n: usize, t: f64, k: u32) -> Result<f64> {
    if k != 1 && k != 2 {
        return Err(Error::UnsupportedOrder(k));
    }
    let r = (n as f64).sqrt();
    let kern = SphereKernel::new(n, t * r)?;
    Ok(if k == 1 { r * kern.j_d1(t * r) } else { n as f64 * kern.j_d2(t * r) })
}

/// g_n(t) = (1 − t⁴/(4n))e^{−t²/2} and g_n′(t).
pub fn corrected_cf(n: usize, t: f64) -> (f64, f64) {
    debug_assert!(n >= 1);
    let nf = n as f64;
    let e = (-0.5 * t * t).exp();
    let t3 = t * t * t;
    ((1.0 - t3 * t / (4.0 * nf)) * e, (t3 * t * t / (4.0 * nf) - t3 / nf - t) * e)
}

/// Gaussian decay bound 5e^{−t²/2} + 4e^{−n/12} for |J_n(t√n)|.
pub fn decay_bound(n: usize, t: f64) -> f64 {
    5.0 * (-0.5 * t * t).exp() + 4.0 * (-(n as f64) / 12.0).exp()
}

/// Largest value of |J_n(t√n)| / decay_bound(n, t) over the grid.
pub fn decay_bound_ratio(n: usize, t_grid: &[f64]) -> Result<f64> {
    let r = (n as f64).sqrt();
    let umax = t_grid.iter().fold(0.0f64, |m, t| m.max(t.abs())) * r;
    let kern = SphereKernel::new(n, umax)?;
    Ok(t_grid.iter().map(|&t| kern.j(t * r).abs() / decay_bound(n, t)).fold(0.0, f64::max))
}

/// (c0, c1): sup n²|J_n(t√n) − g_n(t)|/min(1, t⁴) and
/// sup n²|(J_n(t√n))′ − g_n′(t)|/min(1, |t|³), with t = 0 skipped.
pub fn cf_error_budget(n: usize, t_grid: &[f64]) -> Result<(f64, f64)> {
    let ts: Vec<f64> = t_grid.iter().copied().filter(|t| *t != 0.0).collect();
    if ts.is_empty() {
        return Err(Error::InvalidInput("grid has no nonzero points".into()));
    }
    let r = (n as f64).sqrt();
    let umax = ts.iter().fold(0.0f64, |m, t| m.max(t.abs())) * r;
    let kern = SphereKernel::new(n, umax)?;
    let n2 = (n * n) as f64;
    let (mut c0, mut c1) = (0.0f64, 0.0f64);
    for &t in &ts {
        let (g, dg) = corrected_cf(n, t);
        let a = t.abs();
        c0 = c0.max(n2 * (kern.j(t * r) - g).abs() / a.powi(4).min(1.0));
        c1 = c1.max(n2 * (r * kern.j_d1(t * r) - dg).abs() / a.powi(3).min(1.0));
    }
    Ok((c0, c1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnMode {
    Exact,
    Asymptotic,
}

/// −½(1 − (s² − 4s)/(4n))e^{−s/2}.
pub fn kn_prime_asymptotic(n: usize, s: f64) -> f64 {
    -0.5 * (1.0 - (s * s - 4.0 * s) / (4.0 * n as f64)) * (-0.5 * s).exp()
}

/// Derivative of K_n(s) = J_n(√(sn)).
pub fn kn_prime(n: usize, s: f64, mode: KnMode) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!("K_n' needs s >= 0, got {s}")));
    }
    if n < 3 {
        return Err(Error::InvalidDimension { n, min: 3 });
    }
    Ok(match mode {
        KnMode::Exact => SphereKernel::new(n, (s * n as f64).sqrt())?.k_prime(s),
        KnMode::Asymptotic => kn_prime_asymptotic(n, s),
    })
}

/// Tabulated J_n(t√n) against g_n and g_n′.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CFProfile {
    pub n: usize,
    pub t_grid: Vec<f64>,
    pub jn_scaled: Vec<f64>,
    pub corrected: Vec<f64>,
    pub corrected_deriv: Vec<f64>,
}

impl CFProfile {
    pub fn new(n: usize, t_grid: Vec<f64>) -> Result<Self> {
        let r = (n as f64).sqrt();
        let umax = t_grid.iter().fold(0.0f64, |m, t| m.max(t.abs())) * r;
        let kern = SphereKernel::new(n, umax)?;
        let jn_scaled = t_grid.iter().map(|&t| kern.j(t * r)).collect();
        let (corrected, corrected_deriv) = t_grid.iter().map(|&t| corrected_cf(n, t)).unzip();
        Ok(Self { n, t_grid, jn_scaled, corrected, corrected_deriv })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,jn_scaled,corrected,corrected_deriv\n");
        for i in 0..self.t_grid.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                self.t_grid[i], self.jn_scaled[i], self.corrected[i], self.corrected_deriv[i]
            );
        }
        s
    }
}

fn check_direction(model: &ModelSpec, theta: &UnitVector) -> Result<()> {
    if model.n != theta.n() {
        return Err(Error::DimensionMismatch { model: model.n, theta: theta.n() });
    }
    Ok(())
}

/// Exact f_θ(t) = E e^{it⟨X,θ⟩}, available for product models and the
/// sphere shell.
pub fn weighted_sum_cf_exact(model: &ModelSpec, theta: &UnitVector, t: f64) -> Option<Complex64> {
    if model.has_cf1 {
        let mut prod = Complex64::new(1.0, 0.0);
        for &c in theta.coords() {
            prod *= model.cf1(c * t)?;
        }
        Some(prod)
    } else if model.radial_constant {
        Some(Complex64::new(jn(model.n, t * (model.n as f64).sqrt()).ok()?, 0.0))
    } else {
        None
    }
}

/// Monte Carlo f_θ(t) with the standard error of the complex mean.
pub fn weighted_sum_cf_mc(
    model: &ModelSpec,
    theta: &UnitVector,
    t: f64,
    samples: usize,
    stream: &RandomStream,
) -> Result<(Complex64, f64)> {
    check_direction(model, theta)?;
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let parts = par_chunks(samples, |c, len| {
        let mut s = stream.substream(c);
        let mut x = vec![0.0; model.n];
        let (mut re, mut im) = (MeanVar::default(), MeanVar::default());
        for _ in 0..len {
            sample_vector_into(model, &mut s, &mut x);
            let a = t * theta.dot(&x);
            re.push(a.cos());
            im.push(a.sin());
        }
        (re, im)
    });
    let re = crate::stats::merge_all(parts.iter().map(|p| &p.0));
    let im = crate::stats::merge_all(parts.iter().map(|p| &p.1));
    Ok((Complex64::new(re.mean, im.mean), (re.se().powi(2) + im.se().powi(2)).sqrt()))
}

/// f_θ(t): the closed form when the model has one (`samples` is then
/// ignored), otherwise a Monte Carlo average.
pub fn weighted_sum_cf(
    model: &ModelSpec,
    theta: &UnitVector,
    t: f64,
    samples: usize,
    stream: &RandomStream,
) -> Result<Complex64> {
    check_direction(model, theta)?;
    match weighted_sum_cf_exact(model, theta, t) {
        Some(z) => Ok(z),
        None => Ok(weighted_sum_cf_mc(model, theta, t, samples, stream)?.0),
    }
}

/// The typical characteristic function f(t) = E_θ f_θ(t) = E J_n(t|X|).
pub fn mean_cf(model: &ModelSpec, t: f64, samples: usize, stream: &RandomStream) -> Result<Estimate> {
    Ok(mean_cf_table(model, &[t], samples, stream)?[0])
}

/// [`mean_cf`] at several t, sharing the same draws of |X|.
pub fn mean_cf_table(model: &ModelSpec, ts: &[f64], samples: usize, stream: &RandomStream) -> Result<Vec<Estimate>> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let n = model.n;
    let tmax = ts.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let kern = SphereKernel::new(n, 4.0 * tmax * (n as f64).sqrt())?;
    let parts = par_chunks(samples, |c, len| {
        let mut s = stream.substream(c);
        let mut x = vec![0.0; n];
        let radii: Vec<f64> = (0..len)
            .map(|_| {
                sample_vector_into(model, &mut s, &mut x);
                x.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect();
        ts.iter()
            .map(|&t| {
                let mut mv = MeanVar::default();
                radii.iter().for_each(|&r| mv.push(kern.j(t * r)));
                mv
            })
            .collect::<Vec<_>>()
    });
    Ok((0..ts.len())
        .map(|k| {
            if ts[k] == 0.0 {
                Estimate::exact(1.0)
            } else {
                crate::stats::merge_all(parts.iter().map(|p| &p[k])).into()
            }
        })
        .collect())
}

/// Monte Carlo estimate of the squared norm I(t) of the linear part of
/// θ ↦ f_θ(t), in exact and asymptotic form, over the same pairs (X, Y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearPartEstimate {
    pub t: f64,
    #[serde(rename = "exact")]
    pub exact_value: f64,
    #[serde(rename = "asymptotic")]
    pub asymptotic_value: f64,
    #[serde(rename = "se")]
    pub std_error: f64,
    #[serde(rename = "pairs")]
    pub pair_count: usize,
    pub asymptotic_se: f64,
    /// Paired difference exact − asymptotic.
    pub gap: f64,
    pub gap_se: f64,
    /// (t²/n)·E|⟨X,Y⟩(4K_n′(t²U)K_n′(t²V) − A(U,V))|, the size of the
    /// remainder between the two forms.
    pub remainder: f64,
    pub remainder_se: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

fn asymptotic_radial(n: f64, t2: f64, u: f64, v: f64) -> f64 {
    let t4 = t2 * t2;
    (1.0 - ((u * u + v * v) * t4 - 4.0 * (u + v) * t2) / (4.0 * n)) * (-0.5 * (u + v) * t2).exp()
}

/// I(t) = (4t²/n) E⟨X,Y⟩K_n′(t²U)K_n′(t²V) with U = |X|²/n, V = |Y|²/n, and
/// its main term (t²/n) E⟨X,Y⟩(1 − ((U²+V²)t⁴ − 8R²t²)/(4n))e^{−R²t²}.
///
/// For a mean-zero X, E⟨X,Y⟩h(X) = 0 for every h, so each radial factor
/// g(U, V) is replaced by g(U,V) − g(U,1) − g(1,V) + g(1,1). The expectation
/// is unchanged and the variance drops by orders of magnitude. Models that
/// are not mean-zero use the raw summand.
pub fn linear_part(model: &ModelSpec, t: f64, pairs: usize, stream: &RandomStream) -> Result<LinearPartEstimate> {
    if pairs < 2 {
        return Err(Error::InvalidInput("linear part needs at least 2 pairs".into()));
    }
    let n = model.n;
    let nf = n as f64;
    let t2 = t * t;
    let kern = SphereKernel::new(n, 4.0 * t.abs() * nf.sqrt())?;
    let k1 = kern.k_prime(t2);
    let a11 = asymptotic_radial(nf, t2, 1.0, 1.0);
    let center = model.mean_zero;
    let parts = par_chunks(pairs, |c, len| {
        let mut s = stream.substream(c);
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut acc = [MeanVar::default(); 4];
        for _ in 0..len {
            sample_vector_into(model, &mut s, &mut x);
            sample_vector_into(model, &mut s, &mut y);
            let mut d = 0.0;
            let (mut xx, mut yy) = (0.0, 0.0);
            for k in 0..n {
                d += x[k] * y[k];
                xx += x[k] * x[k];
                yy += y[k] * y[k];
            }
            let (u, v) = (xx / nf, yy / nf);
            let (ku, kv) = (kern.k_prime(t2 * u), kern.k_prime(t2 * v));
            let auv = asymptotic_radial(nf, t2, u, v);
            let (ex, asy) = if center {
                (
                    4.0 * (ku - k1) * (kv - k1),
                    auv - asymptotic_radial(nf, t2, u, 1.0) - asymptotic_radial(nf, t2, 1.0, v) + a11,
                )
            } else {
                (4.0 * ku * kv, auv)
            };
            let scale = t2 / nf * d;
            acc[0].push(scale * ex);
            acc[1].push(scale * asy);
            acc[2].push(scale * (ex - asy));
            acc[3].push((scale * (4.0 * ku * kv - auv)).abs());
        }
        acc
    });
    let m: Vec<MeanVar> = (0..4).map(|k| crate::stats::merge_all(parts.iter().map(|p| &p[k]))).collect();
    Ok(LinearPartEstimate {
        t,
        exact_value: m[0].mean,
        asymptotic_value: m[1].mean,
        std_error: m[0].se(),
        pair_count: pairs,
        asymptotic_se: m[1].se(),
        gap: m[2].mean,
        gap_se: m[2].se(),
        remainder: m[3].mean,
        remainder_se: m[3].se(),
        warning: (!model.isotropic).then(|| format!("model {} is not isotropic", model.name)),
    })
}

/// Exact-form I(t); see [`linear_part`].
pub fn linear_part_exact(model: &ModelSpec, t: f64, pairs: usize, stream: &RandomStream) -> Result<LinearPartEstimate> {
    linear_part(model, t, pairs, stream)
}

/// Asymptotic-form I(t) with its standard error; see [`linear_part`].
pub fn linear_part_asymptotic(model: &ModelSpec, t: f64, pairs: usize, stream: &RandomStream) -> Result<Estimate> {
    let e = linear_part(model, t, pairs, stream)?;
    Ok(Estimate::new(e.asymptotic_value, e.asymptotic_se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::make_model;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn odd_dimension_closed_forms() {
        for &t in &[0.5f64, 1.0, 2.0, 7.3, 17.0] {
            assert_abs_diff_eq!(jn(3, t).unwrap(), t.sin() / t, epsilon = 1e-14);
            let j5 = 3.0 * (t.sin() - t * t.cos()) / t.powi(3);
            assert_abs_diff_eq!(jn(5, t).unwrap(), j5, epsilon = 1e-14);
        }
    }

    #[test]
    fn value_and_derivatives_at_zero() {
        for n in [3, 10, 1000] {
            assert_abs_diff_eq!(jn(n, 0.0).unwrap(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(jn_scaled_deriv(n, 0.0, 1).unwrap(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(jn_scaled_deriv(n, 0.0, 2).unwrap(), -1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(kn_prime(n, 0.0, KnMode::Exact).unwrap(), -0.5, epsilon = 1e-12);
        }
        assert!(matches!(jn_scaled_deriv(10, 1.0, 3), Err(Error::UnsupportedOrder(3))));
        assert!(jn(2, 1.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (n, t, h) = (17usize, 0.8, 1e-4);
        let r = (n as f64).sqrt();
        let f = |t: f64| jn(n, t * r).unwrap();
        let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
        let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
        assert_abs_diff_eq!(jn_scaled_deriv(n, t, 1).unwrap(), d1, epsilon = 1e-7);
        assert_abs_diff_eq!(jn_scaled_deriv(n, t, 2).unwrap(), d2, epsilon = 1e-5);
        let s = 1.3;
        let k = |s: f64| jn(n, (s * n as f64).sqrt()).unwrap();
        assert_abs_diff_eq!(kn_prime(n, s, KnMode::Exact).unwrap(), (k(s + h) - k(s - h)) / (2.0 * h), epsilon = 1e-7);
    }

    #[test]
    fn corrected_cf_values() {
        assert_eq!(corrected_cf(7, 0.0), (1.0, 0.0));
        assert_abs_diff_eq!(corrected_cf(25, 2.0).0, 0.84 * (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(corrected_cf(1_000_000_000, 1.3).0, (-0.845f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn kn_prime_domain_and_limits() {
        assert!(matches!(kn_prime(10, -0.1, KnMode::Exact), Err(Error::Domain(_))));
        assert_eq!(kn_prime(10, 0.0, KnMode::Asymptotic).unwrap(), -0.5);
        assert!(kn_prime(10, 200.0, KnMode::Asymptotic).unwrap().abs() < 1e-35);
    }

    #[test]
    fn budget_rejects_zero_only_grid() {
        assert!(cf_error_budget(10, &[0.0]).is_err());
        let (c0, c1) = cf_error_budget(3, &[0.5, 1.0, 2.0]).unwrap();
        assert!(c0.is_finite() && c1.is_finite());
    }

    #[test]
    fn profile_csv() {
        let p = CFProfile::new(12, vec![0.0, 0.5]).unwrap();
        assert_eq!(p.jn_scaled[0], 1.0f64.min(p.jn_scaled[0]));
        assert!(p.to_csv().starts_with("t,jn_scaled,corrected,corrected_deriv\n"));
    }

    #[test]
    fn rademacher_two_coordinates() {
        let m = make_model("rademacher", 3).unwrap();
        let theta = UnitVector::from_coords(vec![1.0, 1.0, 0.0]).unwrap();
        let s = RandomStream::new(0, 0);
        let z = weighted_sum_cf(&m, &theta, 1.0, 0, &s).unwrap();
        // Average of cos(t·(±a ± a)) over the four sign patterns.
        let a = 0.5f64.sqrt();
        let brute = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .map(|(e1, e2)| (a * e1 + a * e2).cos())
            .sum::<f64>()
            / 4.0;
        assert_abs_diff_eq!(z.re, brute, epsilon = 1e-15);
        assert_abs_diff_eq!(z.re, 0.5f64.sqrt().cos().powi(2), epsilon = 1e-15);
    }

    #[test]
    fn gaussian_weighted_sum_is_standard_normal() {
        let m = make_model("gaussian", 7).unwrap();
        let mut st = RandomStream::new(9, 1);
        let theta = crate::sphere::sample_direction(7, &mut st).unwrap();
        for &t in &[0.0, 0.3, 2.5] {
            let z = weighted_sum_cf(&m, &theta, t, 0, &st).unwrap();
            assert_abs_diff_eq!(z.re, (-0.5 * t * t).exp(), epsilon = 1e-14);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
        let bad = UnitVector::equal(5).unwrap();
        assert!(matches!(weighted_sum_cf(&m, &bad, 1.0, 10, &st), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mean_cf_degenerate_cases() {
        let st = RandomStream::new(2, 0);
        let g = make_model("gaussian", 10).unwrap();
        assert_eq!(mean_cf(&g, 0.0, 100, &st).unwrap(), Estimate::exact(1.0));
        let sh = make_model("sphere_shell", 10).unwrap();
        let e = mean_cf(&sh, 1.2, 500, &st).unwrap();
        assert_abs_diff_eq!(e.value, jn(10, 1.2 * 10f64.sqrt()).unwrap(), epsilon = 1e-12);
        assert!(e.se < 1e-12);
    }

    #[test]
    fn linear_part_vanishes_at_zero_t() {
        let m = make_model("centered_exp", 8).unwrap();
        let e = linear_part(&m, 0.0, 100, &RandomStream::new(1, 1)).unwrap();
        assert_eq!(e.exact_value, 0.0);
        assert_eq!(e.asymptotic_value, 0.0);
    }

    #[test]
    fn linear_part_json_keys() {
        let m = make_model("rademacher", 8).unwrap();
        let e = linear_part(&m, 1.0, 100, &RandomStream::new(1, 1)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&e).unwrap();
        for key in ["t", "exact", "asymptotic", "se", "pairs"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    proptest! {
        #[test]
        fn jn_even_and_bounded(n in 3usize..400, t in 0.0f64..60.0) {
            let a = jn(n, t).unwrap();
            let b = jn(n, -t).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a.abs() <= 1.0 + 1e-14);
        }

        #[test]
        fn product_cf_bounded(seed in any::<u64>(), t in -10.0f64..10.0, idx in 0usize..4) {
            let names = ["gaussian", "rademacher", "uniform_product", "centered_exp"];
            let m = make_model(names[idx], 6).unwrap();
            let mut st = RandomStream::new(seed, 0);
            let theta = crate::sphere::sample_direction(6, &mut st).unwrap();
            let z1 = weighted_sum_cf(&m, &theta, t, 0, &st).unwrap();
            let z2 = weighted_sum_cf(&m, &theta, t, 0, &st).unwrap();
            prop_assert_eq!(z1, z2);
            prop_assert!(z1.norm() <= 1.0 + 1e-14);
        }
    }
}
