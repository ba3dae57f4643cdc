//! Kolmogorov distance ρ(F_θ, Φ) by exact enumeration, empirical CDF,
//! characteristic-function inversion and a smoothing-inequality upper bound.

use crate::charfn::{mean_cf_table, weighted_sum_cf_exact, SphereKernel};
use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec};
use crate::quad;
use crate::rng::RandomStream;
use crate::special::normal_cdf;
use crate::sphere::UnitVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::fmt;

/// Positions closer than this (relative to max(1, |x|)) are one atom.
pub const MERGE_TOL: f64 = 1e-12;

/// Largest atom count built by [`rademacher_law`].
pub const MAX_ATOMS: usize = 1 << 22;

/// A finitely supported law on R.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

fn same_atom(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs()).max(1.0)
}

impl DiscreteDistribution {
    /// Sorts the atoms and merges coincident ones.
    pub fn new(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if atoms.len() != probs.len() || atoms.is_empty() {
            return Err(Error::InvalidProbabilities(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidProbabilities(format!("probability {p} is not a finite nonnegative number")));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("atoms must be finite".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities(format!("probabilities sum to {total}")));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out_a: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut out_p: Vec<f64> = Vec::with_capacity(pairs.len());
        for (a, p) in pairs {
            match out_a.last() {
                Some(&last) if same_atom(last, a) => *out_p.last_mut().expect("parallel vectors") += p,
                _ => {
                    out_a.push(a);
                    out_p.push(p);
                }
            }
        }
        Ok(Self { atoms: out_a, probs: out_p })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Exact law of Σ θ_k ε_k for independent signs ε_k, by convolution one
/// coordinate at a time.
pub fn rademacher_law(theta: &UnitVector) -> Result<DiscreteDistribution> {
    let mut atoms = vec![0.0];
    let mut probs = vec![1.0];
    for &c in theta.coords() {
        if c == 0.0 {
            continue;
        }
        let c = c.abs();
        let (mut na, mut np) = (Vec::with_capacity(2 * atoms.len()), Vec::with_capacity(2 * atoms.len()));
        let (mut i, mut j) = (0usize, 0usize);
        // Merge the sorted lists {a − c} and {a + c}.
        while i < atoms.len() || j < atoms.len() {
            let take_low = j >= atoms.len() || (i < atoms.len() && atoms[i] - c <= atoms[j] + c);
            let (a, p) = if take_low {
                i += 1;
                (atoms[i - 1] - c, 0.5 * probs[i - 1])
            } else {
                j += 1;
                (atoms[j - 1] + c, 0.5 * probs[j - 1])
            };
            match na.last() {
                Some(&last) if same_atom(last, a) => *np.last_mut().expect("parallel vectors") += p,
                _ => {
                    na.push(a);
                    np.push(p);
                }
            }
        }
        if na.len() > MAX_ATOMS {
            return Err(Error::TooLarge { n: theta.n(), max: MAX_ATOMS });
        }
        atoms = na;
        probs = np;
    }
    Ok(DiscreteDistribution { atoms, probs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Empirical,
    Inversion,
    BeBound,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Empirical => "empirical",
            Method::Inversion => "inversion",
            Method::BeBound => "be_bound",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exact" => Ok(Method::Exact),
            "empirical" => Ok(Method::Empirical),
            "inversion" => Ok(Method::Inversion),
            "be_bound" => Ok(Method::BeBound),
            other => Err(Error::InvalidInput(format!(
                "unknown method `{other}`; expected exact, empirical, inversion or be-bound"
            ))),
        }
    }

    /// Whether the method can be applied to `model`.
    pub fn supports(self, model: &ModelSpec) -> bool {
        match self {
            Method::Exact => model.name == ModelKind::Rademacher,
            Method::Empirical => true,
            Method::Inversion => model.has_cf1 && !model.is_discrete(),
            Method::BeBound => model.lambda_cap.is_some(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A Kolmogorov distance with its error radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub value: f64,
    pub method: Method,
    pub error_radius: f64,
    #[serde(rename = "T0")]
    pub t0: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    #[serde(rename = "L_theta")]
    pub l_theta: Option<f64>,
    /// Unclamped right-hand side of the smoothing bound.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound_raw: Option<f64>,
}

impl DistanceEstimate {
    fn plain(value: f64, method: Method, error_radius: f64) -> Self {
        Self { value, method, error_radius, t0: None, t: None, l_theta: None, bound_raw: None }
    }

    pub const CSV_HEADER: &'static str = "theta_id,method,value,error_radius,T0,T,L_theta";

    pub fn csv_row(&self, theta_id: usize) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            theta_id,
            self.method,
            self.value,
            self.error_radius,
            opt(self.t0),
            opt(self.t),
            opt(self.l_theta)
        )
    }
}

/// sup_x |F(x) − Φ(x)| for a discrete F, checking both one-sided limits at
/// every atom.
pub fn ks_exact_discrete(dist: &DiscreteDistribution) -> Result<DistanceEstimate> {
    let total: f64 = dist.probs.iter().sum();
    if dist.is_empty() || (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidProbabilities(format!("probabilities sum to {total}")));
    }
    let mut below = 0.0;
    let mut comp = 0.0;
    let mut sup = 0.0f64;
    for (&a, &p) in dist.atoms.iter().zip(&dist.probs) {
        let phi = normal_cdf(a);
        sup = sup.max((below - phi).abs());
        // Kahan summation of the cumulative probability.
        let y = p - comp;
        let t = below + y;
        comp = (t - below) - y;
        below = t;
        sup = sup.max((below.min(1.0) - phi).abs());
    }
    let radius = 1e-15 + dist.len() as f64 * f64::EPSILON;
    Ok(DistanceEstimate::plain(sup.min(1.0), Method::Exact, radius))
}

/// DKW radius √(ln(2/δ)/(2m)).
pub fn dkw_radius(m: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * m as f64)).sqrt()
}

/// One-sample Kolmogorov–Smirnov statistic against Φ with the DKW radius at
/// δ = 0.01.
pub fn ks_empirical(samples: &[f64]) -> Result<DistanceEstimate> {
    let m = samples.len();
    if m < 100 {
        return Err(Error::InvalidInput(format!("need at least 100 samples, got {m}")));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("samples contain NaN".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let mf = m as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let phi = normal_cdf(x);
        d.max((i + 1) as f64 / mf - phi).max(phi - i as f64 / mf)
    });
    Ok(DistanceEstimate::plain(d, Method::Empirical, dkw_radius(m, 0.01)))
}

/// A characteristic function with a decay envelope for the inversion method.
pub trait CharacteristicFn: Sync {
    fn eval(&self, t: f64) -> Complex64;

    /// Non-increasing bound on |f(u)| for u ≥ t ≥ 0; `None` if |f| does not
    /// decay.
    fn envelope(&self, t: f64) -> Option<f64>;
}

/// f_θ for a model with a closed-form characteristic function.
pub struct DirectionCf<'a> {
    model: &'a ModelSpec,
    theta: &'a UnitVector,
    kernel: Option<SphereKernel>,
}

impl<'a> DirectionCf<'a> {
    /// `t_max` sizes the quadrature rule for radial models.
    pub fn new(model: &'a ModelSpec, theta: &'a UnitVector, t_max: f64) -> Result<Self> {
        if model.n != theta.n() {
            return Err(Error::DimensionMismatch { model: model.n, theta: theta.n() });
        }
        let kernel = if model.radial_constant {
            Some(SphereKernel::new(model.n, t_max * (model.n as f64).sqrt())?)
        } else if model.has_cf1 {
            None
        } else {
            return Err(Error::NotApplicable(format!("model {} has no closed-form characteristic function", model.name)));
        };
        Ok(Self { model, theta, kernel })
    }
}

impl CharacteristicFn for DirectionCf<'_> {
    fn eval(&self, t: f64) -> Complex64 {
        match &self.kernel {
            Some(k) => Complex64::new(k.j(t * (self.model.n as f64).sqrt()), 0.0),
            None => weighted_sum_cf_exact(self.model, self.theta, t).expect("closed form exists"),
        }
    }

    fn envelope(&self, t: f64) -> Option<f64> {
        if self.kernel.is_some() {
            return None;
        }
        let mut prod = 1.0;
        for &c in self.theta.coords() {
            prod *= self.model.cf1_envelope(c * t)?;
        }
        Some(prod)
    }
}

/// Characteristic function given as closures.
pub struct FnCf<F, G> {
    pub cf: F,
    pub envelope: G,
}

impl<F, G> CharacteristicFn for FnCf<F, G>
where
    F: Fn(f64) -> Complex64 + Sync,
    G: Fn(f64) -> Option<f64> + Sync,
{
    fn eval(&self, t: f64) -> Complex64 {
        (self.cf)(t)
    }

    fn envelope(&self, t: f64) -> Option<f64> {
        (self.envelope)(t)
    }
}

const X_RANGE: f64 = 8.0;
const X_STEP: f64 = 0.01;

/// Bound on (1/π)∫_T^∞ (|f| + e^{−t²/2})/t dt from the envelope on dyadic
/// blocks.
fn tail_bound(cf: &dyn CharacteristicFn, t: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut u = t;
    for _ in 0..80 {
        sum += (cf.envelope(u)? + (-0.5 * u * u).exp()) * LN_2;
        u *= 2.0;
    }
    Some(sum / PI)
}

/// The CDF difference F(x) − Φ(x) recovered by Gil-Pelaez inversion.
struct Inverter {
    t: Vec<f64>,
    c: Vec<Complex64>,
}

impl Inverter {
    fn new(cf: &dyn CharacteristicFn, accuracy: f64) -> Result<(Self, f64)> {
        let target = accuracy / 4.0;
        let mut t_cut = 1.0;
        loop {
            match tail_bound(cf, t_cut) {
                None => {
                    return Err(Error::NotApplicable(
                        "characteristic function does not decay (discrete law); use ks_exact_discrete".into(),
                    ))
                }
                Some(b) if b <= target => break,
                Some(_) if t_cut > 1e7 => {
                    return Err(Error::NotApplicable("characteristic function decays too slowly for inversion".into()))
                }
                Some(_) => t_cut *= 1.25,
            }
        }
        let h = (5.0 / (X_RANGE + 12.0)).min(0.5);
        let panels = (t_cut / h).ceil() as usize;
        let (nodes, weights) = quad::composite_rule(0.0, t_cut, panels);
        let c = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| (cf.eval(t) - (-0.5 * t * t).exp()) * (w / t))
            .collect();
        Ok((Self { t: nodes, c }, t_cut))
    }

    /// F(x) − Φ(x) = −(1/π)∫₀^∞ Im(e^{−itx}(f(t) − e^{−t²/2}))/t dt.
    fn diff(&self, x: f64) -> f64 {
        let mut s = 0.0;
        for (t, c) in self.t.iter().zip(&self.c) {
            let (sn, cs) = (t * x).sin_cos();
            s += c.im * cs - c.re * sn;
        }
        -s / PI
    }
}

/// ρ(F, Φ) from a characteristic function by numerical inversion.
///
/// The half-line integral is cut at T chosen from the envelope so that the
/// truncation error is at most `accuracy/4`; |F − Φ| is scanned on
/// [−8, 8] with step 0.01 and the five largest local maxima are refined by
/// golden-section search.
pub fn ks_inversion(cf: &dyn CharacteristicFn, accuracy: f64) -> Result<DistanceEstimate> {
    if !(1e-10..=1e-3).contains(&accuracy) {
        return Err(Error::InvalidInput(format!("accuracy {accuracy} outside [1e-10, 1e-3]")));
    }
    let (inv, _) = Inverter::new(cf, accuracy)?;
    let k = (X_RANGE / X_STEP).round() as i64;
    let xs: Vec<f64> = (-k..=k).map(|i| i as f64 * X_STEP).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| inv.diff(x).abs()).collect();
    let mut peaks: Vec<usize> = (0..xs.len())
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { vals[i - 1] };
            let right = if i + 1 == xs.len() { f64::NEG_INFINITY } else { vals[i + 1] };
            vals[i] >= left && vals[i] >= right
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for &i in peaks.iter().take(5) {
        best = best.max(golden_max(|x| inv.diff(x).abs(), xs[i] - X_STEP, xs[i] + X_STEP));
    }
    Ok(DistanceEstimate::plain(best.min(1.0), Method::Inversion, accuracy))
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
        if b - a < 1e-12 {
            break;
        }
    }
    best
}

/// T₀ = 4√(log n).
pub fn default_t0(n: usize) -> f64 {
    4.0 * (n as f64).ln().sqrt()
}

/// T = 4n.
pub fn default_t(n: usize) -> f64 {
    4.0 * n as f64
}

/// Nodes and weights in t for ∫_a^b g(t) dt/t, Gauss–Legendre in log t.
fn log_rule(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (u, w) = quad::composite_rule(a.ln(), b.ln(), panels);
    (u.iter().map(|x| x.exp()).collect(), w)
}

/// L(θ) = ∫_{T₀}^{T} |f_θ(t)|/t dt.
pub fn long_interval_integral(cf: &dyn CharacteristicFn, t0: f64, t: f64) -> f64 {
    if t <= t0 {
        return 0.0;
    }
    let panels = ((t - t0) / 0.25).ceil() as usize;
    quad::composite(|s| cf.eval(s).norm() / s, t0, t, panels)
}

/// Right-hand side of the smoothing inequality with unit constant:
///
/// ```text
/// ∫₀^{T₀} |f_θ − f|/t dt + ∫_{T₀}^{T} |f_θ|/t dt + (Λ/n)(1 + log(T/T₀)) + 1/T + e^{−T₀²/4},
/// ```
///
/// with f estimated by [`mean_cf_table`]. The Monte Carlo error of f enters
/// `error_radius` as 3·∫ SE(t)/t dt. The value is clamped to 1; the raw bound
/// is kept in `bound_raw`.
pub fn be_upper_bound(
    model: &ModelSpec,
    theta: &UnitVector,
    t0: f64,
    t: f64,
    samples: usize,
    stream: &RandomStream,
) -> Result<DistanceEstimate> {
    let table = MeanCfNodes::new(model, t0, samples, stream)?;
    be_upper_bound_with(model, theta, t, &table)
}

/// f(t) tabulated on the log-spaced nodes of (0, T₀], shared across
/// directions because f does not depend on θ.
#[derive(Clone, Debug)]
pub struct MeanCfNodes {
    pub t0: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<crate::stats::Estimate>,
}

impl MeanCfNodes {
    pub fn new(model: &ModelSpec, t0: f64, samples: usize, stream: &RandomStream) -> Result<Self> {
        if t0.is_nan() || t0 < 1.0 {
            return Err(Error::Domain(format!("T0 must be >= 1, got {t0}")));
        }
        let (nodes, weights) = log_rule(1e-4, t0, 16);
        let values = mean_cf_table(model, &nodes, samples, stream)?;
        Ok(Self { t0, nodes, weights, values })
    }
}

pub fn be_upper_bound_with(
    model: &ModelSpec,
    theta: &UnitVector,
    t: f64,
    table: &MeanCfNodes,
) -> Result<DistanceEstimate> {
    let t0 = table.t0;
    if t.is_nan() || t < t0 {
        return Err(Error::Domain(format!("T = {t} must be >= T0 = {t0}")));
    }
    let cap = model
        .lambda_cap
        .ok_or_else(|| Error::NotApplicable(format!("model {} has no known Λ", model.name)))?;
    let cf = DirectionCf::new(model, theta, t)?;
    let mut near = 0.0;
    let mut se = 0.0;
    for ((&s, &w), f) in table.nodes.iter().zip(&table.weights).zip(&table.values) {
        near += w * (cf.eval(s) - f.value).norm();
        se += w * f.se;
    }
    let l_theta = long_interval_integral(&cf, t0, t);
    let n = model.n as f64;
    let raw = near + l_theta + cap.value / n * (1.0 + (t / t0).ln()) + 1.0 / t + (-0.25 * t0 * t0).exp();
    Ok(DistanceEstimate {
        value: raw.min(1.0),
        method: Method::BeBound,
        error_radius: 3.0 * se,
        t0: Some(t0),
        t: Some(t),
        l_theta: Some(l_theta),
        bound_raw: Some(raw),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::make_model;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn single_atom() {
        let d = DiscreteDistribution::new(vec![0.0], vec![1.0]).unwrap();
        assert_abs_diff_eq!(ks_exact_discrete(&d).unwrap().value, 0.5, epsilon = 1e-16);
    }

    #[test]
    fn two_symmetric_atoms() {
        let d = DiscreteDistribution::new(vec![1.0, -1.0], vec![0.5, 0.5]).unwrap();
        // Candidate gaps: |0 − Φ(−1)|, |½ − Φ(−1)|, |½ − Φ(1)|, |1 − Φ(1)|.
        let p = normal_cdf(-1.0);
        let brute = [p, (0.5 - p).abs(), (0.5 - normal_cdf(1.0)).abs(), 1.0 - normal_cdf(1.0)]
            .into_iter()
            .fold(0.0, f64::max);
        let r = ks_exact_discrete(&d).unwrap();
        assert_abs_diff_eq!(r.value, brute, epsilon = 1e-15);
        assert_abs_diff_eq!(r.value, 0.341_344_746_068_542_9, epsilon = 1e-15);
    }

    #[test]
    fn two_coordinate_rademacher() {
        let theta = UnitVector::from_coords(vec![1.0, 1.0]).unwrap();
        let law = rademacher_law(&theta).unwrap();
        assert_eq!(law.len(), 3);
        assert_abs_diff_eq!(law.atoms()[2], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(law.probs()[1], 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(ks_exact_discrete(&law).unwrap().value, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn invalid_probabilities() {
        assert!(DiscreteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![0.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn equal_coefficients_collapse() {
        let theta = UnitVector::equal(200).unwrap();
        let law = rademacher_law(&theta).unwrap();
        assert_eq!(law.len(), 201);
    }

    #[test]
    fn empirical_degenerate() {
        let r = ks_empirical(&[0.0; 200]).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-15);
        assert!(ks_empirical(&[0.0; 10]).is_err());
        assert_abs_diff_eq!(dkw_radius(1_000_000, 0.01), 0.001_627_6, epsilon = 1e-6);
    }

    #[test]
    fn inversion_gaussian_null() {
        let m = make_model("gaussian", 3).unwrap();
        let theta = UnitVector::equal(3).unwrap();
        let cf = DirectionCf::new(&m, &theta, 1.0).unwrap();
        let r = ks_inversion(&cf, 1e-8).unwrap();
        assert!(r.value <= 1e-8, "{}", r.value);
    }

    #[test]
    fn inversion_rejects_atoms_and_bad_accuracy() {
        let m = make_model("rademacher", 4).unwrap();
        let theta = UnitVector::equal(4).unwrap();
        let cf = FnCf { cf: |t: f64| Complex64::new(t.cos(), 0.0), envelope: |_| None };
        assert!(matches!(ks_inversion(&cf, 1e-6), Err(Error::NotApplicable(_))));
        assert!(DirectionCf::new(&m, &theta, 1.0).is_ok());
        let g = FnCf { cf: |t: f64| Complex64::new((-0.5 * t * t).exp(), 0.0), envelope: |t: f64| Some((-0.5 * t * t).exp()) };
        assert!(ks_inversion(&g, 1e-2).is_err());
        assert!(ks_inversion(&g, 1e-12).is_err());
    }

    #[test]
    fn uniform_sum_of_two() {
        // Sum of two independent U[−√3,√3] scaled by 1/√2 has a triangular law.
        let m = make_model("uniform_product", 3).unwrap();
        let theta = UnitVector::from_coords(vec![1.0, 1.0, 0.0]).unwrap();
        let cf = DirectionCf::new(&m, &theta, 1.0).unwrap();
        let r = ks_inversion(&cf, 1e-7).unwrap();
        let a = 6f64.sqrt();
        let tri = |x: f64| {
            if x <= -a {
                0.0
            } else if x <= 0.0 {
                (x + a).powi(2) / (2.0 * a * a)
            } else if x < a {
                1.0 - (a - x).powi(2) / (2.0 * a * a)
            } else {
                1.0
            }
        };
        let brute = (-80_000..=80_000).map(|i| i as f64 * 1e-4).map(|x| (tri(x) - normal_cdf(x)).abs()).fold(0.0, f64::max);
        assert_abs_diff_eq!(r.value, brute, epsilon = 2e-7);
    }

    #[test]
    fn be_bound_parameter_errors() {
        let m = make_model("uniform_product", 8).unwrap();
        let theta = UnitVector::equal(8).unwrap();
        let s = RandomStream::new(1, 0);
        assert!(matches!(be_upper_bound(&m, &theta, 0.5, 10.0, 100, &s), Err(Error::Domain(_))));
        assert!(matches!(be_upper_bound(&m, &theta, 3.0, 2.0, 100, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn csv_row_format() {
        let e = DistanceEstimate::plain(0.1, Method::Inversion, 1e-6);
        assert_eq!(e.csv_row(3), "3,inversion,0.1,0.000001,,,");
        assert_eq!(Method::from_name("be-bound").unwrap(), Method::BeBound);
    }

    proptest! {
        #[test]
        fn exact_distance_invariant_under_permutation_and_splitting(
            atoms in proptest::collection::vec(-4.0f64..4.0, 1..20),
            weights in proptest::collection::vec(0.1f64..1.0, 20),
            seed in any::<u64>(),
        ) {
            let w: Vec<f64> = weights[..atoms.len()].to_vec();
            let total: f64 = w.iter().sum();
            let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
            let mut probs = probs;
            let fix: f64 = 1.0 - probs.iter().sum::<f64>();
            probs[0] += fix;
            let base = ks_exact_discrete(&DiscreteDistribution::new(atoms.clone(), probs.clone()).unwrap()).unwrap().value;

            // Permute.
            let mut idx: Vec<usize> = (0..atoms.len()).collect();
            let mut s = RandomStream::new(seed, 0);
            for i in (1..idx.len()).rev() {
                let j = (s.uniform() * (i + 1) as f64) as usize;
                idx.swap(i, j.min(i));
            }
            let pa: Vec<f64> = idx.iter().map(|&i| atoms[i]).collect();
            let pp: Vec<f64> = idx.iter().map(|&i| probs[i]).collect();
            let permuted = ks_exact_discrete(&DiscreteDistribution::new(pa, pp).unwrap()).unwrap().value;
            prop_assert!((base - permuted).abs() < 1e-13);

            // Split the first atom into two duplicates.
            let mut sa = atoms.clone();
            let mut sp = probs.clone();
            sa.push(atoms[0]);
            sp[0] *= 0.5;
            sp.push(probs[0] * 0.5);
            let split = ks_exact_discrete(&DiscreteDistribution::new(sa, sp).unwrap()).unwrap().value;
            prop_assert!((base - split).abs() < 1e-13);
        }
    }
}
