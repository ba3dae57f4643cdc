//! Isotropic random-vector models with known Poincaré constants.

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::sphere::sample_direction;
use crate::stats::par_chunks;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gaussian,
    Rademacher,
    UniformProduct,
    CenteredExp,
    SphereShell,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Gaussian,
        ModelKind::Rademacher,
        ModelKind::UniformProduct,
        ModelKind::CenteredExp,
        ModelKind::SphereShell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gaussian => "gaussian",
            ModelKind::Rademacher => "rademacher",
            ModelKind::UniformProduct => "uniform_product",
            ModelKind::CenteredExp => "centered_exp",
            ModelKind::SphereShell => "sphere_shell",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let key = name.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL.into_iter().find(|k| k.name() == key).ok_or_else(|| Error::UnknownModel {
            name: name.to_string(),
            supported: Self::ALL.map(|k| k.name()).join(", "),
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Known value of the second-order correlation functional Λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaCap {
    pub value: f64,
    /// `true` when `value` is only an upper bound.
    pub is_bound: bool,
}

/// An isotropic distribution on Rⁿ together with its known constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: ModelKind,
    pub n: usize,
    pub symmetric: bool,
    pub mean_zero: bool,
    pub isotropic: bool,
    pub lambda1: Option<f64>,
    pub lambda_cap: Option<LambdaCap>,
    /// Whether coordinates are i.i.d. with a closed-form characteristic function.
    pub has_cf1: bool,
    pub radial_constant: bool,
}

pub fn make_model(name: &str, n: usize) -> Result<ModelSpec> {
    make_model_kind(ModelKind::from_name(name)?, n)
}

pub fn make_model_kind(kind: ModelKind, n: usize) -> Result<ModelSpec> {
    if n < 3 {
        return Err(Error::InvalidDimension { n, min: 3 });
    }
    let nf = n as f64;
    let base = ModelSpec {
        name: kind,
        n,
        symmetric: true,
        mean_zero: true,
        isotropic: true,
        lambda1: None,
        lambda_cap: None,
        has_cf1: true,
        radial_constant: false,
    };
    Ok(match kind {
        ModelKind::Gaussian => ModelSpec {
            lambda1: Some(1.0),
            lambda_cap: Some(LambdaCap { value: 2.0, is_bound: false }),
            ..base
        },
        // Λ ≤ 2·max E X_k⁴ with E X_k⁴ = 1.
        ModelKind::Rademacher => ModelSpec { lambda_cap: Some(LambdaCap { value: 2.0, is_bound: true }), ..base },
        // E X_k⁴ = 9/5 for the uniform law on [−√3, √3].
        ModelKind::UniformProduct => ModelSpec {
            lambda1: Some(PI * PI / 12.0),
            lambda_cap: Some(LambdaCap { value: 2.0 * 9.0 / 5.0, is_bound: true }),
            ..base
        },
        // Λ ≤ 4/λ₁.
        ModelKind::CenteredExp => ModelSpec {
            symmetric: false,
            lambda1: Some(0.25),
            lambda_cap: Some(LambdaCap { value: 16.0, is_bound: true }),
            ..base
        },
        ModelKind::SphereShell => ModelSpec {
            lambda1: Some((nf - 1.0) / nf),
            lambda_cap: Some(LambdaCap { value: 4.0 * nf / (nf - 1.0), is_bound: true }),
            has_cf1: false,
            radial_constant: true,
            ..base
        },
    })
}

impl ModelSpec {
    /// Characteristic function of one coordinate, when coordinates are i.i.d.
    pub fn cf1(&self, s: f64) -> Option<Complex64> {
        Some(match self.name {
            ModelKind::Gaussian => Complex64::new((-0.5 * s * s).exp(), 0.0),
            ModelKind::Rademacher => Complex64::new(s.cos(), 0.0),
            ModelKind::UniformProduct => {
                let x = 3f64.sqrt() * s;
                Complex64::new(if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x }, 0.0)
            }
            ModelKind::CenteredExp => Complex64::new(s.cos(), -s.sin()) / Complex64::new(1.0, -s),
            ModelKind::SphereShell => return None,
        })
    }

    /// A bound on sup_{|u| ≥ |s|} |cf1(u)|, non-increasing in |s|.
    ///
    /// `None` when the coordinate law has atoms (no decay) or there is no
    /// coordinate characteristic function.
    pub fn cf1_envelope(&self, s: f64) -> Option<f64> {
        let s = s.abs();
        match self.name {
            ModelKind::Gaussian => Some((-0.5 * s * s).exp()),
            ModelKind::UniformProduct => {
                // sin x / x ≤ e^{−x²/6} on [0, π] and |sin x / x| ≤ 1/x beyond.
                let x = 3f64.sqrt() * s;
                Some(if x <= PI { (-x * x / 6.0).exp().max(1.0 / PI) } else { 1.0 / x })
            }
            ModelKind::CenteredExp => Some(1.0 / (1.0 + s * s).sqrt()),
            ModelKind::Rademacher | ModelKind::SphereShell => None,
        }
    }

    /// Coordinates take finitely many values.
    pub fn is_discrete(&self) -> bool {
        self.name == ModelKind::Rademacher
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model spec serializes")
    }
}

/// One draw of X written into `out` (length n).
pub fn sample_vector_into(model: &ModelSpec, stream: &mut RandomStream, out: &mut [f64]) {
    debug_assert_eq!(out.len(), model.n);
    match model.name {
        ModelKind::Gaussian => out.iter_mut().for_each(|x| *x = stream.standard_normal()),
        ModelKind::Rademacher => out.iter_mut().for_each(|x| *x = stream.sign()),
        ModelKind::UniformProduct => {
            let a = 3f64.sqrt();
            out.iter_mut().for_each(|x| *x = a * (2.0 * stream.uniform() - 1.0));
        }
        ModelKind::CenteredExp => out.iter_mut().for_each(|x| *x = -stream.uniform_open_low().ln() - 1.0),
        ModelKind::SphereShell => {
            let theta = sample_direction(model.n, stream).expect("n >= 3");
            let r = (model.n as f64).sqrt();
            out.iter_mut().zip(theta.coords()).for_each(|(x, c)| *x = r * c);
        }
    }
}

pub fn sample_vector(model: &ModelSpec, stream: &mut RandomStream) -> Vec<f64> {
    let mut v = vec![0.0; model.n];
    sample_vector_into(model, stream, &mut v);
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub n: usize,
    pub samples: usize,
    /// max_{i,j} |Ê X_iX_j − δ_ij|.
    pub max_deviation: f64,
    /// Standard error of the entry attaining `max_deviation`.
    pub max_deviation_se: f64,
    /// max_{i,j} |Ê X_iX_j − δ_ij| / SE_ij.
    pub max_z: f64,
    /// |Ê|X|² − n|.
    pub norm_deviation: f64,
    pub norm_deviation_se: f64,
    pub pass: bool,
}

/// Compares the empirical second-moment matrix with the identity; every
/// entry and the mean squared norm must lie within 4 standard errors.
pub fn isotropy_audit(model: &ModelSpec, samples: usize, stream: &RandomStream) -> Result<IsotropyReport> {
    isotropy_audit_with(model.n, samples, stream, |s, out| sample_vector_into(model, s, out))
}

/// [`isotropy_audit`] for an arbitrary sampler.
pub fn isotropy_audit_with<F>(n: usize, samples: usize, stream: &RandomStream, sampler: F) -> Result<IsotropyReport>
where
    F: Fn(&mut RandomStream, &mut [f64]) + Sync + Send,
{
    if samples < 1000 {
        return Err(Error::InvalidInput(format!("isotropy audit needs at least 1000 samples, got {samples}")));
    }
    let parts = par_chunks(samples, |c, len| {
        let mut s = stream.substream(c);
        let mut x = vec![0.0; n];
        let mut sum = vec![0.0; n * n];
        let mut sum_sq = vec![0.0; n * n];
        let (mut r, mut r2) = (0.0, 0.0);
        for _ in 0..len {
            sampler(&mut s, &mut x);
            for i in 0..n {
                for j in i..n {
                    let p = x[i] * x[j];
                    sum[i * n + j] += p;
                    sum_sq[i * n + j] += p * p;
                }
            }
            let q: f64 = x.iter().map(|v| v * v).sum();
            r += q;
            r2 += q * q;
        }
        (sum, sum_sq, r, r2)
    });
    let mut sum = vec![0.0; n * n];
    let mut sum_sq = vec![0.0; n * n];
    let (mut r, mut r2) = (0.0, 0.0);
    for (a, b, c, d) in &parts {
        sum.iter_mut().zip(a).for_each(|(x, y)| *x += y);
        sum_sq.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        r += c;
        r2 += d;
    }
    let m = samples as f64;
    let se_of = |s: f64, s2: f64| {
        let mean = s / m;
        ((s2 / m - mean * mean).max(0.0) / (m - 1.0)).sqrt()
    };
    let (mut max_dev, mut max_dev_se, mut max_z) = (0.0f64, 0.0, 0.0f64);
    let mut pass = true;
    for i in 0..n {
        for j in i..n {
            let k = i * n + j;
            let dev = (sum[k] / m - if i == j { 1.0 } else { 0.0 }).abs();
            let se = se_of(sum[k], sum_sq[k]);
            let z = if se > 0.0 { dev / se } else if dev > 1e-12 { f64::INFINITY } else { 0.0 };
            if dev > max_dev {
                max_dev = dev;
                max_dev_se = se;
            }
            max_z = max_z.max(z);
            pass &= z <= 4.0;
        }
    }
    let norm_deviation = (r / m - n as f64).abs();
    let norm_deviation_se = se_of(r, r2);
    pass &= norm_deviation <= 4.0 * norm_deviation_se + 1e-9 * n as f64;
    Ok(IsotropyReport {
        n,
        samples,
        max_deviation: max_dev,
        max_deviation_se: max_dev_se,
        max_z,
        norm_deviation,
        norm_deviation_se,
        pass,
    })
}
