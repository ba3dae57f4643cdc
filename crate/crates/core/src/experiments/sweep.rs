//! Rate and tail sweeps of ρ(F_θ, Φ) over random directions.

use super::config::ExperimentConfig;
use crate::distance::{
    be_upper_bound_with, ks_empirical, ks_exact_discrete, ks_inversion, rademacher_law, DirectionCf, MeanCfNodes,
    Method,
};
use crate::error::{Error, Result};
use crate::models::{make_model, sample_vector_into, ModelKind, ModelSpec};
use crate::rng::RandomStream;
use crate::sphere::{sample_direction, UnitVector};
use crate::stats::{ols, quantile_sorted, MeanVar};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Aggregates of ρ over the directions drawn at one n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub n: usize,
    pub mean_rho: f64,
    pub median_rho: f64,
    pub q90: f64,
    pub q99: f64,
    pub max_rho: f64,
    pub se: f64,
    pub error_radius: f64,
    pub directions: usize,
}

/// OLS fit of log mean_rho against log n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub r_squared: f64,
    pub points: usize,
    pub excluded_n: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub quantile: f64,
    pub r: f64,
    pub survival: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSource {
    /// λ₁⁻¹ log n / n.
    Poincare,
    /// Empirical mean of ρ.
    MeanRho,
}

/// Fit of log survival against √(ρ/scale) at one n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub n: usize,
    pub scale: f64,
    pub scale_source: ScaleSource,
    pub table: Vec<TailRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// ĉ = 1/slope², from survival ≈ A·e^{−√(r/ĉ)}.
    pub c_hat: f64,
    /// survival(r·scale) ≤ 2e^{−√(r/ĉ)} at every tabulated r.
    pub bound_holds: bool,
    pub monotone: bool,
    /// Every ρ lies below its method error radius.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: ModelKind,
    pub method: Method,
    pub records: Vec<RateRecord>,
    pub fit: Option<SlopeFit>,
    pub tail: Vec<TailFit>,
}

/// ρ(F_θ, Φ) with its error radius for one direction.
pub fn distance_for_direction(
    model: &ModelSpec,
    theta: &UnitVector,
    cfg: &ExperimentConfig,
    table: Option<&MeanCfNodes>,
    stream: &mut RandomStream,
) -> Result<(f64, f64)> {
    let est = match cfg.distance_method {
        Method::Exact => ks_exact_discrete(&rademacher_law(theta)?)?,
        Method::Empirical => {
            let mut x = vec![0.0; model.n];
            let s: Vec<f64> = (0..cfg.samples)
                .map(|_| {
                    sample_vector_into(model, stream, &mut x);
                    theta.dot(&x)
                })
                .collect();
            ks_empirical(&s)?
        }
        Method::Inversion => ks_inversion(&DirectionCf::new(model, theta, 1.0)?, cfg.accuracy)?,
        Method::BeBound => {
            let table = table.ok_or_else(|| Error::InvalidInput("missing mean characteristic function table".into()))?;
            be_upper_bound_with(model, theta, cfg.t(model.n)?, table)?
        }
    };
    Ok((est.value, est.error_radius))
}

fn check_method(model: &ModelSpec, method: Method) -> Result<()> {
    if method.supports(model) {
        Ok(())
    } else {
        Err(Error::NotApplicable(format!("method {method} does not support model {}", model.name)))
    }
}

/// ρ for every direction at dimension n, in direction order.
pub fn sweep_distances(cfg: &ExperimentConfig, n: usize, directions: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let model = make_model(&cfg.model_name, n)?;
    check_method(&model, cfg.distance_method)?;
    let root = RandomStream::new(seed, n as u64);
    let table = match cfg.distance_method {
        Method::BeBound => Some(MeanCfNodes::new(&model, cfg.t0(n)?, cfg.samples, &root.substream(u64::MAX))?),
        _ => None,
    };
    let count = if cfg.equal_coefficients { 1 } else { directions };
    (0..count)
        .into_par_iter()
        .map(|d| {
            let mut s = root.substream(d as u64);
            let theta = if cfg.equal_coefficients { UnitVector::equal(n)? } else { sample_direction(n, &mut s)? };
            distance_for_direction(&model, &theta, cfg, table.as_ref(), &mut s)
        })
        .collect()
}

fn aggregate(n: usize, values: &[(f64, f64)]) -> RateRecord {
    let mut rho: Vec<f64> = values.iter().map(|v| v.0).collect();
    rho.sort_by(f64::total_cmp);
    let mv = MeanVar::from_slice(&rho);
    RateRecord {
        n,
        mean_rho: mv.mean,
        median_rho: quantile_sorted(&rho, 0.5),
        q90: quantile_sorted(&rho, 0.9),
        q99: quantile_sorted(&rho, 0.99),
        max_rho: *rho.last().expect("non-empty"),
        se: mv.se(),
        error_radius: values.iter().map(|v| v.1).fold(0.0, f64::max),
        directions: values.len(),
    }
}

/// Slope of log mean_rho on log n; the smallest n is dropped when its
/// mean_rho is within 3× the method error radius.
pub fn fit_rate(records: &[RateRecord]) -> Option<SlopeFit> {
    let mut excluded = Vec::new();
    let mut pts: Vec<&RateRecord> = records.iter().filter(|r| r.mean_rho > 0.0).collect();
    if let Some(first) = pts.first() {
        if first.mean_rho <= 3.0 * first.error_radius && pts.len() > 2 {
            excluded.push(first.n);
            pts.remove(0);
        }
    }
    let x: Vec<f64> = pts.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = pts.iter().map(|r| r.mean_rho.ln()).collect();
    let f = ols(&x, &y)?;
    Some(SlopeFit {
        slope: f.slope,
        intercept: f.intercept,
        ci_low: f.slope_ci.0,
        ci_high: f.slope_ci.1,
        r_squared: f.r_squared,
        points: f.points,
        excluded_n: excluded,
    })
}

pub fn run_rate_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let model0 = make_model(&cfg.model_name, cfg.n_list[0])?;
    check_method(&model0, cfg.distance_method)?;
    let records = cfg
        .n_list
        .iter()
        .map(|&n| Ok(aggregate(n, &sweep_distances(cfg, n, cfg.directions_per_n, cfg.seed)?)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_rate(&records);
    Ok(SweepResult { model: model0.name, method: cfg.distance_method, records, fit, tail: vec![] })
}

/// Quantile levels used for the tail fit.
pub const TAIL_LEVELS: [f64; 11] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99];

/// Fit log survival against √(ρ/scale) over [`TAIL_LEVELS`].
pub fn fit_tail(n: usize, values: &[(f64, f64)], lambda1: Option<f64>) -> TailFit {
    let mut rho: Vec<f64> = values.iter().map(|v| v.0).collect();
    rho.sort_by(f64::total_cmp);
    let m = rho.len() as f64;
    let degenerate = values.iter().all(|v| v.0 <= v.1);
    let (scale, scale_source) = match lambda1 {
        Some(l1) => ((n as f64).ln() / (l1 * n as f64), ScaleSource::Poincare),
        None => (rho.iter().sum::<f64>() / m, ScaleSource::MeanRho),
    };
    let table: Vec<TailRow> = TAIL_LEVELS
        .iter()
        .map(|&q| {
            let thr = quantile_sorted(&rho, q);
            let above = rho.iter().filter(|&&v| v > thr).count() as f64;
            TailRow { quantile: q, r: if scale > 0.0 { thr / scale } else { 0.0 }, survival: above / m }
        })
        .collect();
    let monotone = table.windows(2).all(|w| w[1].survival <= w[0].survival && w[1].r >= w[0].r);
    let usable: Vec<&TailRow> = table.iter().filter(|row| row.survival > 0.0).collect();
    let x: Vec<f64> = usable.iter().map(|row| row.r.sqrt()).collect();
    let y: Vec<f64> = usable.iter().map(|row| row.survival.ln()).collect();
    let (slope, intercept, r_squared) = match (degenerate, ols(&x, &y)) {
        (false, Some(f)) => (f.slope, f.intercept, f.r_squared),
        _ => (f64::NAN, f64::NAN, f64::NAN),
    };
    let c_hat = if slope < 0.0 { 1.0 / (slope * slope) } else { f64::INFINITY };
    let bound_holds = c_hat.is_finite() && table.iter().all(|row| row.survival <= 2.0 * (-(row.r / c_hat).sqrt()).exp());
    TailFit { n, scale, scale_source, table, slope, intercept, r_squared, c_hat, bound_holds, monotone, degenerate }
}

pub fn run_tail_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.directions_per_n < 500 {
        return Err(Error::InvalidInput(format!(
            "tail sweep needs at least 500 directions, got {}",
            cfg.directions_per_n
        )));
    }
    let model0 = make_model(&cfg.model_name, cfg.n_list[0])?;
    check_method(&model0, cfg.distance_method)?;
    let mut records = Vec::new();
    let mut tail = Vec::new();
    for &n in &cfg.n_list {
        let values = sweep_distances(cfg, n, cfg.directions_per_n, cfg.seed)?;
        let model = make_model(&cfg.model_name, n)?;
        records.push(aggregate(n, &values));
        tail.push(fit_tail(n, &values, model.lambda1));
    }
    Ok(SweepResult { model: model0.name, method: cfg.distance_method, records, fit: None, tail })
}
