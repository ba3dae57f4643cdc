//! The verification suite and the Λ experiment.

use super::config::ExperimentConfig;
use crate::charfn::{cf_error_budget, decay_bound_ratio, weighted_sum_cf_exact};
use crate::distance::{long_interval_integral, DirectionCf};
use crate::error::{Error, Result};
use crate::functionals::{estimate_lambda_cap, verify_poincare_consequences, LambdaEstimate};
use crate::models::{isotropy_audit, make_model_kind, ModelKind, ModelSpec};
use crate::report::{Record, Relation};
use crate::rng::RandomStream;
use crate::sphere::{density_error_budget, full_budget_grid, sample_direction, UnitVector};
use crate::stats::MeanVar;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Dimensions of the density budget check.
pub const DENSITY_DIMS: [usize; 5] = [10, 20, 50, 100, 200];
/// Dimensions of the characteristic function budget check.
pub const CF_DIMS: [usize; 4] = [20, 40, 80, 160];
/// Dimensions of the decay bound check.
pub const DECAY_DIMS: [usize; 3] = [10, 50, 200];

/// Output of a suite run: every record plus checks that were not applicable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub records: Vec<Record>,
    pub skipped: Vec<String>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    /// Records failing by more than one standard error beyond their slack.
    pub fn hard_failures(&self) -> Vec<&Record> {
        self.records.iter().filter(|r| r.hard_failure()).collect()
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// max/min across n of the density budget sup_x n²|φ_n − φ(1 − H₄/(4n))|.
pub fn density_budget_spread(dims: &[usize]) -> Result<(Vec<f64>, f64)> {
    let c = dims.iter().map(|&n| density_error_budget(n, &full_budget_grid(n))).collect::<Result<Vec<_>>>()?;
    let r = spread(&c);
    Ok((c, r))
}

fn cf_grid() -> Vec<f64> {
    (1..=500).map(|k| k as f64 * 0.01).collect()
}

/// (c0, c1) per n, then the max/min spread of c0 and of c1.
pub type CfSpread = (Vec<(f64, f64)>, f64, f64);

pub fn cf_budget_spread(dims: &[usize]) -> Result<CfSpread> {
    let grid = cf_grid();
    let c = dims.iter().map(|&n| cf_error_budget(n, &grid)).collect::<Result<Vec<_>>>()?;
    let r0 = spread(&c.iter().map(|v| v.0).collect::<Vec<_>>());
    let r1 = spread(&c.iter().map(|v| v.1).collect::<Vec<_>>());
    Ok((c, r0, r1))
}

fn analytic_records() -> Result<Vec<Record>> {
    let mut out = Vec::new();
    let (_, r) = density_budget_spread(&DENSITY_DIMS)?;
    out.push(Record::le("density_budget_spread", r, 4.0, 0.0));
    let (_, r0, r1) = cf_budget_spread(&CF_DIMS)?;
    out.push(Record::le("cf_budget_spread_c0", r0, 4.0, 0.0));
    out.push(Record::le("cf_budget_spread_c1", r1, 4.0, 0.0));
    let grid: Vec<f64> = (0..=500).map(|k| k as f64 * 0.01).collect();
    for n in DECAY_DIMS {
        out.push(Record::le(format!("decay_bound_n{n}"), decay_bound_ratio(n, &grid)?, 1.0, 0.0));
    }
    Ok(out)
}

/// MC estimate of E_θ|f_θ(t) − f(t)|² over random directions against
/// t²/(n − 1), with f the mean of f_θ over the same directions.
pub fn direction_variance(model: &ModelSpec, t: f64, directions: usize, stream: &RandomStream) -> Result<Record> {
    if directions < 2 {
        return Err(Error::InvalidInput("need at least 2 directions".into()));
    }
    let n = model.n;
    let values: Vec<Complex64> = (0..directions)
        .into_par_iter()
        .map(|d| {
            let theta = sample_direction(n, &mut stream.substream(d as u64))?;
            weighted_sum_cf_exact(model, &theta, t)
                .ok_or_else(|| Error::NotApplicable(format!("model {} has no closed-form f_θ", model.name)))
        })
        .collect::<Result<_>>()?;
    let m = directions as f64;
    let mean = values.iter().sum::<Complex64>() / m;
    let dev: Vec<f64> = values.iter().map(|z| (z - mean).norm_sqr() * m / (m - 1.0)).collect();
    let mv = MeanVar::from_slice(&dev);
    Ok(Record::le(format!("direction_variance_{}_n{n}_t{t}", model.name), mv.mean, t * t / (n as f64 - 1.0), mv.se()))
}

/// Mean of L(θ)² = (∫_{T₀}^{T₀n}|f_θ(t)|/t dt)² over directions against
/// (log n)²(4/n² + 3e^{−√(λ₁n)/3}).
pub fn long_interval_moment(model: &ModelSpec, t0: f64, directions: usize, stream: &RandomStream) -> Result<Record> {
    let n = model.n;
    let nf = n as f64;
    let l1 = model
        .lambda1
        .ok_or_else(|| Error::NotApplicable(format!("model {} has no known Poincaré constant", model.name)))?;
    if model.is_discrete() {
        return Err(Error::NotApplicable(format!("f_θ of model {} does not decay", model.name)));
    }
    let t = t0 * nf;
    let l_of = |theta: &UnitVector| -> Result<f64> { Ok(long_interval_integral(&DirectionCf::new(model, theta, t)?, t0, t)) };
    let sq: Vec<f64> = if model.radial_constant {
        // f_θ does not depend on θ.
        vec![l_of(&UnitVector::equal(n)?)?.powi(2); directions]
    } else {
        (0..directions)
            .into_par_iter()
            .map(|d| Ok(l_of(&sample_direction(n, &mut stream.substream(d as u64))?)?.powi(2)))
            .collect::<Result<_>>()?
    };
    let mv = MeanVar::from_slice(&sq);
    let rhs = nf.ln().powi(2) * (4.0 / (nf * nf) + 3.0 * (-(l1 * nf).sqrt() / 3.0).exp());
    Ok(Record::le(format!("long_interval_moment_{}_n{n}", model.name), mv.mean, rhs, mv.se()))
}

fn models_of(name: &str) -> Result<Vec<ModelKind>> {
    if name.eq_ignore_ascii_case("all") {
        Ok(ModelKind::ALL.to_vec())
    } else {
        Ok(vec![ModelKind::from_name(name)?])
    }
}

/// Analytic budgets, then for each model and n: isotropy, direction
/// variance at t = 1, Poincaré consequences and the L(θ) moment check.
pub fn run_verification_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let kinds = models_of(&cfg.model_name)?;
    let mut records = analytic_records()?;
    let mut skipped = Vec::new();
    for (mi, &kind) in kinds.iter().enumerate() {
        for &n in &cfg.n_list {
            let model = make_model_kind(kind, n)?;
            let root = RandomStream::new(cfg.seed, ((mi as u64) << 32) | n as u64);
            let iso = isotropy_audit(&model, cfg.samples, &root.substream(0))?;
            records.push(Record::le(format!("isotropy_{kind}_n{n}"), iso.max_z, 4.0, 0.0));
            match direction_variance(&model, 1.0, cfg.directions_per_n, &root.substream(1)) {
                Ok(r) => records.push(r),
                Err(Error::NotApplicable(s)) => skipped.push(s),
                Err(e) => return Err(e),
            }
            let conc = verify_poincare_consequences(&model, cfg.samples, 2, &root.substream(2))?;
            records.extend(conc.records.into_iter().map(|mut r| {
                r.name = format!("{}_{kind}_n{n}", r.name);
                r
            }));
            skipped.extend(conc.skipped);
            match long_interval_moment(&model, cfg.t0(n)?, cfg.directions_per_n, &root.substream(3)) {
                Ok(r) => records.push(r),
                Err(Error::NotApplicable(s)) => skipped.push(s),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(SuiteReport { records, skipped })
}

/// Λ estimates per model and n with their gates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub estimates: Vec<(ModelKind, LambdaEstimate)>,
    pub records: Vec<Record>,
}

/// Every estimate + 4·SE must reach (n − 1)/n; an exact Λ must match within
/// 4·SE and a bound must not be exceeded by more than 4·SE.
pub fn run_lambda_experiment(cfg: &ExperimentConfig) -> Result<LambdaReport> {
    cfg.validate()?;
    let kinds = models_of(&cfg.model_name)?;
    let mut estimates = Vec::new();
    let mut records = Vec::new();
    for (mi, &kind) in kinds.iter().enumerate() {
        for &n in &cfg.n_list {
            let model = make_model_kind(kind, n)?;
            let stream = RandomStream::new(cfg.seed, ((mi as u64) << 32) | n as u64);
            let est = estimate_lambda_cap(&model, cfg.samples, &stream)?;
            let floor = (n as f64 - 1.0) / n as f64;
            records.push(Record::new(format!("lambda_floor_{kind}_n{n}"), Relation::Ge, est.value, floor, est.se, 4.0));
            if let Some(cap) = model.lambda_cap {
                let rel = if cap.is_bound { Relation::Le } else { Relation::Eq };
                records.push(Record::new(format!("lambda_cap_{kind}_n{n}"), rel, est.value, cap.value, est.se, 4.0));
            }
            estimates.push((kind, est));
        }
    }
    Ok(LambdaReport { estimates, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::make_model;

    #[test]
    fn gaussian_direction_variance_is_zero() {
        let m = make_model("gaussian", 16).unwrap();
        let r = direction_variance(&m, 1.0, 50, &RandomStream::new(3, 0)).unwrap();
        assert!(r.lhs.abs() < 1e-25);
        assert!(r.pass);
    }

    #[test]
    fn rademacher_has_no_long_interval_check() {
        let m = make_model("rademacher", 16).unwrap();
        assert!(matches!(long_interval_moment(&m, 4.0, 10, &RandomStream::new(1, 0)), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn sphere_shell_long_interval_is_constant() {
        let m = make_model("sphere_shell", 16).unwrap();
        let r = long_interval_moment(&m, 4.0 * 16f64.ln().sqrt(), 20, &RandomStream::new(1, 0)).unwrap();
        assert_eq!(r.se, 0.0);
    }
}
