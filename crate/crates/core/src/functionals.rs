//! Moment functionals (Λ, σ₄², M₄, m₄, β̄₄), the ψ₁ norm, and Monte Carlo
//! checks of Poincaré-type concentration consequences.

use crate::error::{Error, Result};
use crate::models::{sample_vector_into, ModelKind, ModelSpec};
use crate::report::Record;
use crate::rng::RandomStream;
use crate::sphere::{sample_direction, UnitVector};
use crate::stats::{merge_all, par_chunks, Estimate, MeanVar};
use serde::{Deserialize, Serialize};

/// Largest n for the dense estimator of Λ.
pub const LAMBDA_MAX_N: usize = 48;
const FOLDS: usize = 5;

/// Λ estimate with its cross-fitting standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub n: usize,
    pub samples: usize,
    /// Mean over folds of the held-out variance along the top eigenvector of
    /// the other folds' covariance.
    pub value: f64,
    pub se: f64,
    pub fold_values: Vec<f64>,
    /// Top eigenvalue of the full-sample covariance (biased upward).
    pub in_sample: f64,
}

/// Raw moment sums of the vectorized array z(X).
#[derive(Clone)]
struct MomentSums {
    count: f64,
    sum: Vec<f64>,
    outer: Vec<f64>,
}

impl MomentSums {
    fn new(d: usize) -> Self {
        Self { count: 0.0, sum: vec![0.0; d], outer: vec![0.0; d * d] }
    }

    fn add(&mut self, other: &MomentSums) {
        self.count += other.count;
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.outer.iter_mut().zip(&other.outer).for_each(|(a, b)| *a += b);
    }

    fn covariance(&self) -> Vec<f64> {
        let d = self.sum.len();
        let m = self.count;
        let mut c = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = (self.outer[i * d + j] - self.sum[i] * self.sum[j] / m) / (m - 1.0);
                c[i * d + j] = v;
                c[j * d + i] = v;
            }
        }
        c
    }
}

/// z = (X_i² − 1)_i ⊕ (√2·X_iX_j)_{i<j}, so that Var(Σ a_ij X_iX_j) = bᵀ Cov(z) b
/// with ‖b‖ = ‖a‖_F for symmetric a.
fn quadratic_features(x: &[f64], z: &mut [f64]) {
    let n = x.len();
    for (zi, xi) in z.iter_mut().zip(x) {
        *zi = xi * xi - 1.0;
    }
    let mut k = n;
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            z[k] = r2 * x[i] * x[j];
            k += 1;
        }
    }
}

fn mat_vec(a: &[f64], x: &[f64], y: &mut [f64]) {
    let d = x.len();
    for i in 0..d {
        y[i] = a[i * d..(i + 1) * d].iter().zip(x).map(|(p, q)| p * q).sum();
    }
}

/// Top eigenpair of a symmetric PSD matrix by power iteration (relative
/// tolerance 1e−6 on the eigenvalue, at most 1000 iterations).
pub fn power_iteration(a: &[f64], d: usize) -> (f64, Vec<f64>) {
    let mut x: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * (i as f64 + 1.0).sin()).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    let mut y = vec![0.0; d];
    let mut lambda = 0.0;
    for _ in 0..1000 {
        mat_vec(a, &x, &mut y);
        let next: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (0.0, x);
        }
        x.iter_mut().zip(&y).for_each(|(p, q)| *p = q / norm);
        let done = (next - lambda).abs() <= 1e-6 * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    (lambda, x)
}

/// Λ = sup{Var(Σ a_ij X_iX_j) : Σ a_ij² = 1}, the top eigenvalue of the
/// covariance of the array (X_iX_j − δ_ij).
///
/// The in-sample top eigenvalue is biased upward by roughly the spread of the
/// sample spectrum, which exceeds the fold standard error, so the reported
/// value is cross-fitted over 5 folds.
pub fn estimate_lambda_cap(model: &ModelSpec, samples: usize, stream: &RandomStream) -> Result<LambdaEstimate> {
    let n = model.n;
    if n > LAMBDA_MAX_N {
        return Err(Error::TooLarge { n, max: LAMBDA_MAX_N });
    }
    if samples < 10 * n * n {
        return Err(Error::InvalidInput(format!("need at least 10·n² = {} samples, got {samples}", 10 * n * n)));
    }
    let d = n * (n + 1) / 2;
    let parts = par_chunks(samples, |c, len| {
        let mut s = stream.substream(c);
        let mut x = vec![0.0; n];
        let mut z = vec![0.0; d];
        let mut acc = MomentSums::new(d);
        for _ in 0..len {
            sample_vector_into(model, &mut s, &mut x);
            quadratic_features(&x, &mut z);
            acc.count += 1.0;
            for i in 0..d {
                acc.sum[i] += z[i];
                let zi = z[i];
                let row = &mut acc.outer[i * d..(i + 1) * d];
                for j in i..d {
                    row[j] += zi * z[j];
                }
            }
        }
        acc
    });
    let mut folds = vec![MomentSums::new(d); FOLDS];
    for (c, p) in parts.iter().enumerate() {
        folds[c % FOLDS].add(p);
    }
    if folds.iter().any(|f| f.count < 2.0) {
        return Err(Error::InvalidInput("too few samples for 5 folds".into()));
    }
    let mut total = MomentSums::new(d);
    folds.iter().for_each(|f| total.add(f));
    let (in_sample, _) = power_iteration(&total.covariance(), d);
    let mut y = vec![0.0; d];
    let fold_values: Vec<f64> = (0..FOLDS)
        .map(|k| {
            let mut train = MomentSums::new(d);
            folds.iter().enumerate().filter(|(j, _)| *j != k).for_each(|(_, f)| train.add(f));
            let (_, v) = power_iteration(&train.covariance(), d);
            mat_vec(&folds[k].covariance(), &v, &mut y);
            v.iter().zip(&y).map(|(p, q)| p * q).sum()
        })
        .collect();
    let mv = MeanVar::from_slice(&fold_values);
    Ok(LambdaEstimate { n, samples, value: mv.mean, se: mv.se(), fold_values, in_sample })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSource {
    Estimate,
    Exact,
    Bound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentErrors {
    pub lambda_cap: f64,
    pub sigma4_sq: f64,
    #[serde(rename = "M4")]
    pub big_m4: f64,
    pub m4: f64,
    pub beta4_bar: f64,
}

/// Estimates of the moment functionals of one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub lambda_cap_hat: f64,
    pub lambda_cap_source: LambdaSource,
    /// Var(|X|²)/n.
    pub sigma4_sq_hat: f64,
    /// max (E⟨X,θ⟩⁴)^{1/4} over sampled directions and the coordinate axes;
    /// a lower bound for the supremum over the sphere.
    #[serde(rename = "M4_hat")]
    pub big_m4_hat: f64,
    /// (E⟨X,Y⟩⁴)^{1/4}/√n for an independent copy Y.
    pub m4_hat: f64,
    /// (1/n) Σ_k E X_k⁴.
    pub beta4_bar_hat: f64,
    pub sample_count: usize,
    pub std_errors: MomentErrors,
}

pub fn moment_report(model: &ModelSpec, samples: usize, directions: usize, stream: &RandomStream) -> Result<MomentReport> {
    if samples < 1000 {
        return Err(Error::InvalidInput(format!("moment report needs at least 1000 samples, got {samples}")));
    }
    let n = model.n;
    let nf = n as f64;
    let mut dir_stream = stream.substream(1);
    let mut dirs: Vec<UnitVector> = (0..directions).map(|_| sample_direction(n, &mut dir_stream)).collect::<Result<_>>()?;
    for k in 0..n {
        dirs.push(UnitVector::axis(n, k)?);
    }
    let single = stream.substream(0);
    let parts = par_chunks(samples, |c, len| {
        let mut s = single.substream(c);
        let mut x = vec![0.0; n];
        let mut norms = Vec::with_capacity(len);
        let mut beta = MeanVar::default();
        let mut fourth = vec![MeanVar::default(); dirs.len()];
        for _ in 0..len {
            sample_vector_into(model, &mut s, &mut x);
            norms.push(x.iter().map(|v| v * v).sum::<f64>());
            beta.push(x.iter().map(|v| v.powi(4)).sum::<f64>() / nf);
            for (acc, th) in fourth.iter_mut().zip(&dirs) {
                acc.push(th.dot(&x).powi(4));
            }
        }
        (norms, beta, fourth)
    });
    let norms: Vec<f64> = parts.iter().flat_map(|p| p.0.iter().copied()).collect();
    let beta = merge_all(parts.iter().map(|p| &p.1));
    let q = MeanVar::from_slice(&norms);
    let m = norms.len() as f64;
    let mu4 = norms.iter().map(|v| (v - q.mean).powi(4)).sum::<f64>() / m;
    let var = q.variance();
    let sigma4_sq_hat = var / nf;
    let sigma4_se = ((mu4 - var * var).max(0.0) / m).sqrt() / nf;

    let (mut big, mut big_se) = (0.0f64, 0.0);
    for k in 0..dirs.len() {
        let mv = merge_all(parts.iter().map(|p| &p.2[k]));
        let root = mv.mean.max(0.0).powf(0.25);
        if root > big {
            big = root;
            big_se = if mv.mean > 0.0 { mv.se() / (4.0 * mv.mean.powf(0.75)) } else { 0.0 };
        }
    }

    let pair_stream = stream.substream(2);
    let pair_parts = par_chunks(samples, |c, len| {
        let mut s = pair_stream.substream(c);
        let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
        let mut acc = MeanVar::default();
        for _ in 0..len {
            sample_vector_into(model, &mut s, &mut x);
            sample_vector_into(model, &mut s, &mut y);
            let d: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            acc.push(d.powi(4));
        }
        acc
    });
    let w = merge_all(pair_parts.iter());
    let m4_hat = w.mean.max(0.0).powf(0.25) / nf.sqrt();
    let m4_se = if w.mean > 0.0 { w.se() / (4.0 * w.mean.powf(0.75) * nf.sqrt()) } else { 0.0 };

    let (lambda_cap_hat, lambda_se, lambda_cap_source) = if n <= LAMBDA_MAX_N && samples >= 10 * n * n {
        let e = estimate_lambda_cap(model, samples, &stream.substream(3))?;
        (e.value, e.se, LambdaSource::Estimate)
    } else {
        let cap = model
            .lambda_cap
            .ok_or_else(|| Error::NotApplicable(format!("no Λ available for model {}", model.name)))?;
        (cap.value, 0.0, if cap.is_bound { LambdaSource::Bound } else { LambdaSource::Exact })
    };
    Ok(MomentReport {
        lambda_cap_hat,
        lambda_cap_source,
        sigma4_sq_hat,
        big_m4_hat: big,
        m4_hat,
        beta4_bar_hat: beta.mean,
        sample_count: samples,
        std_errors: MomentErrors { lambda_cap: lambda_se, sigma4_sq: sigma4_se, big_m4: big_se, m4: m4_se, beta4_bar: beta.se() },
    })
}

/// Empirical ψ₁ norm: the smallest λ with mean exp(|v|/λ) ≤ 2, to relative
/// precision 1e−6.
pub fn psi1_norm(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("psi1 norm of an empty sample".into()));
    }
    if values.len() < 100 {
        return Err(Error::InvalidInput(format!("psi1 norm needs at least 100 values, got {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("values must be finite".into()));
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(0.0);
    }
    // Work on |v|/max so that the result scales exactly with the data.
    let abs: Vec<f64> = values.iter().map(|v| v.abs() / max).collect();
    let ln_n = (abs.len() as f64).ln();
    let ok = |lambda: f64| {
        let top = 1.0 / lambda;
        let s: f64 = abs.iter().map(|v| (v / lambda - top).exp()).sum();
        top + s.ln() - ln_n <= std::f64::consts::LN_2
    };
    // Jensen gives mean|v|/ln 2 ≤ λ; λ = max|v|/ln 2 always satisfies the constraint.
    let mean = abs.iter().sum::<f64>() / abs.len() as f64;
    let (mut lo, mut hi) = (mean / std::f64::consts::LN_2, 1.0 / std::f64::consts::LN_2);
    if ok(lo) {
        return Ok(lo * max);
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi * max)
}

/// Records of one concentration check run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub model: ModelKind,
    pub n: usize,
    pub records: Vec<Record>,
    pub skipped: Vec<String>,
}

impl ConcentrationReport {
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }
}

fn proportion(hits: usize, m: usize) -> Estimate {
    let p = hits as f64 / m as f64;
    Estimate::new(p, (p * (1.0 - p) / m as f64).sqrt())
}

const TAIL_RADII: [f64; 3] = [1.0, 2.0, 4.0];
const MOMENT_ORDERS: [i32; 3] = [2, 3, 6];
const POINCARE_DIRECTIONS: usize = 50;

/// Monte Carlo checks of the consequences of a Poincaré inequality with
/// constant λ₁:
///
/// - P{|X| − E|X| ≥ r} ≤ 3e^{−2√λ₁ r} for r ∈ {1, 2, 4};
/// - E|u − Eu|^p ≤ (p/√(2λ₁))^p E|∇u|^p for u = |x| and u = |x|²/√n, p ∈ {2, 3, 6};
/// - P{|X|² ≤ n/4} ≤ 3e^{−√(λ₁n)/2};
/// - P{|Σ_p|² ≤ np/2} ≤ 3e^{−√(λ₁n)/3} with Σ_p = Σ_{k≤p}(X⁽ᵏ⁾ − Y⁽ᵏ⁾);
/// - λ₁ Var⟨X,θ⟩ ≤ 1 on average over 50 random directions, and λ₁ ≤ 1.
pub fn verify_poincare_consequences(
    model: &ModelSpec,
    samples: usize,
    p_sum: usize,
    stream: &RandomStream,
) -> Result<ConcentrationReport> {
    let n = model.n;
    let nf = n as f64;
    let Some(l1) = model.lambda1 else {
        return Ok(ConcentrationReport {
            model: model.name,
            n,
            records: vec![],
            skipped: vec![format!("model {} has no known Poincaré constant; concentration checks skipped", model.name)],
        });
    };
    if !(1..=8).contains(&p_sum) {
        return Err(Error::InvalidInput(format!("p_sum must lie in [1, 8], got {p_sum}")));
    }
    if samples < 1000 {
        return Err(Error::InvalidInput(format!("need at least 1000 samples, got {samples}")));
    }
    let mut dir_stream = stream.substream(1);
    let dirs: Vec<UnitVector> =
        (0..POINCARE_DIRECTIONS).map(|_| sample_direction(n, &mut dir_stream)).collect::<Result<_>>()?;
    let base = stream.substream(0);
    let parts = par_chunks(samples, |c, len| {
        let mut s = base.substream(c);
        let mut x = vec![0.0; n];
        let mut sum = vec![0.0; n];
        let mut norms = Vec::with_capacity(len);
        let mut conv_small = 0usize;
        let mut proj = vec![MeanVar::default(); dirs.len()];
        for _ in 0..len {
            sample_vector_into(model, &mut s, &mut x);
            norms.push(x.iter().map(|v| v * v).sum::<f64>());
            for (acc, th) in proj.iter_mut().zip(&dirs) {
                acc.push(th.dot(&x));
            }
            sum.iter_mut().for_each(|v| *v = 0.0);
            for _ in 0..p_sum {
                sample_vector_into(model, &mut s, &mut x);
                sum.iter_mut().zip(&x).for_each(|(a, b)| *a += b);
                sample_vector_into(model, &mut s, &mut x);
                sum.iter_mut().zip(&x).for_each(|(a, b)| *a -= b);
            }
            if sum.iter().map(|v| v * v).sum::<f64>() <= nf * p_sum as f64 / 2.0 {
                conv_small += 1;
            }
        }
        (norms, conv_small, proj)
    });
    let sq: Vec<f64> = parts.iter().flat_map(|p| p.0.iter().copied()).collect();
    let m = sq.len();
    let norm: Vec<f64> = sq.iter().map(|v| v.sqrt()).collect();
    let mean_norm = norm.iter().sum::<f64>() / m as f64;
    let mut records = Vec::new();

    for &r in &TAIL_RADII {
        let hits = norm.iter().filter(|&&v| v - mean_norm >= r).count();
        let p = proportion(hits, m);
        records.push(Record::le(format!("lipschitz_tail_r{r}"), p.value, 3.0 * (-2.0 * l1.sqrt() * r).exp(), p.se));
    }

    let u2: Vec<f64> = sq.iter().map(|v| v / nf.sqrt()).collect();
    let mean_u2 = u2.iter().sum::<f64>() / m as f64;
    for &p in &MOMENT_ORDERS {
        let c = (p as f64 / (2.0 * l1).sqrt()).powi(p);
        let lhs = MeanVar::from_slice(&norm.iter().map(|v| (v - mean_norm).abs().powi(p)).collect::<Vec<_>>());
        records.push(Record::le(format!("moment_bound_norm_p{p}"), lhs.mean, c, lhs.se()));
        let lhs = MeanVar::from_slice(&u2.iter().map(|v| (v - mean_u2).abs().powi(p)).collect::<Vec<_>>());
        let grad = MeanVar::from_slice(&norm.iter().map(|v| (2.0 * v / nf.sqrt()).powi(p)).collect::<Vec<_>>());
        let se = (lhs.se().powi(2) + (c * grad.se()).powi(2)).sqrt();
        records.push(Record::le(format!("moment_bound_sq_norm_p{p}"), lhs.mean, c * grad.mean, se));
    }

    let small = proportion(sq.iter().filter(|&&v| v <= nf / 4.0).count(), m);
    records.push(Record::le("small_ball", small.value, 3.0 * (-(l1 * nf).sqrt() / 2.0).exp(), small.se));

    let conv = proportion(parts.iter().map(|p| p.1).sum(), m);
    records.push(Record::le(
        format!("small_ball_convolution_p{p_sum}"),
        conv.value,
        3.0 * (-(l1 * nf).sqrt() / 3.0).exp(),
        conv.se,
    ));

    let mut ratio = MeanVar::default();
    let mut ratio_se = 0.0;
    for k in 0..dirs.len() {
        let mv = merge_all(parts.iter().map(|p| &p.2[k]));
        let var = mv.variance();
        // Delta method on 1/Var with SE(Var) ≈ Var·√(2/m).
        ratio.push(1.0 / var);
        ratio_se += (2.0 / m as f64).sqrt() / var;
    }
    ratio_se /= dirs.len() as f64;
    records.push(
        Record::le("linear_poincare_ratio", l1, ratio.mean, ratio_se)
            .with_note("λ₁ against the mean over directions of E|∇u|²/Var(u) for u = ⟨x,θ⟩"),
    );
    records.push(Record::le("lambda1_at_most_one", l1, 1.0, 0.0));
    Ok(ConcentrationReport { model: model.name, n, records, skipped: vec![] })
}

/// Monte Carlo estimates of the pair quantities that measure asymmetry of a
/// mean-zero law (Y an independent copy of X, R² = (|X|²+|Y|²)/(2n)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonsymmetricQuantities {
    pub model: ModelKind,
    pub n: usize,
    pub pairs: usize,
    /// E⟨X,Y⟩/√(|X|²+|Y|²), zero when X = Y = 0.
    pub inner_over_norm: Estimate,
    /// E⟨X,Y⟩/R.
    pub inner_over_r: Estimate,
    /// n·E⟨X,Y⟩/R.
    pub n_inner_over_r: Estimate,
    /// E⟨X,Y⟩R⁴ by direct averaging.
    pub inner_r4: Estimate,
    /// E⟨X,Y⟩R⁴ through the reduction to E⟨X,Y⟩(U−1)(V−1)/2.
    pub inner_r4_reduced: Estimate,
    /// |E|X|²X|²/(2n²) from an independent sample.
    pub moment_side: Estimate,
}

impl NonsymmetricQuantities {
    pub fn records(&self, symmetric: bool) -> Vec<Record> {
        let mut out = vec![Record::ge("inner_over_norm_nonnegative", self.inner_over_norm.value, 0.0, self.inner_over_norm.se)];
        if symmetric {
            out.push(Record::eq("inner_over_norm_vanishes", self.inner_over_norm.value, 0.0, self.inner_over_norm.se, 3.0));
        }
        let se = (self.inner_r4.se.powi(2) + self.moment_side.se.powi(2)).sqrt();
        out.push(Record::eq("inner_r4_identity", self.inner_r4.value, self.moment_side.value, se, 4.0));
        out
    }
}

const NS_BATCHES: usize = 20;

/// Expectations of ⟨X,Y⟩g(|X|², |Y|²) are computed with g replaced by
/// g(a,b) − g(a,n) − g(n,b) + g(n,n): for mean-zero X the subtracted terms
/// have zero mean, and the variance drops by orders of magnitude.
pub fn nonsymmetric_quantities(model: &ModelSpec, pairs: usize, stream: &RandomStream) -> Result<NonsymmetricQuantities> {
    if !model.mean_zero {
        return Err(Error::InvalidInput(format!("model {} is not mean-zero", model.name)));
    }
    if pairs < 2 {
        return Err(Error::InvalidInput("need at least 2 pairs".into()));
    }
    let n = model.n;
    let nf = n as f64;
    let g_norm = |a: f64, b: f64| if a + b > 0.0 { 1.0 / (a + b).sqrt() } else { 0.0 };
    let g_r = |a: f64, b: f64| 1.0 / ((a + b) / (2.0 * nf)).sqrt();
    let center = |g: &dyn Fn(f64, f64) -> f64, a: f64, b: f64| g(a, b) - g(a, nf) - g(nf, b) + g(nf, nf);
    let pair_stream = stream.substream(0);
    let parts = par_chunks(pairs, |c, len| {
        let mut s = pair_stream.substream(c);
        let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
        let mut acc = [MeanVar::default(); 4];
        for _ in 0..len {
            sample_vector_into(model, &mut s, &mut x);
            sample_vector_into(model, &mut s, &mut y);
            let mut d = 0.0;
            let (mut a, mut b) = (0.0, 0.0);
            for k in 0..n {
                d += x[k] * y[k];
                a += x[k] * x[k];
                b += y[k] * y[k];
            }
            acc[0].push(d * center(&g_norm, a, b));
            acc[1].push(d * center(&g_r, a, b));
            let r2 = (a + b) / (2.0 * nf);
            acc[2].push(d * r2 * r2);
            acc[3].push(d * (a / nf - 1.0) * (b / nf - 1.0) / 2.0);
        }
        acc
    });
    let est = |k: usize| -> Estimate { merge_all(parts.iter().map(|p| &p[k])).into() };
    let inner_over_r = est(1);

    let single = stream.substream(1);
    let w_parts = par_chunks(pairs, |c, len| {
        let mut s = single.substream(c);
        let mut x = vec![0.0; n];
        let mut sum = vec![0.0; n];
        let mut sq = 0.0;
        for _ in 0..len {
            sample_vector_into(model, &mut s, &mut x);
            let q: f64 = x.iter().map(|v| v * v).sum();
            sum.iter_mut().zip(&x).for_each(|(acc, v)| *acc += q * v);
            sq += q * q * q;
        }
        (len as f64, sum, sq)
    });
    // |E W|² for W = |X|²X, unbiased as |W̄|² − tr(Cov W)/m; SE from batches.
    let unbiased = |cnt: f64, sum: &[f64], sq: f64| {
        let mean2: f64 = sum.iter().map(|v| (v / cnt).powi(2)).sum();
        let trace = (sq - cnt * mean2) / (cnt - 1.0);
        (mean2 - trace / cnt) / (2.0 * nf * nf)
    };
    let mut batches = vec![(0.0, vec![0.0; n], 0.0); NS_BATCHES];
    for (c, p) in w_parts.iter().enumerate() {
        let b = &mut batches[c % NS_BATCHES];
        b.0 += p.0;
        b.1.iter_mut().zip(&p.1).for_each(|(a, v)| *a += v);
        b.2 += p.2;
    }
    let (mut cnt, mut sum, mut sq) = (0.0, vec![0.0; n], 0.0);
    for b in &batches {
        cnt += b.0;
        sum.iter_mut().zip(&b.1).for_each(|(a, v)| *a += v);
        sq += b.2;
    }
    let used: Vec<f64> = batches.iter().filter(|b| b.0 >= 2.0).map(|b| unbiased(b.0, &b.1, b.2)).collect();
    let moment_se = if used.len() >= 2 { MeanVar::from_slice(&used).se() } else { f64::INFINITY };

    Ok(NonsymmetricQuantities {
        model: model.name,
        n,
        pairs,
        inner_over_norm: est(0),
        inner_over_r,
        n_inner_over_r: Estimate::new(nf * inner_over_r.value, nf * inner_over_r.se),
        inner_r4: est(2),
        inner_r4_reduced: est(3),
        moment_side: Estimate::new(unbiased(cnt, &sum, sq), moment_se),
    })
}
