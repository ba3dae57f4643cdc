//! Deterministic reductions and small statistical helpers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Pairwise (cascade) summation; the association order depends only on the
/// slice length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// A Monte Carlo value with its standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(value: f64, se: f64) -> Self {
        Self { value, se }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, se: 0.0 }
    }
}

impl From<MeanVar> for Estimate {
    fn from(mv: MeanVar) -> Self {
        Self { value: mv.mean, se: mv.se() }
    }
}

/// Running count / mean / second central moment, mergeable in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanVar {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl MeanVar {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &MeanVar) -> MeanVar {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / n as f64;
        MeanVar { count: n, mean, m2 }
    }

    pub fn from_slice(xs: &[f64]) -> MeanVar {
        let mut mv = MeanVar::default();
        for &x in xs {
            mv.push(x);
        }
        mv
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Merge a sequence of partial accumulators left to right.
pub fn merge_all<'a, I: IntoIterator<Item = &'a MeanVar>>(parts: I) -> MeanVar {
    parts.into_iter().fold(MeanVar::default(), |acc, p| acc.merge(p))
}

/// Chunk size used by every Monte Carlo estimator.
pub const CHUNK: usize = 4096;

/// Run `f(chunk_index, chunk_len)` over `ceil(total / CHUNK)` chunks in
/// parallel and return the results in chunk order.
///
/// The chunking depends only on `total`, so the output is independent of the
/// number of worker threads.
pub fn par_chunks<T, F>(total: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, usize) -> T + Sync + Send,
{
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = if c + 1 == chunks { total - c * CHUNK } else { CHUNK };
            f(c as u64, len)
        })
        .collect()
}

/// Ordinary least squares fit y = intercept + slope·x.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// 95% confidence interval for the slope (Student t with k − 2 dof).
    pub slope_ci: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

pub fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let k = x.len();
    if k < 2 || k != y.len() {
        return None;
    }
    let kf = k as f64;
    let mx = x.iter().sum::<f64>() / kf;
    let my = y.iter().sum::<f64>() / kf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let (slope_se, slope_ci) = if k > 2 {
        let se = (sse / (kf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, kf - 2.0)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::INFINITY);
        (se, (slope - t * se, slope + t * se))
    } else {
        (f64::INFINITY, (f64::NEG_INFINITY, f64::INFINITY))
    };
    Some(LineFit { slope, intercept, slope_se, slope_ci, r_squared, points: k })
}

/// Empirical quantile by linear interpolation between order statistics
/// (`sorted` must be ascending).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ols_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let fit = ols(&x, &y).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert_eq!(quantile_sorted(&v, 1.0), 5.0);
        assert_abs_diff_eq!(quantile_sorted(&v, 0.125), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn chunks_cover_total() {
        let lens = par_chunks(10_000, |_, len| len);
        assert_eq!(lens.iter().sum::<usize>(), 10_000);
        assert_eq!(lens.len(), 3);
    }

    proptest! {
        #[test]
        fn merge_matches_single_pass(xs in proptest::collection::vec(-1e3f64..1e3, 2..200), split in 0usize..200) {
            let split = split.min(xs.len());
            let whole = MeanVar::from_slice(&xs);
            let merged = MeanVar::from_slice(&xs[..split]).merge(&MeanVar::from_slice(&xs[split..]));
            prop_assert_eq!(whole.count, merged.count);
            prop_assert!((whole.mean - merged.mean).abs() <= 1e-9 * (1.0 + whole.mean.abs()));
            prop_assert!((whole.m2 - merged.m2).abs() <= 1e-7 * (1.0 + whole.m2.abs()));
        }

        #[test]
        fn pairwise_close_to_naive(xs in proptest::collection::vec(-1.0f64..1.0, 0..500)) {
            let naive: f64 = xs.iter().sum();
            prop_assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
        }
    }
}
