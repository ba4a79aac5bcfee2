//! Aggregates behind the results plots: box plots, ECDFs, success
//! fractions, convergence bands, regression bars and missing-data tables.
//!
//! Sums are taken over sorted values so every aggregate is invariant under
//! permutation of its input.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchlog::RunStatus;
use crate::par::{self, Exec};

pub const Z_95: f64 = 1.96;
pub const WHISKER_IQR: f64 = 1.5;
pub const NOTCH_IQR: f64 = 1.58;
pub const DEFAULT_GRID_STEP: f64 = 0.1;
pub const DEFAULT_SMOOTH_WINDOW: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no defined samples")]
    NoSamples,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

fn defined_sorted(samples: &[Option<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = samples.iter().flatten().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn sorted_sum(sorted: &[f64]) -> f64 {
    sorted.iter().sum()
}

/// Mean and sample standard deviation (n − 1 denominator) of sorted data.
fn mean_std(sorted: &[f64]) -> (f64, Option<f64>) {
    let n = sorted.len() as f64;
    let mean = sorted_sum(sorted) / n;
    if sorted.len() < 2 {
        return (mean, None);
    }
    let mut dev: Vec<f64> = sorted.iter().map(|x| (x - mean) * (x - mean)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, Some((sorted_sum(&dev) / (n - 1.0)).sqrt()))
}

/// Linear interpolation between order statistics at rank `(n − 1)·p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let rank = (sorted.len() - 1) as f64 * p;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub whisker_low: Option<f64>,
    pub whisker_high: Option<f64>,
    /// Median ± 1.58·IQR/√n.
    pub notch_low: Option<f64>,
    pub notch_high: Option<f64>,
    /// Ascending.
    pub outliers: Vec<f64>,
    pub n: usize,
    pub n_missing: usize,
}

pub fn boxplot_stats(samples: &[Option<f64>]) -> BoxStats {
    let v = defined_sorted(samples);
    let n_missing = samples.len() - v.len();
    if v.is_empty() {
        return BoxStats {
            median: None,
            q1: None,
            q3: None,
            whisker_low: None,
            whisker_high: None,
            notch_low: None,
            notch_high: None,
            outliers: Vec::new(),
            n: 0,
            n_missing,
        };
    }
    let q1 = quantile_sorted(&v, 0.25);
    let median = quantile_sorted(&v, 0.5);
    let q3 = quantile_sorted(&v, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr);
    let inside = || v.iter().copied().filter(|x| (lo_fence..=hi_fence).contains(x));
    let whisker_low = inside().next().expect("the median lies inside the fences");
    let whisker_high = inside().next_back().expect("the median lies inside the fences");
    let outliers = v
        .iter()
        .copied()
        .filter(|x| !(lo_fence..=hi_fence).contains(x))
        .collect();
    let notch = NOTCH_IQR * iqr / (v.len() as f64).sqrt();
    BoxStats {
        median: Some(median),
        q1: Some(q1),
        q3: Some(q3),
        whisker_low: Some(whisker_low),
        whisker_high: Some(whisker_high),
        notch_low: Some(median - notch),
        notch_high: Some(median + notch),
        outliers,
        n: v.len(),
        n_missing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcdfPoint {
    pub x: f64,
    pub f: f64,
}

/// Step points at each distinct value; absent samples stay in the
/// denominator, so the curve saturates at the solved fraction.
pub fn ecdf(samples: &[Option<f64>]) -> Result<Vec<EcdfPoint>, StatsError> {
    let v = defined_sorted(samples);
    if v.is_empty() {
        return Err(StatsError::NoSamples);
    }
    let total = samples.len() as f64;
    let mut out: Vec<EcdfPoint> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let f = (i + 1) as f64 / total;
        match out.last_mut() {
            Some(last) if last.x == x => last.f = f,
            _ => out.push(EcdfPoint { x, f }),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessFraction {
    pub successes: usize,
    pub n: usize,
    pub fraction: f64,
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n, "wilson interval needs 0 <= k <= n, n > 0");
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let low = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if k == n { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// Fraction of exact solutions with its 95% Wilson interval. Runs with an
/// unknown status count as failures.
pub fn success_fraction(statuses: &[Option<RunStatus>]) -> Option<SuccessFraction> {
    if statuses.is_empty() {
        return None;
    }
    let k = statuses
        .iter()
        .filter(|s| **s == Some(RunStatus::ExactSolution))
        .count();
    let n = statuses.len();
    let (low, high) = wilson_interval(k, n, Z_95);
    Some(SuccessFraction {
        successes: k,
        n,
        fraction: k as f64 / n as f64,
        low,
        high,
    })
}

/// One run's progress stream as `(t, best_cost)` pairs sorted by time.
pub type Series = Vec<(f64, Option<f64>)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressAggregate {
    pub grid: Vec<f64>,
    pub mean: Vec<Option<f64>>,
    pub ci_low: Vec<Option<f64>>,
    pub ci_high: Vec<Option<f64>>,
    /// Runs contributing at each grid point, before smoothing.
    pub n: Vec<usize>,
    /// Runs with at least one defined sample in `[k, k + 1)` seconds.
    pub counts_1s: Vec<usize>,
}

/// Last defined cost at or before `t`.
pub fn locf(series: &[(f64, Option<f64>)], t: f64) -> Option<f64> {
    let end = series.partition_point(|(st, _)| *st <= t);
    series[..end].iter().rev().find_map(|(_, c)| *c)
}

fn moving_average(values: &[Option<f64>], window: usize) -> Vec<Option<f64>> {
    let left = (window - 1) / 2;
    let right = window - 1 - left;
    (0..values.len())
        .map(|i| {
            values[i]?;
            let lo = i.saturating_sub(left);
            let hi = (i + right).min(values.len() - 1);
            let mut w: Vec<f64> = values[lo..=hi].iter().flatten().copied().collect();
            w.sort_by(f64::total_cmp);
            Some(sorted_sum(&w) / w.len() as f64)
        })
        .collect()
}

pub fn progress_aggregate(
    series: &[Series],
    time_limit: f64,
    grid_step: f64,
    smooth_window: usize,
) -> Result<ProgressAggregate, StatsError> {
    progress_aggregate_with(series, time_limit, grid_step, smooth_window, Exec::default())
}

/// Mean best cost over runs on a fixed time grid, with a normal 95% band
/// for the mean (needs two contributing runs), both smoothed by a centered
/// moving average of `smooth_window` grid points.
pub fn progress_aggregate_with(
    series: &[Series],
    time_limit: f64,
    grid_step: f64,
    smooth_window: usize,
    exec: Exec,
) -> Result<ProgressAggregate, StatsError> {
    if !(grid_step > 0.0) {
        return Err(StatsError::NonPositive("grid_step"));
    }
    if !(time_limit > 0.0) {
        return Err(StatsError::NonPositive("time_limit"));
    }
    if smooth_window == 0 {
        return Err(StatsError::NonPositive("smooth_window"));
    }
    let points = (time_limit / grid_step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..points).map(|i| i as f64 * grid_step).collect();
    let raw: Vec<(Option<f64>, Option<f64>, usize)> = par::map(exec, &grid, |&t| {
        let mut vals: Vec<f64> = series.iter().filter_map(|s| locf(s, t)).collect();
        if vals.is_empty() {
            return (None, None, 0);
        }
        vals.sort_by(f64::total_cmp);
        let (mean, sd) = mean_std(&vals);
        let half = sd.map(|s| Z_95 * s / (vals.len() as f64).sqrt());
        (Some(mean), half, vals.len())
    });
    let mean: Vec<Option<f64>> = raw.iter().map(|r| r.0).collect();
    let half: Vec<Option<f64>> = raw.iter().map(|r| r.1).collect();
    let n = raw.iter().map(|r| r.2).collect();
    let mean = moving_average(&mean, smooth_window);
    let half = moving_average(&half, smooth_window);
    let band = |sign: f64| {
        mean.iter()
            .zip(&half)
            .map(|(m, h)| m.zip(*h).map(|(m, h)| m + sign * h))
            .collect::<Vec<_>>()
    };
    let seconds = time_limit.ceil().max(1.0) as usize;
    let counts_1s = (0..seconds)
        .map(|k| {
            let (a, b) = (k as f64, (k + 1) as f64);
            series
                .iter()
                .filter(|s| s.iter().any(|(t, c)| c.is_some() && *t >= a && *t < b))
                .count()
        })
        .collect();
    Ok(ProgressAggregate {
        grid,
        ci_low: band(-1.0),
        ci_high: band(1.0),
        mean,
        n,
        counts_1s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionBar {
    pub version: String,
    pub mean: f64,
    /// s/√n; absent for a single sample.
    pub std_error: Option<f64>,
    pub n: usize,
}

/// One bar per version with at least one defined sample, ordered by
/// version string.
pub fn regression_aggregate(groups: &[(String, Vec<Option<f64>>)]) -> Vec<RegressionBar> {
    let mut versions: Vec<&str> = groups.iter().map(|(v, _)| v.as_str()).collect();
    versions.sort_unstable();
    versions.dedup();
    versions
        .into_iter()
        .filter_map(|ver| {
            let all: Vec<Option<f64>> = groups
                .iter()
                .filter(|(v, _)| v == ver)
                .flat_map(|(_, s)| s.iter().copied())
                .collect();
            let v = defined_sorted(&all);
            if v.is_empty() {
                return None;
            }
            let (mean, sd) = mean_std(&v);
            Some(RegressionBar {
                version: ver.to_string(),
                mean,
                std_error: sd.map(|s| s / (v.len() as f64).sqrt()),
                n: v.len(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingRow {
    pub planner: String,
    pub n_total: usize,
    pub n_missing: usize,
}

pub fn missing_counts(samples: &[(String, Vec<Option<f64>>)]) -> Vec<MissingRow> {
    samples
        .iter()
        .map(|(planner, s)| MissingRow {
            planner: planner.clone(),
            n_total: s.len(),
            n_missing: s.iter().filter(|x| x.is_none()).count(),
        })
        .collect()
}

/// Box statistics for many planners at once.
pub fn boxplot_batch(samples: &[Vec<Option<f64>>], exec: Exec) -> Vec<BoxStats> {
    par::map(exec, samples, |s| boxplot_stats(s))
}
