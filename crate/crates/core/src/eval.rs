//! Evaluation metrics: track error against ground truth, summary statistics,
//! empirical CDFs, K sweeps and static-vs-dynamic fingerprint comparison.
//!
//! Percentiles interpolate linearly between closest ranks: for sorted values
//! x₀..x_{n−1} the p-quantile sits at rank h = (n−1)·p.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localizer::{estimate, Algorithm, LocalizerConfig};
use crate::model::{Fingerprint, Point, RadioMap, Track};

pub const PERCENTILE_METHOD: &str = "linear interpolation between closest ranks, h = (n-1)p";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub minimum: f64,
    pub median: f64,
    pub mean: f64,
    pub p90: f64,
    pub maximum: f64,
    pub count: usize,
}

/// Empirical CDF as (value, cumulative fraction) steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfSeries {
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackErrors {
    pub errors: Vec<f64>,
    /// Indices of estimated entries whose time fell outside the truth span.
    pub clamped: Vec<usize>,
}

/// Distance from each estimated entry to the truth position interpolated at
/// the same timestamp.
pub fn track_errors(estimated: &Track, truth: &Track) -> Result<TrackErrors> {
    if estimated.is_empty() || truth.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut errors = Vec::with_capacity(estimated.len());
    let mut clamped = Vec::new();
    for (i, e) in estimated.entries().iter().enumerate() {
        let (p, was_clamped) = truth.position_at(e.t).expect("non-empty truth");
        if was_clamped {
            log::warn!("estimate at t = {} lies outside the truth span; clamped", e.t);
            clamped.push(i);
        }
        errors.push(e.pose.position().distance(&p));
    }
    Ok(TrackErrors { errors, clamped })
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Linear-interpolated percentile, `p` in [0, 1].
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    Ok(quantile_sorted(&sorted(values)?, p.clamp(0.0, 1.0)))
}

pub fn median(values: &[f64]) -> Result<f64> {
    percentile(values, 0.5)
}

pub fn error_stats(errors: &[f64]) -> Result<ErrorStats> {
    let v = sorted(errors)?;
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    Ok(ErrorStats {
        minimum: v[0],
        median: quantile_sorted(&v, 0.5),
        mean,
        p90: quantile_sorted(&v, 0.9),
        maximum: v[v.len() - 1],
        count: v.len(),
    })
}

pub fn error_cdf(errors: &[f64]) -> Result<CdfSeries> {
    let v = sorted(errors)?;
    let n = v.len();
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        // only the last of a run of equal values produces a step
        if i + 1 < n && v[i + 1] == *x {
            continue;
        }
        points.push((*x, (i + 1) as f64 / n as f64));
    }
    Ok(CdfSeries { points })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSweepRow {
    pub algorithm: Algorithm,
    pub k: usize,
    pub median_error: f64,
}

/// Median localization error per (algorithm, k). Queries are evaluated in
/// input order.
pub fn k_sweep(
    map: &RadioMap,
    queries: &[(Fingerprint, Point)],
    algorithms: &[Algorithm],
    k_range: impl IntoIterator<Item = usize> + Clone,
    base: &LocalizerConfig,
) -> Result<Vec<KSweepRow>> {
    let mut rows = Vec::new();
    for &algorithm in algorithms {
        for k in k_range.clone() {
            let cfg = LocalizerConfig { algorithm, k, ..*base };
            let errors = localization_errors(map, queries, &cfg)?;
            rows.push(KSweepRow {
                algorithm,
                k,
                median_error: median(&errors)?,
            });
        }
    }
    Ok(rows)
}

/// Per-query distance between estimate and truth.
pub fn localization_errors(map: &RadioMap, queries: &[(Fingerprint, Point)], cfg: &LocalizerConfig) -> Result<Vec<f64>> {
    queries
        .iter()
        .map(|(fp, truth)| estimate(fp, map, cfg).map(|e| e.position.distance(truth)))
        .collect()
}

/// Pairs every static reference with its nearest dynamic reference point
/// (ties to the smaller id) and pools the absolute RSS differences over the
/// APs both sides heard.
pub fn compare_fingerprints(dynamic: &RadioMap, static_ref: &[(Point, Fingerprint)]) -> Result<ErrorStats> {
    if dynamic.is_empty() {
        return Err(Error::NoReferencePoints);
    }
    let mut diffs = Vec::new();
    for (pos, fp) in static_ref {
        let nearest = dynamic
            .points
            .iter()
            .min_by(|a, b| {
                a.position
                    .distance(pos)
                    .total_cmp(&b.position.distance(pos))
                    .then(a.id.cmp(&b.id))
            })
            .expect("non-empty map");
        diffs.extend(
            fp.union_with(&nearest.fingerprint)
                .filter_map(|(_, s, d)| Some((s? - d?).abs())),
        );
    }
    error_stats(&diffs)
}
