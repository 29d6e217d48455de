//! Online-phase fingerprint matching against a radio map.
//!
//! Deterministic estimators rank every reference point by Euclidean distance
//! in signal space and combine the best `k` positions; the probabilistic
//! estimator picks the maximum-posterior reference point under independent
//! per-AP Gaussian likelihoods and a uniform prior.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Fingerprint, Point, RadioMap, SENSITIVITY_FLOOR_DBM};

/// Regularizer in the inverse-distance weight, dB.
pub const WEIGHT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nn,
    Knn,
    Wknn,
    Bayes,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Nn => "nn",
            Algorithm::Knn => "knn",
            Algorithm::Wknn => "wknn",
            Algorithm::Bayes => "bayes",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nn" => Ok(Algorithm::Nn),
            "knn" => Ok(Algorithm::Knn),
            "wknn" => Ok(Algorithm::Wknn),
            "bayes" => Ok(Algorithm::Bayes),
            other => Err(Error::format("algorithm", format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizerConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    pub missing_fill: f64,
    pub bayes_sigma: f64,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        LocalizerConfig {
            algorithm: Algorithm::Wknn,
            k: 3,
            missing_fill: SENSITIVITY_FLOOR_DBM,
            bayes_sigma: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedPoint {
    pub rp_id: u32,
    pub distance: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionEstimate {
    pub position: Point,
    pub floor: i32,
    pub contributors: Vec<RankedPoint>,
}

/// Signal-space Euclidean distance over the union of both MAC sets, with
/// `fill` standing in for a missing reading.
pub fn euclidean_distance(a: &Fingerprint, b: &Fingerprint, fill: f64) -> f64 {
    a.union_with(b)
        .map(|(_, x, y)| {
            let d = x.unwrap_or(fill) - y.unwrap_or(fill);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Every reference point ordered by ascending distance, ties by id.
pub fn rank_reference_points(query: &Fingerprint, map: &RadioMap, cfg: &LocalizerConfig) -> Result<Vec<RankedPoint>> {
    if map.is_empty() {
        return Err(Error::NoReferencePoints);
    }
    let mut ranked: Vec<RankedPoint> = map
        .points
        .iter()
        .map(|rp| {
            let distance = euclidean_distance(query, &rp.fingerprint, cfg.missing_fill);
            RankedPoint {
                rp_id: rp.id,
                distance,
                weight: 1.0 / (distance + WEIGHT_EPS),
            }
        })
        .collect();
    ranked.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.rp_id.cmp(&b.rp_id)));
    Ok(ranked)
}

fn rp_position(map: &RadioMap, id: u32) -> (Point, i32) {
    let rp = map.get(id).expect("ranked id comes from the map");
    (rp.position, rp.floor)
}

/// Weighted centroid of the top `k` ranked points; `weight_of` picks the
/// weight for each contributor. The floor is the top-ranked point's floor.
fn centroid(
    map: &RadioMap,
    ranked: Vec<RankedPoint>,
    k: usize,
    weight_of: impl Fn(&RankedPoint) -> f64,
) -> Result<PositionEstimate> {
    if k == 0 || k > ranked.len() {
        return Err(Error::InsufficientReferencePoints {
            k,
            available: ranked.len(),
        });
    }
    let mut contributors = ranked;
    contributors.truncate(k);
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    for c in &contributors {
        let (p, _) = rp_position(map, c.rp_id);
        let w = weight_of(c);
        sx += w * p.x;
        sy += w * p.y;
        sw += w;
    }
    let (_, floor) = rp_position(map, contributors[0].rp_id);
    Ok(PositionEstimate {
        position: Point::new(sx / sw, sy / sw),
        floor,
        contributors,
    })
}

pub fn estimate_nn(query: &Fingerprint, map: &RadioMap, cfg: &LocalizerConfig) -> Result<PositionEstimate> {
    let mut ranked = rank_reference_points(query, map, cfg)?;
    ranked.truncate(1);
    let (position, floor) = rp_position(map, ranked[0].rp_id);
    Ok(PositionEstimate {
        position,
        floor,
        contributors: ranked,
    })
}

/// Unweighted centroid of the `k` best points.
pub fn estimate_knn(query: &Fingerprint, map: &RadioMap, cfg: &LocalizerConfig) -> Result<PositionEstimate> {
    if cfg.k == 1 {
        return estimate_nn(query, map, cfg);
    }
    let ranked = rank_reference_points(query, map, cfg)?;
    centroid(map, ranked, cfg.k, |_| 1.0)
}

/// Inverse-distance weighted centroid of the `k` best points.
pub fn estimate_wknn(query: &Fingerprint, map: &RadioMap, cfg: &LocalizerConfig) -> Result<PositionEstimate> {
    if cfg.k == 1 {
        return estimate_nn(query, map, cfg);
    }
    let ranked = rank_reference_points(query, map, cfg)?;
    centroid(map, ranked, cfg.k, |c| c.weight)
}

fn log_likelihood(query: &Fingerprint, reference: &Fingerprint, cfg: &LocalizerConfig) -> f64 {
    let var = cfg.bayes_sigma * cfg.bayes_sigma;
    let log_norm = -0.5 * (2.0 * std::f64::consts::PI * var).ln();
    query
        .union_with(reference)
        .map(|(_, q, r)| {
            let d = q.unwrap_or(cfg.missing_fill) - r.unwrap_or(cfg.missing_fill);
            log_norm - d * d / (2.0 * var)
        })
        .sum()
}

/// Posterior probability of each reference point (in map order) under a
/// uniform prior, normalized in log space.
pub fn bayes_posterior(query: &Fingerprint, map: &RadioMap, cfg: &LocalizerConfig) -> Result<Vec<(u32, f64)>> {
    if map.is_empty() {
        return Err(Error::NoReferencePoints);
    }
    let prior = -(map.len() as f64).ln();
    let logs: Vec<f64> = map
        .points
        .iter()
        .map(|rp| log_likelihood(query, &rp.fingerprint, cfg) + prior)
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(map
        .points
        .iter()
        .zip(unnorm)
        .map(|(rp, u)| (rp.id, u / total))
        .collect())
}

/// Maximum-posterior reference point; ties go to the smallest id.
pub fn estimate_bayes(query: &Fingerprint, map: &RadioMap, cfg: &LocalizerConfig) -> Result<PositionEstimate> {
    let post = bayes_posterior(query, map, cfg)?;
    let (best_id, best_p) = post
        .iter()
        .copied()
        .reduce(|best, cur| {
            if cur.1 > best.1 || (cur.1 == best.1 && cur.0 < best.0) {
                cur
            } else {
                best
            }
        })
        .expect("non-empty map");
    let (position, floor) = rp_position(map, best_id);
    let distance = euclidean_distance(query, &map.get(best_id).unwrap().fingerprint, cfg.missing_fill);
    Ok(PositionEstimate {
        position,
        floor,
        contributors: vec![RankedPoint {
            rp_id: best_id,
            distance,
            weight: best_p,
        }],
    })
}

/// Dispatches on `cfg.algorithm`.
pub fn estimate(query: &Fingerprint, map: &RadioMap, cfg: &LocalizerConfig) -> Result<PositionEstimate> {
    match cfg.algorithm {
        Algorithm::Nn => estimate_nn(query, map, cfg),
        Algorithm::Knn => estimate_knn(query, map, cfg),
        Algorithm::Wknn => estimate_wknn(query, map, cfg),
        Algorithm::Bayes => estimate_bayes(query, map, cfg),
    }
}
