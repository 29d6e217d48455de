//! Dynamic radio map construction: one reference point per Wi-Fi scan at the
//! walker's recovered position, then pairwise merging of redundant points.
//!
//! Merge rule for a same-floor pair at planar distance d:
//!
//! * d < d_min: merge unconditionally;
//! * d_min ≤ d < d_max: merge iff the mean absolute RSS difference over the
//!   APs seen by both points is at most `rss_threshold`;
//! * otherwise keep both.
//!
//! Merging runs greedily to a fixed point, always taking the mergeable pair
//! with the smallest distance (ties to the smallest id pair).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Fingerprint, Provenance, RadioMap, ReferencePoint, Track, WifiScan, SENSITIVITY_FLOOR_DBM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MergeConfig {
    pub d_min: f64,
    pub d_max: f64,
    pub rss_threshold: f64,
    pub sensitivity_floor: f64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig {
            d_min: 2.0,
            d_max: 4.0,
            rss_threshold: 4.0,
            sensitivity_floor: SENSITIVITY_FLOOR_DBM,
        }
    }
}

impl MergeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min > 0.0 && self.d_min < self.d_max) {
            return Err(Error::format("merge config", "need 0 < d_min < d_max"));
        }
        if !(self.rss_threshold > 0.0) {
            return Err(Error::format("merge config", "rss_threshold must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeOutcome {
    MergeByDistance,
    MergeBySimilarity,
    KeepSeparateFar,
    KeepSeparateDissimilar,
}

impl MergeOutcome {
    pub fn merges(self) -> bool {
        matches!(self, MergeOutcome::MergeByDistance | MergeOutcome::MergeBySimilarity)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MergeOutcome::MergeByDistance => "merge_by_distance",
            MergeOutcome::MergeBySimilarity => "merge_by_similarity",
            MergeOutcome::KeepSeparateFar => "keep_separate_far",
            MergeOutcome::KeepSeparateDissimilar => "keep_separate_dissimilar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeDecision {
    pub outcome: MergeOutcome,
    pub distance: f64,
    pub rss_dif: Option<f64>,
}

/// A decision tagged with the ids of the pair it was made for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoggedDecision {
    pub a: u32,
    pub b: u32,
    pub decision: MergeDecision,
}

impl fmt::Display for LoggedDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.decision;
        write!(f, "pair({},{}) d={:.6} rss_dif=", self.a, self.b, d.distance)?;
        match d.rss_dif {
            Some(v) => write!(f, "{v:.6}")?,
            None => f.write_str("undefined")?,
        }
        write!(f, " outcome={}", d.outcome.as_str())
    }
}

/// One raw reference point per scan, placed at the track pose with the
/// greatest entry time ≤ the scan time. Scans earlier than the track fall
/// back to the first pose.
pub fn assign_reference_points(track: &Track, scans: &[WifiScan]) -> Result<RadioMap> {
    if track.is_empty() {
        return Err(Error::format("track", "cannot place reference points on an empty track"));
    }
    let entries = track.entries();
    let mut points = Vec::with_capacity(scans.len());
    for (i, scan) in scans.iter().enumerate() {
        let idx = match track.index_at_or_before(scan.t) {
            Some(idx) => idx,
            None => {
                log::warn!("scan at t = {} precedes the track; using its first pose", scan.t);
                0
            }
        };
        points.push(ReferencePoint {
            id: i as u32,
            position: entries[idx].pose.position(),
            floor: 0,
            fingerprint: scan.readings.clone(),
            sample_count: 1,
        });
    }
    RadioMap::new(Provenance::Dynamic, points)
}

/// Mean absolute RSS difference over the APs present in both fingerprints;
/// `None` when they share no AP.
pub fn rss_dif(a: &Fingerprint, b: &Fingerprint) -> Option<f64> {
    let (sum, n) = a
        .union_with(b)
        .filter_map(|(_, x, y)| Some((x? - y?).abs()))
        .fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn should_merge(a: &ReferencePoint, b: &ReferencePoint, cfg: &MergeConfig) -> MergeDecision {
    let distance = a.position.distance(&b.position);
    if a.floor != b.floor {
        return MergeDecision {
            outcome: MergeOutcome::KeepSeparateFar,
            distance,
            rss_dif: None,
        };
    }
    if distance < cfg.d_min {
        return MergeDecision {
            outcome: MergeOutcome::MergeByDistance,
            distance,
            rss_dif: None,
        };
    }
    if distance >= cfg.d_max {
        return MergeDecision {
            outcome: MergeOutcome::KeepSeparateFar,
            distance,
            rss_dif: None,
        };
    }
    let dif = rss_dif(&a.fingerprint, &b.fingerprint);
    let outcome = match dif {
        Some(v) if v <= cfg.rss_threshold => MergeOutcome::MergeBySimilarity,
        _ => MergeOutcome::KeepSeparateDissimilar,
    };
    MergeDecision {
        outcome,
        distance,
        rss_dif: dif,
    }
}

/// Midpoint position and per-AP mean fingerprint; an AP seen on one side
/// only is averaged against the sensitivity floor.
pub fn merge_pair(a: &ReferencePoint, b: &ReferencePoint, cfg: &MergeConfig) -> ReferencePoint {
    let floor = cfg.sensitivity_floor;
    let fingerprint = a
        .fingerprint
        .union_with(&b.fingerprint)
        .map(|(mac, x, y)| (mac.clone(), (x.unwrap_or(floor) + y.unwrap_or(floor)) / 2.0))
        .collect();
    ReferencePoint {
        id: a.id.min(b.id),
        position: a.position.midpoint(&b.position),
        floor: a.floor,
        fingerprint,
        sample_count: a.sample_count + b.sample_count,
    }
}

/// Result of running the merge process on a raw map.
#[derive(Debug, Clone)]
pub struct MergeRun {
    pub map: RadioMap,
    /// Every pair decision evaluated, in evaluation order.
    pub decisions: Vec<LoggedDecision>,
    pub merges: usize,
}

/// Greedy smallest-distance-first merging to a fixed point.
pub fn merge_reference_points(raw: &RadioMap, cfg: &MergeConfig) -> MergeRun {
    let mut slots: Vec<Option<ReferencePoint>> = raw.points.iter().cloned().map(Some).collect();
    let n = slots.len();
    let mut decisions = Vec::new();
    // pair cache, indexed [i][j] with i < j
    let mut cache: Vec<Vec<Option<MergeDecision>>> = vec![vec![None; n]; n];

    let evaluate = |slots: &[Option<ReferencePoint>], i: usize, j: usize, log: &mut Vec<LoggedDecision>| {
        let (a, b) = (slots[i].as_ref().unwrap(), slots[j].as_ref().unwrap());
        let (a, b) = if a.id < b.id { (a, b) } else { (b, a) };
        let decision = should_merge(a, b, cfg);
        log.push(LoggedDecision { a: a.id, b: b.id, decision });
        decision
    };

    for i in 0..n {
        for j in i + 1..n {
            cache[i][j] = Some(evaluate(&slots, i, j, &mut decisions));
        }
    }

    let mut merges = 0;
    loop {
        let mut best: Option<(f64, u32, u32, usize, usize)> = None;
        for i in 0..n {
            if slots[i].is_none() {
                continue;
            }
            for j in i + 1..n {
                let Some(d) = cache[i][j] else { continue };
                if !d.outcome.merges() {
                    continue;
                }
                let (ia, ib) = (slots[i].as_ref().unwrap().id, slots[j].as_ref().unwrap().id);
                let key = (d.distance, ia.min(ib), ia.max(ib), i, j);
                let better = match &best {
                    None => true,
                    Some(b) => (key.0, key.1, key.2) < (b.0, b.1, b.2),
                };
                if better {
                    best = Some(key);
                }
            }
        }
        let Some((_, _, _, i, j)) = best else { break };

        let merged = merge_pair(slots[i].as_ref().unwrap(), slots[j].as_ref().unwrap(), cfg);
        // The merged point keeps the slot of the operand whose id it inherits.
        let (keep, drop) = if slots[i].as_ref().unwrap().id == merged.id { (i, j) } else { (j, i) };
        slots[keep] = Some(merged);
        slots[drop] = None;
        merges += 1;
        for k in 0..n {
            let (lo, hi) = (k.min(drop), k.max(drop));
            if lo != hi {
                cache[lo][hi] = None;
            }
        }
        for k in 0..n {
            if k == keep || slots[k].is_none() {
                continue;
            }
            let (lo, hi) = (k.min(keep), k.max(keep));
            cache[lo][hi] = Some(evaluate(&slots, lo, hi, &mut decisions));
        }
    }

    let mut points: Vec<ReferencePoint> = slots.into_iter().flatten().collect();
    points.sort_by_key(|rp| rp.id);
    MergeRun {
        map: RadioMap {
            provenance: Provenance::Dynamic,
            points,
        },
        decisions,
        merges,
    }
}

/// Raw reference point assignment followed by merging.
pub fn build_dynamic_map(track: &Track, scans: &[WifiScan], cfg: &MergeConfig) -> Result<RadioMap> {
    build_dynamic_map_with_log(track, scans, cfg).map(|r| r.map)
}

pub fn build_dynamic_map_with_log(track: &Track, scans: &[WifiScan], cfg: &MergeConfig) -> Result<MergeRun> {
    cfg.validate()?;
    let raw = assign_reference_points(track, scans)?;
    Ok(merge_reference_points(&raw, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MacId, Point, Pose, TrackEntry};

    fn mac(c: char) -> MacId {
        MacId::parse(&format!("aa:bb:cc:dd:ee:{c}{c}")).unwrap()
    }

    fn fp(pairs: &[(char, f64)]) -> Fingerprint {
        pairs.iter().map(|&(c, v)| (mac(c), v)).collect()
    }

    fn rp(id: u32, x: f64, y: f64, f: Fingerprint) -> ReferencePoint {
        ReferencePoint { id, position: Point::new(x, y), floor: 0, fingerprint: f, sample_count: 1 }
    }

    fn straight_track(n: u32) -> Track {
        Track::new(
            (0..=n)
                .map(|k| TrackEntry { t: k as f64 * 0.5, pose: Pose::new(0.0, 0.75 * k as f64, 0.0), step: k })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn assign_examples() {
        let track = straight_track(25);
        let scans: Vec<_> = [0.0, 5.0, 10.0]
            .iter()
            .map(|&t| WifiScan { t, readings: fp(&[('a', -50.0)]) })
            .collect();
        let map = assign_reference_points(&track, &scans).unwrap();
        assert_eq!(map.len(), 3);
        assert_eq!(map.provenance, Provenance::Dynamic);
        // t = 5.0 coincides with step 10: the post-step pose is used
        let ys: Vec<f64> = map.points.iter().map(|p| p.position.y).collect();
        assert_eq!(ys, vec![0.0, 7.5, 15.0]);

        let between = assign_reference_points(&track, &[WifiScan { t: 5.2, readings: fp(&[]) }]).unwrap();
        assert_eq!(between.points[0].position.y, 7.5);

        let early = assign_reference_points(&track, &[WifiScan { t: -1.0, readings: fp(&[]) }]).unwrap();
        assert_eq!(early.points[0].position.y, 0.0);

        assert!(assign_reference_points(&track, &[]).unwrap().is_empty());
    }

    #[test]
    fn rss_dif_examples() {
        let a = fp(&[('a', -50.0), ('b', -60.0)]);
        assert_eq!(rss_dif(&a, &a), Some(0.0));
        assert_eq!(rss_dif(&a, &fp(&[('a', -54.0), ('b', -66.0)])), Some(5.0));
        assert_eq!(rss_dif(&fp(&[('a', -50.0)]), &fp(&[('b', -60.0)])), None);
        // APs seen on one side only are ignored
        assert_eq!(rss_dif(&a, &fp(&[('a', -53.0), ('c', -90.0)])), Some(3.0));
    }

    #[test]
    fn should_merge_examples() {
        let cfg = MergeConfig::default();
        let base = fp(&[('a', -50.0), ('b', -60.0)]);
        let near = fp(&[('a', -52.0), ('b', -62.0)]);
        let far = fp(&[('a', -56.0), ('b', -66.0)]);

        let d = should_merge(&rp(0, 0., 0., base.clone()), &rp(1, 1., 0., far.clone()), &cfg);
        assert_eq!(d.outcome, MergeOutcome::MergeByDistance);
        assert_eq!(d.rss_dif, None);

        let d = should_merge(&rp(0, 0., 0., base.clone()), &rp(1, 3., 0., near), &cfg);
        assert_eq!(d.outcome, MergeOutcome::MergeBySimilarity);
        assert_eq!(d.rss_dif, Some(2.0));

        let d = should_merge(&rp(0, 0., 0., base.clone()), &rp(1, 3., 0., far), &cfg);
        assert_eq!(d.outcome, MergeOutcome::KeepSeparateDissimilar);
        assert_eq!(d.rss_dif, Some(6.0));

        let d = should_merge(&rp(0, 0., 0., base.clone()), &rp(1, 5., 0., base.clone()), &cfg);
        assert_eq!(d.outcome, MergeOutcome::KeepSeparateFar);

        // gate boundaries: d_min is already in the similarity band, d_max is far
        let d = should_merge(&rp(0, 0., 0., base.clone()), &rp(1, 2., 0., fp(&[('c', -40.0)])), &cfg);
        assert_eq!(d.outcome, MergeOutcome::KeepSeparateDissimilar);
        assert_eq!(d.rss_dif, None);
        let d = should_merge(&rp(0, 0., 0., base.clone()), &rp(1, 4., 0., base.clone()), &cfg);
        assert_eq!(d.outcome, MergeOutcome::KeepSeparateFar);
        // threshold is inclusive
        let d = should_merge(&rp(0, 0., 0., base.clone()), &rp(1, 3., 0., fp(&[('a', -54.0), ('b', -64.0)])), &cfg);
        assert_eq!(d.outcome, MergeOutcome::MergeBySimilarity);

        let mut other_floor = rp(1, 0.5, 0., base.clone());
        other_floor.floor = 1;
        let d = should_merge(&rp(0, 0., 0., base), &other_floor, &cfg);
        assert_eq!(d.outcome, MergeOutcome::KeepSeparateFar);
    }

    #[test]
    fn merge_pair_examples() {
        let cfg = MergeConfig::default();
        let m = merge_pair(&rp(3, 0., 0., fp(&[('a', -50.0)])), &rp(1, 2., 0., fp(&[('a', -60.0)])), &cfg);
        assert_eq!(m.position, Point::new(1.0, 0.0));
        assert_eq!(m.fingerprint, fp(&[('a', -55.0)]));
        assert_eq!(m.id, 1);
        assert_eq!(m.sample_count, 2);

        let m = merge_pair(&rp(0, 0., 0., fp(&[('a', -50.0), ('b', -50.0)])), &rp(1, 0., 0., fp(&[('a', -50.0)])), &cfg);
        assert_eq!(m.fingerprint, fp(&[('a', -50.0), ('b', -75.0)]));

        let a = rp(4, 1.5, -2.0, fp(&[('a', -61.0), ('c', -70.5)]));
        let m = merge_pair(&a, &a, &cfg);
        assert_eq!(m.position, a.position);
        assert_eq!(m.fingerprint, a.fingerprint);
        assert_eq!(m.sample_count, 2);
    }

    #[test]
    fn build_keeps_distant_points() {
        let track = Track::new(
            (0..3)
                .map(|k| TrackEntry { t: 5.0 * k as f64, pose: Pose::new(5.0 * k as f64, 0.0, 0.0), step: k })
                .collect(),
        )
        .unwrap();
        let scans: Vec<_> = (0..3).map(|k| WifiScan { t: 5.0 * k as f64, readings: fp(&[('a', -50.0)]) }).collect();
        let raw = assign_reference_points(&track, &scans).unwrap();
        let built = build_dynamic_map(&track, &scans, &MergeConfig::default()).unwrap();
        assert_eq!(built, raw);
    }

    #[test]
    fn build_merges_close_pair_to_midpoint() {
        let raw = RadioMap::new(
            Provenance::Dynamic,
            vec![rp(0, 0., 0., fp(&[('a', -50.0)])), rp(1, 1., 0., fp(&[('a', -70.0)]))],
        )
        .unwrap();
        let run = merge_reference_points(&raw, &MergeConfig::default());
        assert_eq!(run.map.len(), 1);
        assert_eq!(run.map.points[0].position, Point::new(0.5, 0.0));
        assert_eq!(run.merges, 1);
    }

    #[test]
    fn greedy_three_collinear() {
        let same = fp(&[('a', -50.0), ('b', -60.0)]);
        let raw = RadioMap::new(
            Provenance::Dynamic,
            vec![rp(0, 0., 0., same.clone()), rp(1, 1.5, 0., same.clone()), rp(2, 3.0, 0., same)],
        )
        .unwrap();
        let run = merge_reference_points(&raw, &MergeConfig::default());
        // (0,1) and (1,2) tie at 1.5 m; the lower id pair goes first, then the
        // midpoint 0.75 merges with 3.0 at 2.25 m on similarity.
        assert_eq!(run.map.len(), 1);
        assert_eq!(run.map.points[0].position, Point::new(1.875, 0.0));
        assert_eq!(run.map.points[0].sample_count, 3);
        assert_eq!(run.map.points[0].id, 0);
    }

    #[test]
    fn decision_log_format() {
        let raw = RadioMap::new(
            Provenance::Dynamic,
            vec![rp(0, 0., 0., fp(&[('a', -50.0)])), rp(1, 3., 0., fp(&[('b', -70.0)]))],
        )
        .unwrap();
        let run = merge_reference_points(&raw, &MergeConfig::default());
        assert_eq!(run.decisions.len(), 1);
        assert_eq!(
            run.decisions[0].to_string(),
            "pair(0,1) d=3.000000 rss_dif=undefined outcome=keep_separate_dissimilar"
        );
    }

    #[test]
    fn merge_config_validation() {
        assert!(MergeConfig::default().validate().is_ok());
        assert!(MergeConfig { d_min: 4.0, d_max: 2.0, ..Default::default() }.validate().is_err());
        assert!(MergeConfig { rss_threshold: 0.0, ..Default::default() }.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_rp(id: u32) -> impl Strategy<Value = ReferencePoint> {
            (0.0f64..10.0, 0.0f64..10.0, proptest::collection::btree_map(0u8..6, -100.0f64..-30.0, 0..5))
                .prop_map(move |(x, y, m)| {
                    let f = m.into_iter().map(|(k, v)| (MacId::synthetic(k as u32), v)).collect();
                    rp(id, x, y, f)
                })
        }

        proptest! {
            #[test]
            fn merge_pair_commutes(a in arb_rp(0), b in arb_rp(1)) {
                let cfg = MergeConfig::default();
                let ab = merge_pair(&a, &b, &cfg);
                let ba = merge_pair(&b, &a, &cfg);
                prop_assert_eq!(ab.position, ba.position);
                prop_assert_eq!(&ab.fingerprint, &ba.fingerprint);
                prop_assert!(ab.fingerprint.iter().all(|(_, v)| (-100.0..=0.0).contains(&v)));
            }

            #[test]
            fn should_merge_symmetric(a in arb_rp(0), b in arb_rp(1)) {
                let cfg = MergeConfig::default();
                prop_assert_eq!(should_merge(&a, &b, &cfg), should_merge(&b, &a, &cfg));
            }
        }
    }
}
