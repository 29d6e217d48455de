//! Shared domain types: MAC identifiers, fingerprints, radio maps, scans,
//! floorplans, poses and tracks, plus the segment geometry used for map
//! matching.
//!
//! Coordinates are planar meters with +y pointing "north". Headings follow
//! the step model `x += l·sin Ψ, y += l·cos Ψ`, so Ψ = 0 walks along +y and
//! Ψ = π/2 along +x.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Receiver sensitivity floor in dBm. Readings below it are clamped on input.
pub const SENSITIVITY_FLOOR_DBM: f64 = -100.0;

/// Absolute tolerance (m) for collinearity in the segment predicates.
pub const GEOMETRY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Wraps an angle into (−π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Access point hardware address in canonical `aa:bb:cc:dd:ee:ff` form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MacId(String);

impl MacId {
    /// Accepts 12 hex digits, optionally grouped in pairs by `:` or `-`, in
    /// any letter case.
    pub fn parse(raw: &str) -> Result<Self> {
        let trimmed = raw.trim();
        let digits: String = trimmed.chars().filter(|c| *c != ':' && *c != '-').collect();
        let grouped_ok = {
            let parts: Vec<&str> = trimmed.split([':', '-']).collect();
            parts.len() == 1 || (parts.len() == 6 && parts.iter().all(|p| p.len() == 2))
        };
        if digits.len() != 12 || !grouped_ok || !digits.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::InvalidMac(raw.to_string()));
        }
        let lower = digits.to_ascii_lowercase();
        let mut canon = String::with_capacity(17);
        for (i, pair) in lower.as_bytes().chunks(2).enumerate() {
            if i > 0 {
                canon.push(':');
            }
            canon.push(pair[0] as char);
            canon.push(pair[1] as char);
        }
        Ok(MacId(canon))
    }

    /// Synthetic locally-administered address derived from an index.
    pub fn synthetic(index: u32) -> Self {
        let b = index.to_be_bytes();
        MacId(format!("02:00:{:02x}:{:02x}:{:02x}:{:02x}", b[0], b[1], b[2], b[3]))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MacId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for MacId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MacId::parse(s)
    }
}

impl Serialize for MacId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for MacId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        MacId::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Per-AP RSS readings in dBm, ordered by MAC.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fingerprint {
    readings: BTreeMap<MacId, f64>,
}

impl Fingerprint {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a reading, clamping it to the sensitivity floor.
    pub fn insert(&mut self, mac: MacId, rss: f64) {
        self.readings.insert(mac, rss.max(SENSITIVITY_FLOOR_DBM));
    }

    pub fn get(&self, mac: &MacId) -> Option<f64> {
        self.readings.get(mac).copied()
    }

    pub fn contains(&self, mac: &MacId) -> bool {
        self.readings.contains_key(mac)
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MacId, f64)> + '_ {
        self.readings.iter().map(|(m, v)| (m, *v))
    }

    pub fn macs(&self) -> impl Iterator<Item = &MacId> + '_ {
        self.readings.keys()
    }

    /// Walks the union of both MAC sets in order, yielding the pair of
    /// readings with `None` where a side has no reading.
    pub fn union_with<'a>(
        &'a self,
        other: &'a Fingerprint,
    ) -> impl Iterator<Item = (&'a MacId, Option<f64>, Option<f64>)> + 'a {
        let mut a = self.readings.iter().peekable();
        let mut b = other.readings.iter().peekable();
        std::iter::from_fn(move || match (a.peek(), b.peek()) {
            (None, None) => None,
            (Some(_), None) => a.next().map(|(m, v)| (m, Some(*v), None)),
            (None, Some(_)) => b.next().map(|(m, v)| (m, None, Some(*v))),
            (Some((ma, _)), Some((mb, _))) => match ma.cmp(mb) {
                std::cmp::Ordering::Less => a.next().map(|(m, v)| (m, Some(*v), None)),
                std::cmp::Ordering::Greater => b.next().map(|(m, v)| (m, None, Some(*v))),
                std::cmp::Ordering::Equal => {
                    let (m, va) = a.next().unwrap();
                    let (_, vb) = b.next().unwrap();
                    Some((m, Some(*va), Some(*vb)))
                }
            },
        })
    }

    /// Adds `delta` dB to every reading without clamping.
    pub fn shifted(&self, delta: f64) -> Fingerprint {
        Fingerprint {
            readings: self.readings.iter().map(|(m, v)| (m.clone(), v + delta)).collect(),
        }
    }
}

impl FromIterator<(MacId, f64)> for Fingerprint {
    fn from_iter<I: IntoIterator<Item = (MacId, f64)>>(iter: I) -> Self {
        let mut fp = Fingerprint::new();
        for (m, v) in iter {
            fp.insert(m, v);
        }
        fp
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.readings.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fingerprint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(d)?;
        let mut fp = Fingerprint::new();
        for (k, v) in raw {
            let mac = MacId::parse(&k).map_err(serde::de::Error::custom)?;
            if fp.contains(&mac) {
                return Err(serde::de::Error::custom(format!("duplicate MAC {mac}")));
            }
            if !v.is_finite() {
                return Err(serde::de::Error::custom(format!("non-finite RSS for {mac}")));
            }
            fp.insert(mac, v);
        }
        Ok(fp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ReferencePointWire", into = "ReferencePointWire")]
pub struct ReferencePoint {
    pub id: u32,
    pub position: Point,
    pub floor: i32,
    pub fingerprint: Fingerprint,
    pub sample_count: u32,
}

#[derive(Serialize, Deserialize)]
struct ReferencePointWire {
    id: u32,
    x: f64,
    y: f64,
    floor: i32,
    sample_count: u32,
    fingerprint: Fingerprint,
}

impl From<ReferencePointWire> for ReferencePoint {
    fn from(w: ReferencePointWire) -> Self {
        ReferencePoint {
            id: w.id,
            position: Point::new(w.x, w.y),
            floor: w.floor,
            fingerprint: w.fingerprint,
            sample_count: w.sample_count,
        }
    }
}

impl From<ReferencePoint> for ReferencePointWire {
    fn from(rp: ReferencePoint) -> Self {
        ReferencePointWire {
            id: rp.id,
            x: rp.position.x,
            y: rp.position.y,
            floor: rp.floor,
            sample_count: rp.sample_count,
            fingerprint: rp.fingerprint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioMap {
    pub provenance: Provenance,
    pub points: Vec<ReferencePoint>,
}

impl RadioMap {
    pub fn new(provenance: Provenance, points: Vec<ReferencePoint>) -> Result<Self> {
        let map = RadioMap { provenance, points };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for rp in &self.points {
            if !seen.insert(rp.id) {
                return Err(Error::format("radio map", format!("duplicate reference point id {}", rp.id)));
            }
            if !rp.position.is_finite() {
                return Err(Error::format("radio map", format!("reference point {} has a non-finite position", rp.id)));
            }
            if rp.sample_count == 0 {
                return Err(Error::format("radio map", format!("reference point {} has sample_count 0", rp.id)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&ReferencePoint> {
        self.points.iter().find(|rp| rp.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WifiScan {
    pub t: f64,
    pub readings: Fingerprint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Bounds {
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub a: Point,
    pub b: Point,
}

impl Serialize for Wall {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a.x, self.a.y, self.b.x, self.b.y].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Wall {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x1, y1, x2, y2] = <[f64; 4]>::deserialize(d)?;
        Ok(Wall {
            a: Point::new(x1, y1),
            b: Point::new(x2, y2),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FloorplanWire")]
pub struct Floorplan {
    pub bounds: Bounds,
    pub walls: Vec<Wall>,
}

#[derive(Deserialize)]
struct FloorplanWire {
    bounds: Bounds,
    #[serde(default)]
    walls: Vec<Wall>,
}

impl TryFrom<FloorplanWire> for Floorplan {
    type Error = Error;

    fn try_from(w: FloorplanWire) -> Result<Self> {
        Floorplan::new(w.bounds, w.walls)
    }
}

impl Floorplan {
    pub fn new(bounds: Bounds, walls: Vec<Wall>) -> Result<Self> {
        if !(bounds.xmin < bounds.xmax && bounds.ymin < bounds.ymax) {
            return Err(Error::format("floorplan", "bounds must have positive extent"));
        }
        for (i, w) in walls.iter().enumerate() {
            if !bounds.contains(&w.a) || !bounds.contains(&w.b) {
                return Err(Error::format("floorplan", format!("wall {i} lies outside the bounds")));
            }
            if w.a.distance(&w.b) == 0.0 {
                return Err(Error::format("floorplan", format!("wall {i} has zero length")));
            }
        }
        Ok(Floorplan { bounds, walls })
    }

    /// Open rectangle without interior walls.
    pub fn open(bounds: Bounds) -> Self {
        Floorplan {
            bounds,
            walls: Vec::new(),
        }
    }
}

fn orientation(p: Point, q: Point, r: Point) -> i8 {
    let cross = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    // Compare the distance of r from line pq against the tolerance.
    let len = p.distance(&q);
    if cross.abs() <= GEOMETRY_EPS * len.max(GEOMETRY_EPS) {
        0
    } else if cross > 0.0 {
        1
    } else {
        -1
    }
}

fn within_box(p: Point, q: Point, r: Point) -> bool {
    r.x >= p.x.min(q.x) - GEOMETRY_EPS
        && r.x <= p.x.max(q.x) + GEOMETRY_EPS
        && r.y >= p.y.min(q.y) - GEOMETRY_EPS
        && r.y <= p.y.max(q.y) + GEOMETRY_EPS
}

/// True iff the closed segments a1–a2 and b1–b2 share at least one point.
/// Collinear overlap counts; a zero-length segment behaves as a point.
pub fn segments_intersect(a1: Point, a2: Point, b1: Point, b2: Point) -> bool {
    let o1 = orientation(a1, a2, b1);
    let o2 = orientation(a1, a2, b2);
    let o3 = orientation(b1, b2, a1);
    let o4 = orientation(b1, b2, a2);

    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && within_box(a1, a2, b1))
        || (o2 == 0 && within_box(a1, a2, b2))
        || (o3 == 0 && within_box(b1, b2, a1))
        || (o4 == 0 && within_box(b1, b2, a2))
}

pub fn crosses_wall(plan: &Floorplan, a: Point, b: Point) -> bool {
    plan.walls.iter().any(|w| segments_intersect(a, b, w.a, w.b))
}

/// Number of walls crossed by the straight path a–b.
pub fn count_wall_crossings(plan: &Floorplan, a: Point, b: Point) -> usize {
    plan.walls
        .iter()
        .filter(|w| segments_intersect(a, b, w.a, w.b))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Radians in (−π, π].
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackEntry {
    pub t: f64,
    pub pose: Pose,
    pub step: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Track {
    entries: Vec<TrackEntry>,
}

impl Track {
    pub fn new(entries: Vec<TrackEntry>) -> Result<Self> {
        for w in entries.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::format("track", format!("timestamps not strictly increasing at t = {}", w[1].t)));
            }
            if w[1].step < w[0].step {
                return Err(Error::format("track", format!("step index decreases at t = {}", w[1].t)));
            }
        }
        Ok(Track { entries })
    }

    pub(crate) fn from_entries_unchecked(entries: Vec<TrackEntry>) -> Self {
        debug_assert!(Track::new(entries.clone()).is_ok());
        Track { entries }
    }

    pub fn entries(&self) -> &[TrackEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first(&self) -> Option<&TrackEntry> {
        self.entries.first()
    }

    pub fn last(&self) -> Option<&TrackEntry> {
        self.entries.last()
    }

    /// Highest step index reached.
    pub fn step_count(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.step)
    }

    /// Position linearly interpolated at `t`. Times outside the track span
    /// clamp to the nearest endpoint; the flag reports the clamp.
    pub fn position_at(&self, t: f64) -> Option<(Point, bool)> {
        let first = self.entries.first()?;
        let last = self.entries.last()?;
        if t <= first.t {
            return Some((first.pose.position(), t < first.t));
        }
        if t >= last.t {
            return Some((last.pose.position(), t > last.t));
        }
        let idx = self.entries.partition_point(|e| e.t <= t);
        let (a, b) = (&self.entries[idx - 1], &self.entries[idx]);
        let f = (t - a.t) / (b.t - a.t);
        Some((
            Point::new(
                a.pose.x + f * (b.pose.x - a.pose.x),
                a.pose.y + f * (b.pose.y - a.pose.y),
            ),
            false,
        ))
    }

    /// Index of the entry with the greatest time ≤ `t`, if any.
    pub fn index_at_or_before(&self, t: f64) -> Option<usize> {
        self.entries.partition_point(|e| e.t <= t).checked_sub(1)
    }
}
