//! File formats.
//!
//! * IMU log: CSV `t,ax,ay,az,wx,wy,wz`
//! * Scan log: CSV `t,mac,rss`, consecutive rows sharing `t` form one scan
//! * Track: CSV `t,step,x,y,heading`
//! * Radio map: JSON `{provenance, points: [{id, x, y, floor, sample_count, fingerprint}]}`
//! * Floorplan: JSON `{bounds: {xmin, ymin, xmax, ymax}, walls: [[x1, y1, x2, y2], ...]}`
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so
//! reading a file written here and writing it back reproduces it exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{CdfSeries, KSweepRow};
use crate::model::{Fingerprint, Floorplan, MacId, Pose, RadioMap, Track, TrackEntry, WifiScan};
use crate::pdr::ImuSample;

pub const IMU_HEADER: [&str; 7] = ["t", "ax", "ay", "az", "wx", "wy", "wz"];
pub const SCAN_HEADER: [&str; 3] = ["t", "mac", "rss"];
pub const TRACK_HEADER: [&str; 5] = ["t", "step", "x", "y", "heading"];
pub const LOCALIZE_HEADER: [&str; 6] = ["t", "x", "y", "floor", "algo", "k"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn csv_reader<R: Read>(r: R, what: &str, header: &[&str]) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let found: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if found != header {
        return Err(Error::format(what, format!("expected header {:?}, found {:?}", header.join(","), found.join(","))));
    }
    Ok(rdr)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, what: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec.get(idx).ok_or_else(|| Error::format(what, format!("line {line}: missing column {idx}")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::format(what, format!("line {line}: cannot parse {raw:?}")))
}

fn finite(v: f64, what: &str, line: u64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::format(what, format!("line {line}: non-finite value")))
    }
}

pub fn read_imu_csv<R: Read>(r: R) -> Result<Vec<ImuSample>> {
    const WHAT: &str = "IMU log";
    let mut rdr = csv_reader(r, WHAT, &IMU_HEADER)?;
    let mut out: Vec<ImuSample> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut v = [0.0; 7];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = finite(field(&rec, i, WHAT)?, WHAT, line)?;
        }
        if let Some(prev) = out.last() {
            if !(v[0] > prev.t) {
                return Err(Error::format(WHAT, format!("line {line}: timestamps must strictly increase")));
            }
        }
        out.push(ImuSample {
            t: v[0],
            accel: [v[1], v[2], v[3]],
            gyro: [v[4], v[5], v[6]],
        });
    }
    Ok(out)
}

pub fn write_imu_csv<W: Write>(w: W, samples: &[ImuSample]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(IMU_HEADER)?;
    for s in samples {
        let vals = [s.t, s.accel[0], s.accel[1], s.accel[2], s.gyro[0], s.gyro[1], s.gyro[2]];
        wtr.write_record(vals.iter().map(|v| fmt_f64(*v)))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_scans_csv<R: Read>(r: R) -> Result<Vec<WifiScan>> {
    const WHAT: &str = "scan log";
    let mut rdr = csv_reader(r, WHAT, &SCAN_HEADER)?;
    let mut scans: Vec<WifiScan> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let t: f64 = finite(field(&rec, 0, WHAT)?, WHAT, line)?;
        let mac: MacId = field(&rec, 1, WHAT)?;
        let rss: f64 = finite(field(&rec, 2, WHAT)?, WHAT, line)?;
        if t < 0.0 {
            return Err(Error::format(WHAT, format!("line {line}: negative timestamp")));
        }
        match scans.last_mut() {
            Some(last) if last.t == t => {
                if last.readings.contains(&mac) {
                    return Err(Error::format(WHAT, format!("line {line}: duplicate reading for {mac}")));
                }
                last.readings.insert(mac, rss);
            }
            Some(last) if t < last.t => {
                return Err(Error::format(WHAT, format!("line {line}: scans must be in time order")));
            }
            _ => {
                let mut readings = Fingerprint::new();
                readings.insert(mac, rss);
                scans.push(WifiScan { t, readings });
            }
        }
    }
    Ok(scans)
}

pub fn write_scans_csv<W: Write>(w: W, scans: &[WifiScan]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(SCAN_HEADER)?;
    for s in scans {
        let t = fmt_f64(s.t);
        for (mac, rss) in s.readings.iter() {
            wtr.write_record([t.as_str(), mac.as_str(), &fmt_f64(rss)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_track_csv<R: Read>(r: R) -> Result<Track> {
    const WHAT: &str = "track";
    let mut rdr = csv_reader(r, WHAT, &TRACK_HEADER)?;
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let t = finite(field(&rec, 0, WHAT)?, WHAT, line)?;
        let step: u32 = field(&rec, 1, WHAT)?;
        let x = finite(field(&rec, 2, WHAT)?, WHAT, line)?;
        let y = finite(field(&rec, 3, WHAT)?, WHAT, line)?;
        let heading = finite(field(&rec, 4, WHAT)?, WHAT, line)?;
        entries.push(TrackEntry {
            t,
            pose: Pose::new(x, y, heading),
            step,
        });
    }
    Track::new(entries)
}

pub fn write_track_csv<W: Write>(w: W, track: &Track) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(TRACK_HEADER)?;
    for e in track.entries() {
        wtr.write_record([
            fmt_f64(e.t),
            e.step.to_string(),
            fmt_f64(e.pose.x),
            fmt_f64(e.pose.y),
            fmt_f64(e.pose.heading),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// One localize output row.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedScan {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub floor: i32,
    pub algo: String,
    pub k: usize,
}

pub fn write_localized_csv<W: Write>(w: W, rows: &[LocalizedScan]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(LOCALIZE_HEADER)?;
    for r in rows {
        wtr.write_record([
            fmt_f64(r.t),
            fmt_f64(r.x),
            fmt_f64(r.y),
            r.floor.to_string(),
            r.algo.clone(),
            r.k.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_localized_csv<R: Read>(r: R) -> Result<Vec<LocalizedScan>> {
    const WHAT: &str = "localization output";
    let mut rdr = csv_reader(r, WHAT, &LOCALIZE_HEADER)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(LocalizedScan {
            t: field(&rec, 0, WHAT)?,
            x: field(&rec, 1, WHAT)?,
            y: field(&rec, 2, WHAT)?,
            floor: field(&rec, 3, WHAT)?,
            algo: field(&rec, 4, WHAT)?,
            k: field(&rec, 5, WHAT)?,
        });
    }
    Ok(rows)
}

pub fn write_cdf_csv<W: Write>(w: W, cdf: &CdfSeries) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["error", "fraction"])?;
    for (e, f) in &cdf.points {
        wtr.write_record([fmt_f64(*e), fmt_f64(*f)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_errors_csv<W: Write>(w: W, times: &[f64], errors: &[f64]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["t", "error"])?;
    for (t, e) in times.iter().zip(errors) {
        wtr.write_record([fmt_f64(*t), fmt_f64(*e)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_k_sweep_csv<W: Write>(w: W, rows: &[KSweepRow]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["algo", "k", "median_error"])?;
    for r in rows {
        wtr.write_record([r.algorithm.as_str().to_string(), r.k.to_string(), fmt_f64(r.median_error)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json_reader<T: DeserializeOwned, R: Read>(r: R) -> Result<T> {
    Ok(serde_json::from_reader(r)?)
}

pub fn read_radio_map_from<R: Read>(r: R) -> Result<RadioMap> {
    let map: RadioMap = from_json_reader(r)?;
    map.validate()?;
    Ok(map)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}

pub fn read_radio_map(path: &Path) -> Result<RadioMap> {
    read_radio_map_from(open(path)?)
}

pub fn write_radio_map(path: &Path, map: &RadioMap) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(to_json_string(map)?.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_floorplan(path: &Path) -> Result<Floorplan> {
    from_json_reader(open(path)?)
}

pub fn write_floorplan(path: &Path, plan: &Floorplan) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(to_json_string(plan)?.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_imu(path: &Path) -> Result<Vec<ImuSample>> {
    read_imu_csv(open(path)?)
}

pub fn read_scans(path: &Path) -> Result<Vec<WifiScan>> {
    read_scans_csv(open(path)?)
}

pub fn read_track(path: &Path) -> Result<Track> {
    read_track_csv(open(path)?)
}

pub fn write_imu(path: &Path, samples: &[ImuSample]) -> Result<()> {
    write_imu_csv(create(path)?, samples)
}

pub fn write_scans(path: &Path, scans: &[WifiScan]) -> Result<()> {
    write_scans_csv(create(path)?, scans)
}

pub fn write_track(path: &Path, track: &Track) -> Result<()> {
    write_track_csv(create(path)?, track)
}
