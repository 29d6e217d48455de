//! Pedestrian dead reckoning.
//!
//! Steps come from downward zero crossings of the gravity-removed
//! acceleration norm, heading from direction cosine matrix integration of
//! the gyroscope, and position from a fixed step length along that heading.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::model::{normalize_angle, Pose, Track, TrackEntry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    /// Body-frame specific force, m/s².
    pub accel: [f64; 3],
    /// Body-frame angular rate, rad/s.
    pub gyro: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdrConfig {
    pub g: f64,
    pub step_length: f64,
    pub swing_threshold: f64,
    pub min_step_interval: f64,
    pub sample_rate: f64,
}

impl Default for PdrConfig {
    fn default() -> Self {
        PdrConfig {
            g: 9.81,
            step_length: 0.75,
            swing_threshold: 1.0,
            min_step_interval: 0.3,
            sample_rate: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEvent {
    pub t: f64,
    /// 1-based step counter.
    pub index: u32,
    pub length: f64,
}

/// Renormalize at least this often, whatever the measured drift.
const RENORM_INTERVAL: u32 = 100;
/// Upper bound on ‖C·Cᵀ − I‖_F before an immediate renormalization.
const ORTHO_TOLERANCE: f64 = 1e-9;

/// Body-to-navigation direction cosine matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attitude {
    c: Matrix3<f64>,
    updates_since_renorm: u32,
}

impl Default for Attitude {
    fn default() -> Self {
        Attitude::identity()
    }
}

impl Attitude {
    pub fn identity() -> Self {
        Attitude {
            c: Matrix3::identity(),
            updates_since_renorm: 0,
        }
    }

    /// Level attitude rotated by `yaw` about the vertical axis.
    pub fn from_yaw(yaw: f64) -> Self {
        let (s, c) = yaw.sin_cos();
        Attitude {
            c: Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            updates_since_renorm: 0,
        }
    }

    pub fn from_matrix(c: Matrix3<f64>) -> Self {
        Attitude {
            c,
            updates_since_renorm: 0,
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.c
    }

    /// ‖C·Cᵀ − I‖_F
    pub fn orthonormality_error(&self) -> f64 {
        (self.c * self.c.transpose() - Matrix3::identity()).norm()
    }

    fn renormalize(&mut self) {
        // Newton iteration towards the polar factor; converges quadratically
        // from the near-orthonormal matrices produced by the update.
        for _ in 0..3 {
            let ctc = self.c.transpose() * self.c;
            self.c = self.c * (Matrix3::identity() * 3.0 - ctc) * 0.5;
        }
        self.updates_since_renorm = 0;
    }
}

/// √(a_x² + a_y² + a_z²) − g
pub fn accel_norm(sample: &ImuSample, g: f64) -> f64 {
    let [ax, ay, az] = sample.accel;
    (ax * ax + ay * ay + az * az).sqrt() - g
}

/// Zero-crossing step detector.
///
/// A step is a swing of the acceleration norm above `swing_threshold`
/// followed by a downward zero crossing. The crossing time is linearly
/// interpolated between samples and a crossing closer than
/// `min_step_interval` to the previous step is discarded.
pub fn detect_steps(samples: &[ImuSample], cfg: &PdrConfig) -> Vec<StepEvent> {
    let mut steps = Vec::new();
    let mut armed = false;
    let mut last_step: Option<f64> = None;
    let mut prev: Option<(f64, f64)> = None;

    for s in samples {
        let a = accel_norm(s, cfg.g);
        if a > cfg.swing_threshold {
            armed = true;
        }
        if let Some((pt, pa)) = prev {
            if armed && pa > 0.0 && a <= 0.0 {
                let t = pt + (s.t - pt) * pa / (pa - a);
                if last_step.is_none_or(|last| t - last >= cfg.min_step_interval) {
                    steps.push(StepEvent {
                        t,
                        index: steps.len() as u32 + 1,
                        length: cfg.step_length,
                    });
                    last_step = Some(t);
                }
                armed = false;
            }
        }
        prev = Some((s.t, a));
    }
    steps
}

fn skew(v: [f64; 3]) -> Matrix3<f64> {
    let [x, y, z] = v;
    Matrix3::new(0.0, -z, y, z, 0.0, -x, -y, x, 0.0)
}

/// One rotation-vector update `C·(I + (sin σ/σ)B + ((1−cos σ)/σ²)B²)` with
/// `B = [ω·Δt]×` and `σ = |ω·Δt|`.
pub fn dcm_update(att: &Attitude, gyro: [f64; 3], dt: f64) -> Attitude {
    let rot = [gyro[0] * dt, gyro[1] * dt, gyro[2] * dt];
    let sigma = (rot[0] * rot[0] + rot[1] * rot[1] + rot[2] * rot[2]).sqrt();
    let (a, b) = if sigma < 1e-8 {
        (1.0, 0.5)
    } else {
        let half = (sigma / 2.0).sin();
        // 1 − cos σ = 2 sin²(σ/2) avoids cancellation at small σ.
        (sigma.sin() / sigma, 2.0 * half * half / (sigma * sigma))
    };
    let bm = skew(rot);
    let step = Matrix3::identity() + bm * a + bm * bm * b;

    let mut next = Attitude {
        c: att.c * step,
        updates_since_renorm: att.updates_since_renorm + 1,
    };
    if next.updates_since_renorm >= RENORM_INTERVAL || next.orthonormality_error() > ORTHO_TOLERANCE {
        next.renormalize();
    }
    next
}

/// Yaw `atan2(C₂₁, C₁₁)` in (−π, π].
pub fn yaw_from_dcm(att: &Attitude) -> f64 {
    normalize_angle(att.c[(1, 0)].atan2(att.c[(0, 0)]))
}

/// Advances a pose by one step along `heading`.
pub fn pdr_step(pose: &Pose, step: &StepEvent, heading: f64) -> Pose {
    let (s, c) = heading.sin_cos();
    Pose::new(pose.x + step.length * s, pose.y + step.length * c, heading)
}

/// Detected steps paired with the heading at each step.
///
/// Attitude starts level at `start_heading` and is integrated sample by
/// sample, using each sample's rate over the interval that ends at it. The
/// heading for a step is the yaw after integrating every sample at or before
/// the step's zero-crossing time.
pub fn step_headings(samples: &[ImuSample], start_heading: f64, cfg: &PdrConfig) -> Vec<(StepEvent, f64)> {
    let steps = detect_steps(samples, cfg);
    let mut out = Vec::with_capacity(steps.len());
    let mut att = Attitude::from_yaw(start_heading);
    let mut pending = steps.into_iter().peekable();

    for (i, s) in samples.iter().enumerate() {
        if i > 0 {
            let dt = s.t - samples[i - 1].t;
            att = dcm_update(&att, s.gyro, dt);
        }
        let next_t = samples.get(i + 1).map_or(f64::INFINITY, |n| n.t);
        while let Some(step) = pending.next_if(|st| st.t < next_t) {
            out.push((step, yaw_from_dcm(&att)));
        }
    }
    out
}

/// Dead-reckoned track. The first entry is `start` at the first sample time
/// (or t = 0 for an empty log), followed by one entry per detected step.
pub fn run_pdr(samples: &[ImuSample], start: Pose, cfg: &PdrConfig) -> Track {
    let t0 = samples.first().map_or(0.0, |s| s.t);
    let mut entries = vec![TrackEntry { t: t0, pose: start, step: 0 }];
    let mut pose = start;
    for (step, heading) in step_headings(samples, start.heading, cfg) {
        pose = pdr_step(&pose, &step, heading);
        entries.push(TrackEntry {
            t: step.t,
            pose,
            step: step.index,
        });
    }
    Track::from_entries_unchecked(entries)
}
