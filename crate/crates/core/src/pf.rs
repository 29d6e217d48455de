//! Bootstrap particle filter on top of PDR with binary wall-crossing map
//! matching.
//!
//! The proposal is the noisy step model, so the importance weight update
//! reduces to multiplying by the observation likelihood: 0 for a particle
//! whose step crossed a wall or left the floorplan bounds, 1 otherwise.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{crosses_wall, Floorplan, Point, Pose, Track, TrackEntry};
use crate::pdr::{step_headings, ImuSample, PdrConfig, StepEvent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PfConfig {
    pub n_particles: usize,
    /// Std-dev of the per-step length perturbation, m.
    pub step_sigma: f64,
    /// Std-dev of the per-step heading perturbation, rad.
    pub heading_sigma: f64,
    /// Resample when the effective sample size drops below this fraction of N.
    pub resample_fraction: f64,
}

impl Default for PfConfig {
    fn default() -> Self {
        PfConfig {
            n_particles: 1000,
            step_sigma: 0.1,
            heading_sigma: 0.05,
            resample_fraction: 0.2,
        }
    }
}

impl PfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 10 {
            return Err(Error::format("particle filter config", "n_particles must be at least 10"));
        }
        if !(self.step_sigma >= 0.0 && self.heading_sigma >= 0.0) {
            return Err(Error::format("particle filter config", "sigmas must be non-negative"));
        }
        if !(self.resample_fraction > 0.0 && self.resample_fraction < 1.0) {
            return Err(Error::format("particle filter config", "resample_fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub pose: Pose,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    pub rng_seed: u64,
    rng: ChaCha8Rng,
}

impl PartialEq for ParticleSet {
    fn eq(&self, other: &Self) -> bool {
        self.particles == other.particles && self.rng_seed == other.rng_seed
    }
}

impl ParticleSet {
    /// Builds a set from explicit particles; the RNG stream starts at `seed`.
    pub fn from_particles(particles: Vec<Particle>, seed: u64) -> Self {
        ParticleSet {
            particles,
            rng_seed: seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.particles.iter().map(|p| p.pose.position()).collect()
    }
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sigma * z
}

/// N particles around `start` with Gaussian position jitter of `step_sigma`
/// and uniform weights.
pub fn pf_init(start: Pose, cfg: &PfConfig, seed: u64) -> ParticleSet {
    let mut set = ParticleSet::from_particles(Vec::with_capacity(cfg.n_particles), seed);
    let w = 1.0 / cfg.n_particles as f64;
    for _ in 0..cfg.n_particles {
        let dx = gauss(&mut set.rng, cfg.step_sigma);
        let dy = gauss(&mut set.rng, cfg.step_sigma);
        set.particles.push(Particle {
            pose: Pose::new(start.x + dx, start.y + dy, start.heading),
            weight: w,
        });
    }
    set
}

/// Propagates every particle by one perturbed step. Weights are untouched.
pub fn pf_predict(mut set: ParticleSet, step: &StepEvent, heading: f64, cfg: &PfConfig) -> ParticleSet {
    let ParticleSet { particles, rng, .. } = &mut set;
    for p in particles.iter_mut() {
        let length = step.length + gauss(rng, cfg.step_sigma);
        let psi = heading + gauss(rng, cfg.heading_sigma);
        let (s, c) = psi.sin_cos();
        p.pose = Pose::new(p.pose.x + length * s, p.pose.y + length * c, psi);
    }
    set
}

/// Zeroes the weight of every particle whose move from `prev_positions[i]`
/// crossed a wall or left the bounds, then renormalizes.
pub fn pf_update_weights(mut set: ParticleSet, prev_positions: &[Point], plan: &Floorplan) -> Result<ParticleSet> {
    assert_eq!(prev_positions.len(), set.particles.len(), "one previous position per particle");
    let mut total = 0.0;
    for (p, prev) in set.particles.iter_mut().zip(prev_positions) {
        let pos = p.pose.position();
        if !plan.bounds.contains(&pos) || crosses_wall(plan, *prev, pos) {
            p.weight = 0.0;
        }
        total += p.weight;
    }
    if !(total > 0.0) {
        return Err(Error::ParticleFilterCollapse { step: 0 });
    }
    for p in set.particles.iter_mut() {
        p.weight /= total;
    }
    Ok(set)
}

/// Effective sample size 1 / Σ wᵢ².
pub fn effective_particles(set: &ParticleSet) -> f64 {
    1.0 / set.particles.iter().map(|p| p.weight * p.weight).sum::<f64>()
}

/// Systematic (low-variance) resampling; output weights are all 1/N.
pub fn resample(mut set: ParticleSet) -> ParticleSet {
    let n = set.particles.len();
    if n == 0 {
        return set;
    }
    let step = 1.0 / n as f64;
    let offset: f64 = set.rng.random::<f64>() * step;

    let mut out = Vec::with_capacity(n);
    let mut cumulative = set.particles[0].weight;
    let mut j = 0;
    for i in 0..n {
        let u = offset + i as f64 * step;
        while u > cumulative && j + 1 < n {
            j += 1;
            cumulative += set.particles[j].weight;
        }
        out.push(Particle {
            pose: set.particles[j].pose,
            weight: step,
        });
    }
    set.particles = out;
    set
}

/// Weighted mean position and circular-mean heading.
pub fn pf_estimate(set: &ParticleSet) -> Pose {
    let (mut x, mut y, mut s, mut c) = (0.0, 0.0, 0.0, 0.0);
    for p in &set.particles {
        x += p.weight * p.pose.x;
        y += p.weight * p.pose.y;
        s += p.weight * p.pose.heading.sin();
        c += p.weight * p.pose.heading.cos();
    }
    Pose::new(x, y, s.atan2(c))
}

/// Per-step bookkeeping from a filter run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfStepReport {
    pub step: u32,
    /// Effective sample size after the weight update, before resampling.
    pub ess: f64,
    pub resampled: bool,
    /// Σ weights after the update (and after resampling when it fired).
    pub weight_sum: f64,
    pub survivors: usize,
}

#[derive(Debug, Clone)]
pub struct PfRun {
    pub track: Track,
    pub reports: Vec<PfStepReport>,
}

/// Full PF-PDR pass: predict, wall-based update, conditional resample and
/// posterior-mean readout at every detected step.
pub fn run_pf_pdr(
    samples: &[ImuSample],
    start: Pose,
    plan: &Floorplan,
    pdr_cfg: &PdrConfig,
    pf_cfg: &PfConfig,
    seed: u64,
) -> Result<Track> {
    run_pf_pdr_with_reports(samples, start, plan, pdr_cfg, pf_cfg, seed).map(|r| r.track)
}

pub fn run_pf_pdr_with_reports(
    samples: &[ImuSample],
    start: Pose,
    plan: &Floorplan,
    pdr_cfg: &PdrConfig,
    pf_cfg: &PfConfig,
    seed: u64,
) -> Result<PfRun> {
    pf_cfg.validate()?;
    let t0 = samples.first().map_or(0.0, |s| s.t);
    let mut entries = vec![TrackEntry { t: t0, pose: start, step: 0 }];
    let mut reports = Vec::new();
    let mut set = pf_init(start, pf_cfg, seed);
    let threshold = pf_cfg.resample_fraction * pf_cfg.n_particles as f64;

    for (step, heading) in step_headings(samples, start.heading, pdr_cfg) {
        let prev = set.positions();
        set = pf_predict(set, &step, heading, pf_cfg);
        set = pf_update_weights(set, &prev, plan).map_err(|e| match e {
            Error::ParticleFilterCollapse { .. } => Error::ParticleFilterCollapse { step: step.index as usize },
            other => other,
        })?;
        let ess = effective_particles(&set);
        let survivors = set.particles.iter().filter(|p| p.weight > 0.0).count();
        let resampled = ess < threshold;
        if resampled {
            set = resample(set);
        }
        reports.push(PfStepReport {
            step: step.index,
            ess,
            resampled,
            weight_sum: set.weight_sum(),
            survivors,
        });
        entries.push(TrackEntry {
            t: step.t,
            pose: pf_estimate(&set),
            step: step.index,
        });
    }

    Ok(PfRun {
        track: Track::from_entries_unchecked(entries),
        reports,
    })
}
