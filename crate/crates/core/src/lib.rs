//! Dynamic Wi-Fi radio maps from walked IMU + RSS logs.
//!
//! The pipeline recovers the survey walk with particle-filter pedestrian dead
//! reckoning ([`pdr`], [`pf`]), drops a reference point at every Wi-Fi scan
//! and merges redundant ones ([`mapbuilder`]). Maps are consumed by the
//! fingerprinting estimators in [`localizer`] and scored with [`eval`].
//! [`sim`] generates walks, IMU logs and scans with known ground truth.

pub mod error;
pub mod eval;
pub mod fixtures;
pub mod io;
pub mod localizer;
pub mod mapbuilder;
pub mod model;
pub mod pdr;
pub mod pf;
pub mod sim;

pub use error::{Error, Result};
pub use model::{Fingerprint, Floorplan, MacId, Point, Pose, RadioMap, ReferencePoint, Track, WifiScan};
