//! Bundled scenarios.

use crate::sim::Scenario;

const OFFICE_CORRIDOR: &str = include_str!("../fixtures/office_corridor.json");

/// 65 m × 20 m office: a 2 m east-west corridor with thirteen 5 m × 9 m
/// rooms on each side, one door per room, an AP in every room plus four in
/// the corridor. The ~960 m survey walk runs the corridor out and back and
/// steps into every room along its centreline on each pass.
pub fn office_corridor() -> Scenario {
    serde_json::from_str(OFFICE_CORRIDOR).expect("bundled scenario parses")
}

pub fn office_corridor_json() -> &'static str {
    OFFICE_CORRIDOR
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{crosses_wall, Point};

    #[test]
    fn office_walk_never_crosses_a_wall() {
        let s = office_corridor();
        let plan = s.floorplan(std::path::Path::new(".")).unwrap();
        assert_eq!((plan.bounds.width(), plan.bounds.height()), (65.0, 20.0));
        for w in s.waypoints.windows(2) {
            assert!(!crosses_wall(&plan, w[0], w[1]), "{:?} -> {:?}", w[0], w[1]);
            assert!(plan.bounds.contains(&w[1]));
        }
        assert!(s.waypoints.iter().all(|p: &Point| p.is_finite()));
    }
}
