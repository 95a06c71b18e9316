//! Glove stop from a hypothetical de-penetration of the finger.

use crate::devices::{FingerCoupling, HandState};
use crate::frames::RigidTransform;

use super::hand::HandGeometry;
use super::world::{Shape, SimWorld};

pub const DRUM_TOLERANCE: f64 = 1e-6;

/// Smallest separation between a finger's colliders and touchable world geometry.
pub fn finger_clearance(
    world: &SimWorld,
    geometry: &HandGeometry,
    coupling: &FingerCoupling,
    wrist: &RigidTransform,
    finger: usize,
    abduction: f64,
    flex: f64,
) -> Option<f64> {
    let shape = Shape::Sphere { radius: geometry.phalange_radius };
    geometry
        .finger_world(wrist, finger, flex, abduction, coupling)
        .iter()
        .filter_map(|p| world.hand_probe(&shape, *p))
        .reduce(f64::min)
}

/// Largest flex at or below the intended one that leaves the finger clear of
/// the world, found by bisection. Returns 1.0 when the finger touches nothing.
pub fn contact_drum_param(
    world: &SimWorld,
    geometry: &HandGeometry,
    coupling: &FingerCoupling,
    hand: &HandState,
    finger: usize,
) -> f64 {
    let f = hand.flex[finger];
    let a = hand.abduction[finger];
    let clear = |flex: f64| {
        finger_clearance(world, geometry, coupling, &hand.wrist_pose, finger, a, flex).map_or(true, |s| s >= 0.0)
    };
    let sep = finger_clearance(world, geometry, coupling, &hand.wrist_pose, finger, a, f);
    match sep {
        None => return 1.0,
        Some(s) if s > 0.0 => return 1.0,
        Some(s) if s == 0.0 => return f,
        _ => {}
    }
    if !clear(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, f);
    while hi - lo > DRUM_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if clear(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
