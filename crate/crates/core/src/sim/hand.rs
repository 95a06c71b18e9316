//! Collider model of the virtual hand.
//!
//! The hand frame has its origin at the palm center with the palm normal on
//! +y. Fingers extend along +x (the thumb mirrors the middle finger along -x)
//! and curl toward +y.

use crate::devices::{FingerCoupling, FingerJoints, HandState, FINGERS};
use crate::frames::RigidTransform;
use crate::math::{cos, deg_to_rad, sin, Quat, Vec3};

pub const PALM_SPHERES: usize = 4;
pub const SEGMENTS: usize = 3;
pub const HAND_COLLIDERS: usize = PALM_SPHERES + FINGERS * SEGMENTS;

pub const THUMB: usize = 0;
pub const INDEX: usize = 1;
pub const MIDDLE: usize = 2;
pub const RING: usize = 3;
pub const LITTLE: usize = 4;

pub fn palm_collider(i: usize) -> u8 {
    i as u8
}

pub fn phalange_collider(finger: usize, segment: usize) -> u8 {
    (PALM_SPHERES + finger * SEGMENTS + segment) as u8
}

/// Finger and segment of a phalange collider, `None` for palm spheres.
pub fn collider_phalange(id: u8) -> Option<(usize, usize)> {
    let i = id as usize;
    if (PALM_SPHERES..HAND_COLLIDERS).contains(&i) {
        let k = i - PALM_SPHERES;
        Some((k / SEGMENTS, k % SEGMENTS))
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandGeometry {
    pub palm_offsets: [Vec3; PALM_SPHERES],
    pub palm_radius: f64,
    pub finger_bases: [Vec3; FINGERS],
    /// +1 for fingers extending along +x, -1 for the thumb.
    pub finger_signs: [f64; FINGERS],
    pub phalanges: [f64; SEGMENTS],
    pub phalange_radius: f64,
    /// Docking plate pose in the hand frame.
    pub plate: RigidTransform,
}

impl Default for HandGeometry {
    fn default() -> Self {
        HandGeometry {
            palm_offsets: [
                Vec3::new(0.025, 0.0, 0.02),
                Vec3::new(0.025, 0.0, -0.02),
                Vec3::new(-0.025, 0.0, 0.02),
                Vec3::new(-0.025, 0.0, -0.02),
            ],
            palm_radius: 0.012,
            finger_bases: [
                Vec3::new(-0.045, 0.0, 0.0),
                Vec3::new(0.045, 0.0, 0.02),
                Vec3::new(0.045, 0.0, 0.0),
                Vec3::new(0.045, 0.0, -0.02),
                Vec3::new(0.045, 0.0, -0.04),
            ],
            finger_signs: [-1.0, 1.0, 1.0, 1.0, 1.0],
            phalanges: [0.045, 0.025, 0.02],
            phalange_radius: 0.009,
            plate: RigidTransform::new(
                Quat::from_axis_angle(Vec3::X, deg_to_rad(90.0)),
                Vec3::new(0.0, -0.02, 0.0),
            ),
        }
    }
}

impl HandGeometry {
    pub fn collider_radius(&self, id: u8) -> f64 {
        if (id as usize) < PALM_SPHERES {
            self.palm_radius
        } else {
            self.phalange_radius
        }
    }

    /// Segment end points of one finger in the hand frame.
    pub fn finger_points(&self, finger: usize, joints: &FingerJoints, spread: f64) -> [Vec3; SEGMENTS] {
        let s = self.finger_signs[finger];
        let dir = Vec3::new(s * cos(spread), 0.0, sin(spread));
        let angles = [joints.mcp, joints.mcp + joints.pip, joints.mcp + joints.pip + joints.dip];
        let mut p = self.finger_bases[finger];
        let mut out = [Vec3::ZERO; SEGMENTS];
        for k in 0..SEGMENTS {
            p = p + (dir * cos(angles[k]) + Vec3::Y * sin(angles[k])) * self.phalanges[k];
            out[k] = p;
        }
        out
    }

    /// World positions of one finger's colliders at a given flex.
    pub fn finger_world(
        &self,
        wrist: &RigidTransform,
        finger: usize,
        flex: f64,
        abduction: f64,
        coupling: &FingerCoupling,
    ) -> [Vec3; SEGMENTS] {
        let local = self.finger_points(finger, &coupling.joints(flex), coupling.spread(abduction));
        local.map(|p| wrist.transform_point(p))
    }

    /// World positions of every collider, indexed by collider id.
    pub fn collider_positions(&self, hand: &HandState, coupling: &FingerCoupling) -> [Vec3; HAND_COLLIDERS] {
        let mut out = [Vec3::ZERO; HAND_COLLIDERS];
        for (i, p) in self.palm_offsets.iter().enumerate() {
            out[i] = hand.wrist_pose.transform_point(*p);
        }
        for f in 0..FINGERS {
            let pts = self.finger_points(f, &hand.joints[f], coupling.spread(hand.abduction[f]));
            for (k, p) in pts.iter().enumerate() {
                out[phalange_collider(f, k) as usize] = hand.wrist_pose.transform_point(*p);
            }
        }
        out
    }

    pub fn plate_pose(&self, wrist: &RigidTransform) -> RigidTransform {
        wrist.compose(&self.plate)
    }
}
