use alloc::vec::Vec;

use crate::devices::FINGERS;
use crate::frames::RigidTransform;
use crate::math::{Quat, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Cubic ease in and out, zero velocity at every keyframe.
    Smoothstep,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Keyframe {
    /// s
    pub t: f64,
    /// Wrist (palm center) position, world frame.
    pub position: Vec3,
    pub rotation: Quat,
    pub flex: [f64; FINGERS],
    pub abduction: [f64; FINGERS],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandSample {
    pub wrist: RigidTransform,
    pub flex: [f64; FINGERS],
    pub abduction: [f64; FINGERS],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub keyframes: Vec<Keyframe>,
    pub interpolation: Interpolation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryError {
    Empty,
    NotIncreasing(usize),
    NonFinite(usize),
    OutOfRange(usize),
}

impl Trajectory {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if self.keyframes.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        for (i, k) in self.keyframes.iter().enumerate() {
            if !(k.t.is_finite() && k.position.is_finite() && k.rotation.is_finite()) {
                return Err(TrajectoryError::NonFinite(i));
            }
            if !k.flex.iter().chain(k.abduction.iter()).all(|v| (0.0..=1.0).contains(v)) {
                return Err(TrajectoryError::OutOfRange(i));
            }
            if i > 0 && !(k.t > self.keyframes[i - 1].t) {
                return Err(TrajectoryError::NotIncreasing(i));
            }
        }
        Ok(())
    }

    pub fn end_time(&self) -> f64 {
        self.keyframes.last().map_or(0.0, |k| k.t)
    }

    pub fn sample(&self, t: f64) -> HandSample {
        let ks = &self.keyframes;
        let at = |k: &Keyframe| HandSample {
            wrist: RigidTransform::new(k.rotation, k.position),
            flex: k.flex,
            abduction: k.abduction,
        };
        if t <= ks[0].t {
            return at(&ks[0]);
        }
        let last = ks.len() - 1;
        if t >= ks[last].t {
            return at(&ks[last]);
        }
        let i = ks.partition_point(|k| k.t <= t) - 1;
        let (a, b) = (&ks[i], &ks[i + 1]);
        let s = (t - a.t) / (b.t - a.t);
        let w = match self.interpolation {
            Interpolation::Linear => s,
            Interpolation::Smoothstep => s * s * (3.0 - 2.0 * s),
        };
        let lerp = |x: f64, y: f64| x + (y - x) * w;
        let rotation = a.rotation.rotate_towards(b.rotation, a.rotation.angle_to(b.rotation) * w);
        HandSample {
            wrist: RigidTransform::new(rotation, a.position.lerp(b.position, w)),
            flex: core::array::from_fn(|f| lerp(a.flex[f], b.flex[f])),
            abduction: core::array::from_fn(|f| lerp(a.abduction[f], b.abduction[f])),
        }
    }
}
