//! Splitting hand-contact forces between the glove and the arm.
//!
//! Forces that oppose each other across the hand on the same object are
//! hand-referenced: they cancel in the sum and only the glove can render them.
//! Whatever does not cancel is world-referenced and goes to the arm.

use alloc::vec::Vec;

use crate::devices::GloveCommand;
use crate::docking::Wrench;
use crate::frames::RigidTransform;
use crate::math::{cos, deg_to_rad, Vec3};

use super::world::{BodyId, ContactImpulse};

/// Maximum angle between two forces' lines of action for them to count as a squeeze.
pub const PAIR_ANGLE_DEG: f64 = 15.0;

/// Force the world exerts on one hand collider.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandForce {
    pub collider: u8,
    pub body: BodyId,
    pub point: Vec3,
    pub force: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezePair {
    pub first: u8,
    pub second: u8,
    pub body: BodyId,
    /// Magnitude of the cancelling component, N.
    pub magnitude: f64,
    /// Direction of the force on `first`.
    pub axis: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoutedForces {
    /// Net hand wrench in the arm base frame; zero when not docked.
    pub arm_wrench: Wrench,
    pub glove_stops: GloveCommand,
    /// Net hand wrench in the world frame that no device renders.
    pub residual: Wrench,
    pub net_force: Vec3,
    pub net_torque: Vec3,
    pub pairs: Vec<SqueezePair>,
    pub forces: Vec<HandForce>,
}

/// Per-collider forces, `-n * j / dt` for each hand contact.
pub fn hand_forces(impulses: &[ContactImpulse], dt: f64) -> Vec<HandForce> {
    impulses
        .iter()
        .filter_map(|i| {
            i.hand_collider.map(|c| HandForce {
                collider: c,
                body: i.body_b,
                point: i.point,
                force: i.normal * (-i.magnitude / dt),
            })
        })
        .collect()
}

/// Greedy pairing of opposing forces on the same body.
pub fn pair_opposing(forces: &[HandForce]) -> Vec<SqueezePair> {
    let limit = cos(deg_to_rad(PAIR_ANGLE_DEG));
    let mut used = alloc::vec![false; forces.len()];
    let mut pairs = Vec::new();
    for i in 0..forces.len() {
        if used[i] {
            continue;
        }
        let Some(ui) = forces[i].force.normalized() else { continue };
        let mut best: Option<(usize, f64)> = None;
        for j in (i + 1)..forces.len() {
            if used[j] || forces[j].body != forces[i].body {
                continue;
            }
            let Some(uj) = forces[j].force.normalized() else { continue };
            let opposition = -ui.dot(uj);
            if opposition >= limit && best.map_or(true, |(_, b)| opposition > b) {
                best = Some((j, opposition));
            }
        }
        if let Some((j, _)) = best {
            used[i] = true;
            used[j] = true;
            let axis = (forces[i].force - forces[j].force).normalized().unwrap_or(ui);
            let magnitude = forces[i].force.dot(axis).min(-forces[j].force.dot(axis)).max(0.0);
            pairs.push(SqueezePair {
                first: forces[i].collider,
                second: forces[j].collider,
                body: forces[i].body,
                magnitude,
                axis,
            });
        }
    }
    pairs
}

/// Routes one step's hand-contact impulses.
///
/// Torque is taken about `torque_origin` (the docking plate). When docked the
/// net wrench is rotated into the arm base frame; otherwise it is residual.
pub fn route_forces(
    impulses: &[ContactImpulse],
    glove_stops: GloveCommand,
    docked: bool,
    arm_base: &RigidTransform,
    torque_origin: Vec3,
    dt: f64,
) -> RoutedForces {
    let forces = hand_forces(impulses, dt);
    let mut net_force = Vec3::ZERO;
    let mut net_torque = Vec3::ZERO;
    for f in &forces {
        net_force = net_force + f.force;
        net_torque = net_torque + (f.point - torque_origin).cross(f.force);
    }
    let pairs = pair_opposing(&forces);
    let world = Wrench::new(net_force, net_torque);
    let (arm_wrench, residual) = if docked {
        let inv = arm_base.rotation().conjugate();
        (world.rotated(inv), Wrench::ZERO)
    } else {
        (Wrench::ZERO, world)
    };
    RoutedForces { arm_wrench, glove_stops, residual, net_force, net_torque, pairs, forces }
}
