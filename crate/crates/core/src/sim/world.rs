//! Minimal impulse-based rigid-body world.
//!
//! Contacts are frictionless and single-point. Velocities are solved with
//! Jacobi iterations over a velocity snapshot so that mirrored contacts produce
//! mirrored impulses, then penetration left after integration is projected out
//! by moving dynamic bodies only.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::frames::RigidTransform;
use crate::math::{Mat3, Quat, Vec3};

pub type BodyId = usize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Sphere { radius: f64 },
    /// Axis-aligned box.
    Cuboid { half_extents: Vec3 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BodyKind {
    Dynamic,
    /// Pose-driven, never receives impulses.
    Kinematic,
    Static,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BodyRole {
    Scenery,
    Can(usize),
    HandCollider(u8),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBody {
    pub pose: RigidTransform,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
    pub mass: f64,
    pub inertia: Mat3,
    pub kind: BodyKind,
    pub shape: Shape,
    pub lock_rotation: bool,
    /// Static bodies the hand may touch. The desk is not one of them.
    pub collides_with_hand: bool,
    pub role: BodyRole,
}

impl RigidBody {
    pub fn dynamic_box(center: Vec3, half_extents: Vec3, mass: f64, role: BodyRole) -> Self {
        let s = half_extents * 2.0;
        let k = mass / 12.0;
        RigidBody {
            pose: RigidTransform::from_translation(center),
            linear_velocity: Vec3::ZERO,
            angular_velocity: Vec3::ZERO,
            mass,
            inertia: Mat3::diagonal(Vec3::new(
                k * (s.y * s.y + s.z * s.z),
                k * (s.x * s.x + s.z * s.z),
                k * (s.x * s.x + s.y * s.y),
            )),
            kind: BodyKind::Dynamic,
            shape: Shape::Cuboid { half_extents },
            lock_rotation: true,
            collides_with_hand: true,
            role,
        }
    }

    pub fn dynamic_sphere(center: Vec3, radius: f64, mass: f64, role: BodyRole) -> Self {
        let i = 0.4 * mass * radius * radius;
        RigidBody {
            pose: RigidTransform::from_translation(center),
            linear_velocity: Vec3::ZERO,
            angular_velocity: Vec3::ZERO,
            mass,
            inertia: Mat3::diagonal(Vec3::splat(i)),
            kind: BodyKind::Dynamic,
            shape: Shape::Sphere { radius },
            lock_rotation: false,
            collides_with_hand: true,
            role,
        }
    }

    pub fn static_box(center: Vec3, half_extents: Vec3, collides_with_hand: bool) -> Self {
        RigidBody {
            pose: RigidTransform::from_translation(center),
            linear_velocity: Vec3::ZERO,
            angular_velocity: Vec3::ZERO,
            mass: 0.0,
            inertia: Mat3::ZERO,
            kind: BodyKind::Static,
            shape: Shape::Cuboid { half_extents },
            lock_rotation: true,
            collides_with_hand,
            role: BodyRole::Scenery,
        }
    }

    pub fn hand_sphere(center: Vec3, radius: f64, collider: u8) -> Self {
        RigidBody {
            pose: RigidTransform::from_translation(center),
            linear_velocity: Vec3::ZERO,
            angular_velocity: Vec3::ZERO,
            mass: 0.0,
            inertia: Mat3::ZERO,
            kind: BodyKind::Kinematic,
            shape: Shape::Sphere { radius },
            lock_rotation: true,
            collides_with_hand: false,
            role: BodyRole::HandCollider(collider),
        }
    }

    pub fn inverse_mass(&self) -> f64 {
        match self.kind {
            BodyKind::Dynamic => 1.0 / self.mass,
            _ => 0.0,
        }
    }

    pub fn position(&self) -> Vec3 {
        self.pose.translation()
    }

    pub fn hand_collider(&self) -> Option<u8> {
        match self.role {
            BodyRole::HandCollider(c) => Some(c),
            _ => None,
        }
    }

    fn validate(&self, id: BodyId) -> Result<(), SimError> {
        let bad = |reason| Err(SimError::InvalidBody { body: id, reason });
        if !self.pose.is_finite() || !self.linear_velocity.is_finite() {
            return bad("non-finite initial state");
        }
        match self.shape {
            Shape::Sphere { radius } if !(radius > 0.0) => return bad("sphere radius must be positive"),
            Shape::Cuboid { half_extents: h } => {
                if !(h.x > 0.0 && h.y > 0.0 && h.z > 0.0) {
                    return bad("box extents must be positive");
                }
                if self.pose.rotation().angle() > 1e-12 {
                    return bad("boxes must be axis-aligned");
                }
                if self.kind == BodyKind::Dynamic && !self.lock_rotation {
                    return bad("dynamic boxes must have rotation locked");
                }
            }
            _ => {}
        }
        if self.kind == BodyKind::Dynamic && !(self.mass > 0.0 && self.mass.is_finite()) {
            return bad("dynamic mass must be positive");
        }
        if self.kind == BodyKind::Kinematic && self.hand_collider().is_none() {
            return bad("kinematic bodies must be hand colliders");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactImpulse {
    pub body_a: BodyId,
    pub body_b: BodyId,
    pub point: Vec3,
    /// Unit normal from `body_a` into `body_b`.
    pub normal: Vec3,
    /// Impulse applied to `body_b` along `normal` (and the opposite to `body_a`), N·s.
    pub magnitude: f64,
    /// Set when `body_a` is a hand collider.
    pub hand_collider: Option<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum SimError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("body {body} has non-finite state")]
    NonFinite { body: BodyId },
    #[error("body {body} is invalid: {reason}")]
    InvalidBody { body: BodyId, reason: &'static str },
    #[error("body {0} does not exist or is not kinematic")]
    NotKinematic(BodyId),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    pub velocity_iterations: u32,
    pub position_iterations: u32,
    /// Contacts are generated this far before touching, m.
    pub speculative_margin: f64,
    /// Penetration tolerated without position correction, m.
    pub slop: f64,
    pub position_correction: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            velocity_iterations: 8,
            position_iterations: 4,
            speculative_margin: 0.01,
            slop: 1e-5,
            position_correction: 0.8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Contact {
    pub a: BodyId,
    pub b: BodyId,
    pub normal: Vec3,
    pub separation: f64,
    pub point: Vec3,
}

/// Closest-feature query between two shapes. The normal points from `a` to `b`.
pub(crate) fn shape_contact(sa: &Shape, pa: Vec3, sb: &Shape, pb: Vec3) -> Option<(Vec3, f64, Vec3)> {
    match (sa, sb) {
        (Shape::Sphere { radius: ra }, Shape::Sphere { radius: rb }) => {
            let d = pb - pa;
            let dist = d.norm();
            let n = d.normalized().unwrap_or(Vec3::Y);
            let sep = dist - ra - rb;
            Some((n, sep, pa + n * (ra + 0.5 * sep)))
        }
        (Shape::Sphere { radius }, Shape::Cuboid { half_extents }) => {
            let (n, sep, p) = sphere_box(pa, *radius, pb, *half_extents);
            Some((-n, sep, p))
        }
        (Shape::Cuboid { half_extents }, Shape::Sphere { radius }) => Some(sphere_box(pb, *radius, pa, *half_extents)),
        (Shape::Cuboid { half_extents: ha }, Shape::Cuboid { half_extents: hb }) => box_box(pa, *ha, pb, *hb),
    }
}

/// Returns the normal from the box toward the sphere.
fn sphere_box(c: Vec3, r: f64, center: Vec3, h: Vec3) -> (Vec3, f64, Vec3) {
    let local = c - center;
    let q = Vec3::new(local.x.clamp(-h.x, h.x), local.y.clamp(-h.y, h.y), local.z.clamp(-h.z, h.z));
    let d = local - q;
    let dist = d.norm();
    if dist > 0.0 {
        let n = d / dist;
        let sep = dist - r;
        (n, sep, center + q + n * (0.5 * sep))
    } else {
        // Center inside the box: leave through the nearest face.
        let depth = [h.x - local.x.abs(), h.y - local.y.abs(), h.z - local.z.abs()];
        let mut k = 0;
        for i in 1..3 {
            if depth[i] < depth[k] {
                k = i;
            }
        }
        let mut n = Vec3::ZERO;
        let s = if local[k] < 0.0 { -1.0 } else { 1.0 };
        match k {
            0 => n.x = s,
            1 => n.y = s,
            _ => n.z = s,
        }
        let sep = -depth[k] - r;
        (n, sep, c)
    }
}

fn box_box(pa: Vec3, ha: Vec3, pb: Vec3, hb: Vec3) -> Option<(Vec3, f64, Vec3)> {
    let d = pb - pa;
    let overlap = [ha.x + hb.x - d.x.abs(), ha.y + hb.y - d.y.abs(), ha.z + hb.z - d.z.abs()];
    let mut k = 0;
    for i in 1..3 {
        if overlap[i] < overlap[k] {
            k = i;
        }
    }
    if (0..3).any(|i| i != k && overlap[i] <= 0.0) {
        return None;
    }
    let mut n = Vec3::ZERO;
    let s = if d[k] < 0.0 { -1.0 } else { 1.0 };
    match k {
        0 => n.x = s,
        1 => n.y = s,
        _ => n.z = s,
    }
    let lo = (pa - ha).max_elem(pb - hb);
    let hi = (pa + ha).min_elem(pb + hb);
    Some((n, -overlap[k], (lo + hi) * 0.5))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimWorld {
    bodies: Vec<RigidBody>,
    kinematic_targets: Vec<Option<RigidTransform>>,
    pub gravity: Vec3,
    pub params: SolverParams,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    pub impulses: Vec<ContactImpulse>,
    pub contacts: usize,
}

impl SimWorld {
    pub fn new(gravity: Vec3, params: SolverParams) -> Self {
        SimWorld { bodies: Vec::new(), kinematic_targets: Vec::new(), gravity, params }
    }

    pub fn add_body(&mut self, body: RigidBody) -> Result<BodyId, SimError> {
        let id = self.bodies.len();
        body.validate(id)?;
        self.bodies.push(body);
        self.kinematic_targets.push(None);
        Ok(id)
    }

    pub fn bodies(&self) -> &[RigidBody] {
        &self.bodies
    }

    pub fn body(&self, id: BodyId) -> &RigidBody {
        &self.bodies[id]
    }

    /// Drives a kinematic body to `position` over the next step of length `dt`.
    pub fn set_kinematic_target(&mut self, id: BodyId, position: Vec3, dt: f64) -> Result<(), SimError> {
        if !(dt > 0.0) {
            return Err(SimError::NonPositiveDt(dt));
        }
        let b = self.bodies.get_mut(id).ok_or(SimError::NotKinematic(id))?;
        if b.kind != BodyKind::Kinematic {
            return Err(SimError::NotKinematic(id));
        }
        b.linear_velocity = (position - b.position()) / dt;
        self.kinematic_targets[id] = Some(RigidTransform::from_translation(position));
        Ok(())
    }

    /// Moves a kinematic body without giving it velocity.
    pub fn teleport_kinematic(&mut self, id: BodyId, position: Vec3) -> Result<(), SimError> {
        let b = self.bodies.get_mut(id).ok_or(SimError::NotKinematic(id))?;
        if b.kind != BodyKind::Kinematic {
            return Err(SimError::NotKinematic(id));
        }
        b.pose = RigidTransform::from_translation(position);
        b.linear_velocity = Vec3::ZERO;
        self.kinematic_targets[id] = None;
        Ok(())
    }

    fn pair_allowed(a: &RigidBody, b: &RigidBody) -> bool {
        use BodyKind::*;
        match (a.kind, b.kind) {
            (Dynamic, _) | (_, Dynamic) => true,
            (Kinematic, Static) => b.collides_with_hand,
            (Static, Kinematic) => a.collides_with_hand,
            _ => false,
        }
    }

    pub(crate) fn detect(&self) -> Vec<Contact> {
        let mut out = Vec::new();
        let n = self.bodies.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (bi, bj) = (&self.bodies[i], &self.bodies[j]);
                if !Self::pair_allowed(bi, bj) {
                    continue;
                }
                // Hand colliders always take the `a` slot.
                let (a, b) = if bj.hand_collider().is_some() && bi.hand_collider().is_none() { (j, i) } else { (i, j) };
                let (ba, bb) = (&self.bodies[a], &self.bodies[b]);
                if let Some((normal, separation, point)) =
                    shape_contact(&ba.shape, ba.position(), &bb.shape, bb.position())
                {
                    if separation < self.params.speculative_margin {
                        out.push(Contact { a, b, normal, separation, point });
                    }
                }
            }
        }
        out
    }

    /// Smallest separation between `shape` placed at `position` and any body the hand may touch.
    pub fn hand_probe(&self, shape: &Shape, position: Vec3) -> Option<f64> {
        let mut best: Option<f64> = None;
        for b in &self.bodies {
            let touchable = match b.kind {
                BodyKind::Dynamic => true,
                BodyKind::Static => b.collides_with_hand,
                BodyKind::Kinematic => false,
            };
            if !touchable {
                continue;
            }
            if let Some((_, sep, _)) = shape_contact(shape, position, &b.shape, b.position()) {
                best = Some(best.map_or(sep, |s: f64| s.min(sep)));
            }
        }
        best
    }

    /// Advances the world by `dt` and reports every non-zero contact impulse.
    pub fn step(&mut self, dt: f64) -> Result<StepReport, SimError> {
        if !(dt > 0.0) {
            return Err(SimError::NonPositiveDt(dt));
        }
        for b in self.bodies.iter_mut().filter(|b| b.kind == BodyKind::Dynamic) {
            b.linear_velocity = b.linear_velocity + self.gravity * dt;
        }

        let contacts = self.detect();
        let mut counts = vec![0u32; self.bodies.len()];
        for c in &contacts {
            counts[c.a] += 1;
            counts[c.b] += 1;
        }
        let inv_mass: Vec<f64> = self.bodies.iter().map(|b| b.inverse_mass()).collect();
        let mut accumulated = vec![0.0f64; contacts.len()];
        let mut deltas = vec![0.0f64; contacts.len()];
        for _ in 0..self.params.velocity_iterations {
            let snapshot: Vec<Vec3> = self.bodies.iter().map(|b| b.linear_velocity).collect();
            for (k, c) in contacts.iter().enumerate() {
                let w = inv_mass[c.a] + inv_mass[c.b];
                if w == 0.0 {
                    deltas[k] = 0.0;
                    continue;
                }
                let vn = (snapshot[c.b] - snapshot[c.a]).dot(c.normal);
                let target = if c.separation > 0.0 { -c.separation / dt } else { 0.0 };
                let share = counts_for(&counts, &inv_mass, c) as f64;
                let dj = (target - vn) / w / share;
                let next = (accumulated[k] + dj).max(0.0);
                deltas[k] = next - accumulated[k];
                accumulated[k] = next;
            }
            for (k, c) in contacts.iter().enumerate() {
                let d = deltas[k];
                if d == 0.0 {
                    continue;
                }
                if inv_mass[c.a] > 0.0 {
                    let v = self.bodies[c.a].linear_velocity;
                    self.bodies[c.a].linear_velocity = v - c.normal * (d * inv_mass[c.a]);
                }
                if inv_mass[c.b] > 0.0 {
                    let v = self.bodies[c.b].linear_velocity;
                    self.bodies[c.b].linear_velocity = v + c.normal * (d * inv_mass[c.b]);
                }
            }
        }

        for (id, b) in self.bodies.iter_mut().enumerate() {
            match b.kind {
                BodyKind::Dynamic => {
                    let p = b.position() + b.linear_velocity * dt;
                    let q = if b.lock_rotation {
                        b.angular_velocity = Vec3::ZERO;
                        b.pose.rotation()
                    } else {
                        Quat::from_rotation_vector(b.angular_velocity * dt).mul(b.pose.rotation())
                    };
                    b.pose = RigidTransform::new(q, p);
                }
                BodyKind::Kinematic => {
                    if let Some(t) = self.kinematic_targets[id].take() {
                        b.pose = t;
                    } else {
                        b.linear_velocity = Vec3::ZERO;
                    }
                }
                BodyKind::Static => {}
            }
        }

        self.project_positions(&inv_mass);

        for (id, b) in self.bodies.iter().enumerate() {
            if !b.pose.is_finite() || !b.linear_velocity.is_finite() {
                return Err(SimError::NonFinite { body: id });
            }
        }

        let impulses = contacts
            .iter()
            .zip(&accumulated)
            .filter(|(_, j)| **j > 0.0)
            .map(|(c, j)| ContactImpulse {
                body_a: c.a,
                body_b: c.b,
                point: c.point,
                normal: c.normal,
                magnitude: *j,
                hand_collider: self.bodies[c.a].hand_collider(),
            })
            .collect();
        Ok(StepReport { impulses, contacts: contacts.len() })
    }

    fn project_positions(&mut self, inv_mass: &[f64]) {
        for _ in 0..self.params.position_iterations {
            let contacts = self.detect();
            let mut counts = vec![0u32; self.bodies.len()];
            let mut shift = vec![Vec3::ZERO; self.bodies.len()];
            let mut any = false;
            for c in contacts.iter().filter(|c| c.separation < -self.params.slop) {
                counts[c.a] += 1;
                counts[c.b] += 1;
            }
            for c in contacts.iter().filter(|c| c.separation < -self.params.slop) {
                let w = inv_mass[c.a] + inv_mass[c.b];
                if w == 0.0 {
                    continue;
                }
                let share = counts_for(&counts, inv_mass, c) as f64;
                let corr = (-c.separation - self.params.slop) * self.params.position_correction / w / share;
                shift[c.a] = shift[c.a] - c.normal * (corr * inv_mass[c.a]);
                shift[c.b] = shift[c.b] + c.normal * (corr * inv_mass[c.b]);
                any = true;
            }
            if !any {
                break;
            }
            for (b, s) in self.bodies.iter_mut().zip(&shift) {
                if b.kind == BodyKind::Dynamic && *s != Vec3::ZERO {
                    b.pose = b.pose.with_translation(b.position() + *s);
                }
            }
        }
    }

    /// Kinetic plus gravitational potential energy of dynamic bodies.
    pub fn mechanical_energy(&self) -> f64 {
        self.bodies
            .iter()
            .filter(|b| b.kind == BodyKind::Dynamic)
            .map(|b| 0.5 * b.mass * b.linear_velocity.dot(b.linear_velocity) - b.mass * self.gravity.dot(b.position()))
            .sum()
    }
}

/// Number of contacts sharing the dynamic body of a pair, at least 1.
fn counts_for(counts: &[u32], inv_mass: &[f64], c: &Contact) -> u32 {
    let ca = if inv_mass[c.a] > 0.0 { counts[c.a] } else { 0 };
    let cb = if inv_mass[c.b] > 0.0 { counts[c.b] } else { 0 };
    ca.max(cb).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: Vec3 = Vec3::new(0.0, -9.81, 0.0);

    fn desk_and_can(mass: f64) -> (SimWorld, BodyId) {
        let mut w = SimWorld::new(G, SolverParams::default());
        w.add_body(RigidBody::static_box(Vec3::new(0.0, 0.70, 0.0), Vec3::new(0.6, 0.05, 0.4), false)).unwrap();
        let can = w
            .add_body(RigidBody::dynamic_box(Vec3::new(0.0, 0.81, 0.0), Vec3::new(0.03, 0.06, 0.03), mass, BodyRole::Can(0)))
            .unwrap();
        (w, can)
    }

    #[test]
    fn resting_can_support_impulse_is_weight() {
        let (mut w, can) = desk_and_can(0.3);
        let dt = 0.001;
        for _ in 0..100 {
            let r = w.step(dt).unwrap();
            let j: f64 = r.impulses.iter().filter(|i| i.body_b == can).map(|i| i.magnitude).sum();
            assert!((j - 0.3 * 9.81 * dt).abs() < 1e-12);
        }
        assert!((w.body(can).position().y - 0.81).abs() < 1e-9);
    }

    #[test]
    fn free_fall_one_second() {
        let mut w = SimWorld::new(G, SolverParams::default());
        let b = w.add_body(RigidBody::dynamic_sphere(Vec3::ZERO, 0.01, 1.0, BodyRole::Scenery)).unwrap();
        for _ in 0..1000 {
            w.step(0.001).unwrap();
        }
        assert!((w.body(b).linear_velocity.y + 9.81).abs() < 1e-9);
    }

    #[test]
    fn falling_can_energy_never_increases() {
        let (mut w, can) = desk_and_can(0.15);
        let b = w.bodies[can];
        w.bodies[can].pose = b.pose.with_translation(Vec3::new(0.0, 0.95, 0.0));
        let mut e = w.mechanical_energy();
        for _ in 0..600 {
            w.step(0.001).unwrap();
            let e2 = w.mechanical_energy();
            assert!(e2 <= e + 1e-9, "{e2} > {e}");
            e = e2;
        }
        assert!((w.body(can).position().y - 0.81).abs() < 1e-4);
    }

    #[test]
    fn hand_sphere_pushes_can() {
        let (mut w, can) = desk_and_can(0.1);
        let h = w.add_body(RigidBody::hand_sphere(Vec3::new(-0.06, 0.81, 0.0), 0.009, 0)).unwrap();
        let mut pushed = false;
        for k in 1..=100 {
            w.set_kinematic_target(h, Vec3::new(-0.06 + 0.0005 * k as f64, 0.81, 0.0), 0.001).unwrap();
            let r = w.step(0.001).unwrap();
            for i in &r.impulses {
                if i.hand_collider == Some(0) {
                    assert_eq!(i.body_a, h);
                    assert!((i.normal - Vec3::X).norm() < 1e-12);
                    pushed = true;
                }
            }
        }
        assert!(pushed);
        assert!(w.body(can).position().x > 0.0);
    }

    #[test]
    fn rejects_bad_bodies() {
        let mut w = SimWorld::new(G, SolverParams::default());
        let mut b = RigidBody::dynamic_box(Vec3::ZERO, Vec3::splat(0.1), 1.0, BodyRole::Scenery);
        b.lock_rotation = false;
        assert!(w.add_body(b).is_err());
        assert!(w.add_body(RigidBody::dynamic_sphere(Vec3::ZERO, 0.1, 0.0, BodyRole::Scenery)).is_err());
        assert!(w.step(0.0).is_err());
    }

    #[test]
    fn non_finite_state_halts() {
        let mut w = SimWorld::new(G, SolverParams::default());
        let b = w.add_body(RigidBody::dynamic_sphere(Vec3::ZERO, 0.1, 1.0, BodyRole::Scenery)).unwrap();
        w.bodies[b].linear_velocity = Vec3::new(f64::INFINITY, 0.0, 0.0);
        assert_eq!(w.step(0.001), Err(SimError::NonFinite { body: b }));
    }
}
