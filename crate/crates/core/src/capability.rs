//! Capability algebra of hybrid devices.
//!
//! Grounded arms contribute bounded workspaces with ground-referenced force and
//! torque. A worn glove contributes unbounded reach and finger torques. The
//! docking joints decide which arm DOFs survive the coupling.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::devices::{ArmSpec, DeviceError, GloveSpec};
use crate::docking::{Dof, DockJointKind, DofMask};
use crate::frames::RigidTransform;
use crate::math::{Aabb, Vec3};

/// A length, angle or count that may be unbounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extent {
    Finite(f64),
    Unbounded,
}

impl Extent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extent::Finite(v) => Some(v),
            Extent::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Extent::Unbounded)
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(v) => write!(f, "{v}"),
            Extent::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Device {
    Arm(ArmSpec),
    Glove { spec: GloveSpec, hand: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DockEdge {
    pub parent: usize,
    pub child: usize,
    pub joint: DockJointKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyMode {
    /// One arm per glove.
    Single,
    /// Several arms hold the glove at once and share the load.
    Simultaneous,
    /// Several arms hold the glove one after another.
    Handover,
}

impl TopologyMode {
    pub fn name(self) -> &'static str {
        match self {
            TopologyMode::Single => "single",
            TopologyMode::Simultaneous => "simultaneous",
            TopologyMode::Handover => "handover",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum CapabilityError {
    #[error("edge refers to unknown device {0}")]
    UnknownDevice(usize),
    #[error("docking topology contains a cycle through device {0}")]
    Cyclic(usize),
    #[error("device {0} is not rooted at a grounded arm")]
    NotRooted(usize),
    #[error("device {0} has several parents but the topology mode is single")]
    MultipleParents(usize),
    #[error("hand {0} wears more than one glove")]
    DuplicateGlove(u32),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// One arm's workspace placed in the world.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlacedBox {
    pub base_pose: RigidTransform,
    pub workspace: Aabb,
}

impl PlacedBox {
    pub fn contains(&self, p_world: Vec3) -> bool {
        self.workspace.contains(self.base_pose.inverse().transform_point(p_world))
    }

    /// Axis-aligned world bounds.
    pub fn world_bounds(&self) -> Aabb {
        let (lo, hi) = (self.workspace.min(), self.workspace.max());
        let mut min = Vec3::splat(f64::INFINITY);
        let mut max = Vec3::splat(f64::NEG_INFINITY);
        for i in 0..8 {
            let c = Vec3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            );
            let w = self.base_pose.transform_point(c);
            min = min.min_elem(w);
            max = max.max_elem(w);
        }
        Aabb::new((min + max) * 0.5, (max - min) * 0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmContribution {
    pub device: usize,
    pub region: PlacedBox,
    /// Per-axis force, zero on DOFs the joint leaves free.
    pub force: Vec3,
    /// Per-axis torque, zero on DOFs the joint leaves free.
    pub torque: Vec3,
    pub rot_range_deg: [f64; 3],
    pub joint: DockJointKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationVolume {
    /// Regions where ground-referenced force is available.
    pub enhanced: Vec<PlacedBox>,
    /// Reach outside the enhanced regions: unbounded when a glove is worn.
    pub outside: Option<Extent>,
}

impl TranslationVolume {
    pub fn contains_enhanced(&self, p: Vec3) -> bool {
        self.enhanced.iter().any(|b| b.contains(p))
    }

    pub fn enhanced_bounds(&self) -> Option<Aabb> {
        let mut it = self.enhanced.iter().map(|b| b.world_bounds());
        let first = it.next()?;
        Some(it.fold(first, |a, b| a.union_bounds(&b)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridCapability {
    pub mode: TopologyMode,
    pub arms: Vec<ArmContribution>,
    pub translation: TranslationVolume,
    /// Grounded rotation volume per axis (RX, RY, RZ), degrees.
    pub rotation: [Extent; 3],
    /// Finger joint ranges of the worn glove, degrees.
    pub glove_rotation: Vec<Extent>,
    /// Wrist-relative rotations the glove leaves to the hand.
    pub hand_rotation: Vec<Extent>,
    pub force_envelope: Vec3,
    pub torque_envelope: Vec<(Dof, f64)>,
    pub glove_torques: Vec<f64>,
    pub degraded_dofs: DofMask,
}

/// Envelope available at one hand pose.
#[derive(Clone, Debug, PartialEq)]
pub struct PointEnvelope {
    pub force: Vec3,
    pub torque: Vec3,
    pub glove_torques: Vec<f64>,
    pub reaching_arms: Vec<usize>,
}

impl PointEnvelope {
    pub fn is_grounded(&self) -> bool {
        !self.reaching_arms.is_empty()
    }
}

fn combine(mode: TopologyMode, a: Vec3, b: Vec3) -> Vec3 {
    match mode {
        TopologyMode::Simultaneous => a + b,
        _ => a.max_elem(b),
    }
}

fn masked(v: Vec3, free: DofMask, dofs: [Dof; 3]) -> Vec3 {
    let mut out = v;
    for (i, d) in dofs.iter().enumerate() {
        if free.contains(*d) {
            match i {
                0 => out.x = 0.0,
                1 => out.y = 0.0,
                _ => out.z = 0.0,
            }
        }
    }
    out
}

fn validate_topology(devices: &[Device], edges: &[DockEdge], mode: TopologyMode) -> Result<(), CapabilityError> {
    let mut hands: Vec<u32> = Vec::new();
    for d in devices {
        match d {
            Device::Arm(a) => a.validate()?,
            Device::Glove { spec, hand } => {
                spec.validate()?;
                if hands.contains(hand) {
                    return Err(CapabilityError::DuplicateGlove(*hand));
                }
                hands.push(*hand);
            }
        }
    }
    for e in edges {
        for i in [e.parent, e.child] {
            if i >= devices.len() {
                return Err(CapabilityError::UnknownDevice(i));
            }
        }
        if e.parent == e.child {
            return Err(CapabilityError::Cyclic(e.child));
        }
        if matches!(devices[e.child], Device::Arm(_)) {
            return Err(CapabilityError::NotRooted(e.child));
        }
    }
    for child in 0..devices.len() {
        let parents = edges.iter().filter(|e| e.child == child).count();
        if parents > 1 && mode == TopologyMode::Single {
            return Err(CapabilityError::MultipleParents(child));
        }
    }
    // Every chain must climb to an arm without revisiting a device.
    for start in 0..devices.len() {
        if !edges.iter().any(|e| e.child == start) {
            continue;
        }
        let mut stack = alloc::vec![(start, 0usize)];
        while let Some((node, depth)) = stack.pop() {
            if depth > devices.len() {
                return Err(CapabilityError::Cyclic(start));
            }
            let parents: Vec<usize> = edges.iter().filter(|e| e.child == node).map(|e| e.parent).collect();
            if parents.is_empty() && !matches!(devices[node], Device::Arm(_)) {
                return Err(CapabilityError::NotRooted(start));
            }
            for p in parents {
                if p == start {
                    return Err(CapabilityError::Cyclic(start));
                }
                stack.push((p, depth + 1));
            }
        }
    }
    Ok(())
}

/// Arms that ground `glove` through some chain of docking edges, with the
/// joint nearest the glove.
fn grounding_arms(devices: &[Device], edges: &[DockEdge], glove: usize) -> Vec<(usize, DockJointKind)> {
    let mut out: Vec<(usize, DockJointKind)> = Vec::new();
    let mut stack: Vec<(usize, DockJointKind)> =
        edges.iter().filter(|e| e.child == glove).map(|e| (e.parent, e.joint)).collect();
    while let Some((node, joint)) = stack.pop() {
        if matches!(devices[node], Device::Arm(_)) {
            if !out.iter().any(|(i, _)| *i == node) {
                out.push((node, joint));
            }
        } else {
            stack.extend(edges.iter().filter(|e| e.child == node).map(|e| (e.parent, joint)));
        }
    }
    out.sort_by_key(|(i, _)| *i);
    out
}

/// Composes devices and docking joints into one hybrid capability.
pub fn compose(devices: &[Device], edges: &[DockEdge], mode: TopologyMode) -> Result<HybridCapability, CapabilityError> {
    validate_topology(devices, edges, mode)?;

    let gloves: Vec<(usize, GloveSpec)> = devices
        .iter()
        .enumerate()
        .filter_map(|(i, d)| match d {
            Device::Glove { spec, .. } => Some((i, *spec)),
            Device::Arm(_) => None,
        })
        .collect();

    let mut docked: Vec<(usize, DockJointKind)> = Vec::new();
    for (g, _) in &gloves {
        for a in grounding_arms(devices, edges, *g) {
            if !docked.iter().any(|(i, _)| *i == a.0) {
                docked.push(a);
            }
        }
    }
    if gloves.is_empty() {
        docked = devices
            .iter()
            .enumerate()
            .filter(|(_, d)| matches!(d, Device::Arm(_)))
            .map(|(i, _)| (i, DockJointKind::Toothed))
            .collect();
    }
    docked.sort_by_key(|(i, _)| *i);

    let mut arms = Vec::new();
    let mut degraded = DofMask::NONE;
    for (i, joint) in &docked {
        let Device::Arm(spec) = devices[*i] else { continue };
        let free = if gloves.is_empty() { DofMask::NONE } else { joint.free() };
        degraded = degraded | free;
        arms.push(ArmContribution {
            device: *i,
            region: PlacedBox { base_pose: spec.base_pose, workspace: spec.workspace },
            force: masked(spec.max_force, free, [Dof::Tx, Dof::Ty, Dof::Tz]),
            torque: masked(spec.max_torque, free, [Dof::Rx, Dof::Ry, Dof::Rz]),
            rot_range_deg: spec.rot_range_deg,
            joint: *joint,
        });
    }

    let mut force = Vec3::ZERO;
    let mut torque = Vec3::ZERO;
    for a in &arms {
        force = combine(mode, force, a.force);
        torque = combine(mode, torque, a.torque);
    }

    let rotation = if arms.is_empty() {
        [Extent::Unbounded; 3]
    } else {
        let mut r = [0.0f64; 3];
        for a in &arms {
            for k in 0..3 {
                r[k] = r[k].max(a.rot_range_deg[k]);
            }
        }
        let axes = [Dof::Rx, Dof::Ry, Dof::Rz];
        core::array::from_fn(|k| if degraded.contains(axes[k]) { Extent::Unbounded } else { Extent::Finite(r[k]) })
    };

    let torque_envelope = [Dof::Rx, Dof::Ry, Dof::Rz]
        .into_iter()
        .zip(torque.to_array())
        .filter(|(d, t)| !degraded.contains(*d) && *t > 0.0)
        .collect();

    let mut glove_rotation = Vec::new();
    let mut glove_torques = Vec::new();
    let mut hand_rotation = Vec::new();
    for (_, g) in &gloves {
        for _ in 0..g.actuated_dofs {
            glove_rotation.push(Extent::Finite(g.joint_range_deg));
            glove_torques.push(g.max_joint_torque);
        }
        if !arms.is_empty() {
            hand_rotation.extend([Extent::Unbounded; 6]);
        }
    }

    Ok(HybridCapability {
        mode,
        translation: TranslationVolume {
            enhanced: arms.iter().map(|a| a.region).collect(),
            outside: if gloves.is_empty() { None } else { Some(Extent::Unbounded) },
        },
        arms,
        rotation,
        glove_rotation,
        hand_rotation,
        force_envelope: force,
        torque_envelope,
        glove_torques,
        degraded_dofs: degraded,
    })
}

/// Force and torque available with the hand at `pose`.
pub fn capability_at(cap: &HybridCapability, pose: &RigidTransform) -> PointEnvelope {
    let p = pose.translation();
    let mut force = Vec3::ZERO;
    let mut torque = Vec3::ZERO;
    let mut reaching = Vec::new();
    for a in &cap.arms {
        if a.region.contains(p) {
            force = combine(cap.mode, force, a.force);
            torque = combine(cap.mode, torque, a.torque);
            reaching.push(a.device);
        }
    }
    PointEnvelope { force, torque, glove_torques: cap.glove_torques.clone(), reaching_arms: reaching }
}
