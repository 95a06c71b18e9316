//! Magnetic docking joint, interception and the dock lifecycle.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::devices::ArmCommand;
use crate::frames::RigidTransform;
use crate::math::{deg_to_rad, hypot, Aabb, Quat, Vec3};

pub const GRAVITY: f64 = 9.81;

/// One of the six relative motions a joint may constrain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dof {
    Tx,
    Ty,
    Tz,
    Rx,
    Ry,
    Rz,
}

impl Dof {
    pub const ALL: [Dof; 6] = [Dof::Tx, Dof::Ty, Dof::Tz, Dof::Rx, Dof::Ry, Dof::Rz];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, Dof::Rx | Dof::Ry | Dof::Rz)
    }

    pub fn name(self) -> &'static str {
        match self {
            Dof::Tx => "TX",
            Dof::Ty => "TY",
            Dof::Tz => "TZ",
            Dof::Rx => "RX",
            Dof::Ry => "RY",
            Dof::Rz => "RZ",
        }
    }
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Six-bit set of DOFs; bit `i` is `Dof::ALL[i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct DofMask(u8);

impl DofMask {
    pub const NONE: DofMask = DofMask(0);
    pub const ALL: DofMask = DofMask(0b11_1111);

    pub const fn from_bits(bits: u8) -> DofMask {
        DofMask(bits & 0b11_1111)
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub fn of(dofs: &[Dof]) -> DofMask {
        DofMask(dofs.iter().fold(0, |m, d| m | (1 << d.index())))
    }

    pub fn contains(self, d: Dof) -> bool {
        self.0 & (1 << d.index()) != 0
    }

    pub fn without(self, d: Dof) -> DofMask {
        DofMask(self.0 & !(1 << d.index()))
    }

    pub fn complement(self) -> DofMask {
        DofMask(!self.0 & 0b11_1111)
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn iter(self) -> impl Iterator<Item = Dof> {
        Dof::ALL.into_iter().filter(move |d| self.contains(*d))
    }
}

/// Force (N) and torque (Nm) pair.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Wrench {
    pub force: Vec3,
    pub torque: Vec3,
}

impl Wrench {
    pub const ZERO: Wrench = Wrench { force: Vec3::ZERO, torque: Vec3::ZERO };

    pub fn new(force: Vec3, torque: Vec3) -> Self {
        Wrench { force, torque }
    }

    pub fn component(&self, d: Dof) -> f64 {
        match d {
            Dof::Tx => self.force.x,
            Dof::Ty => self.force.y,
            Dof::Tz => self.force.z,
            Dof::Rx => self.torque.x,
            Dof::Ry => self.torque.y,
            Dof::Rz => self.torque.z,
        }
    }

    pub fn set_component(&mut self, d: Dof, v: f64) {
        match d {
            Dof::Tx => self.force.x = v,
            Dof::Ty => self.force.y = v,
            Dof::Tz => self.force.z = v,
            Dof::Rx => self.torque.x = v,
            Dof::Ry => self.torque.y = v,
            Dof::Rz => self.torque.z = v,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.force.is_finite() && self.torque.is_finite()
    }

    /// Expresses the wrench in another frame rotated by `q`.
    pub fn rotated(&self, q: Quat) -> Wrench {
        Wrench { force: q.rotate(self.force), torque: q.rotate(self.torque) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DockJointKind {
    /// Flat plate held by the magnet; spins about the normal and slides when overloaded.
    PlateSlip,
    /// Plate with a high-friction face; every DOF is friction-held.
    PlateFriction,
    /// Pin through the plate; rotation about the normal is free.
    PinnedRotary,
    /// Teeth on the holder lock every DOF.
    Toothed,
    /// Rail that leaves one sliding direction free.
    Prismatic,
    FreeAxes(DofMask),
}

impl DockJointKind {
    /// Constrained DOFs in the joint frame (z along the plate normal).
    pub fn constrained(self) -> DofMask {
        match self {
            DockJointKind::PlateSlip | DockJointKind::PinnedRotary => DofMask::ALL.without(Dof::Rz),
            DockJointKind::PlateFriction | DockJointKind::Toothed => DofMask::ALL,
            DockJointKind::Prismatic => DofMask::ALL.without(Dof::Tx),
            DockJointKind::FreeAxes(m) => m,
        }
    }

    pub fn free(self) -> DofMask {
        self.constrained().complement()
    }

    /// DOFs whose load is limited by face friction rather than held rigidly.
    pub fn friction_limited(self) -> DofMask {
        match self {
            DockJointKind::PlateSlip => DofMask::of(&[Dof::Tx, Dof::Ty]),
            DockJointKind::PlateFriction => DofMask::of(&[Dof::Tx, Dof::Ty, Dof::Rz]),
            _ => DofMask::NONE,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DockJointKind::PlateSlip => "plate_slip",
            DockJointKind::PlateFriction => "plate_friction",
            DockJointKind::PinnedRotary => "pinned_rotary",
            DockJointKind::Toothed => "toothed",
            DockJointKind::Prismatic => "prismatic",
            DockJointKind::FreeAxes(_) => "free_axes",
        }
    }
}

/// Tunables of the magnetic joint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointParams {
    /// Axial holding force, N.
    pub breaking_force: f64,
    pub friction_mu: f64,
    /// Magnet face radius, m.
    pub contact_radius: f64,
    /// Largest tangential offset on the plate at which the magnet can still attach, m.
    pub plate_radius: f64,
    pub pos_tol: f64,
    pub ang_tol: f64,
}

impl Default for JointParams {
    fn default() -> Self {
        JointParams {
            breaking_force: 5.0 * GRAVITY,
            friction_mu: 0.4,
            contact_radius: 0.0125,
            plate_radius: 0.05,
            pos_tol: 0.005,
            ang_tol: deg_to_rad(5.0),
        }
    }
}

impl JointParams {
    pub fn validate(&self) -> Result<(), DockError> {
        let ok = self.breaking_force > 0.0
            && self.friction_mu >= 0.0
            && self.contact_radius > 0.0
            && self.plate_radius > 0.0
            && self.pos_tol > 0.0
            && self.ang_tol > 0.0;
        if ok && [self.breaking_force, self.friction_mu, self.contact_radius, self.plate_radius].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(DockError::InvalidParams)
        }
    }

    /// Off-axis torque at which the plate peels off the magnet.
    pub fn peel_torque(&self) -> f64 {
        self.breaking_force * self.contact_radius * 0.5
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DockJoint {
    pub kind: DockJointKind,
    pub breaking_force: f64,
    pub friction_mu: f64,
    pub contact_radius: f64,
    /// Magnet pose in the plate frame at attach time.
    pub attach_pose: RigidTransform,
}

impl DockJoint {
    pub fn new(kind: DockJointKind, params: &JointParams, attach_pose: RigidTransform) -> Self {
        DockJoint {
            kind,
            breaking_force: params.breaking_force,
            friction_mu: params.friction_mu,
            contact_radius: params.contact_radius,
            attach_pose,
        }
    }

    pub fn peel_torque(&self) -> f64 {
        self.breaking_force * self.contact_radius * 0.5
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum DockError {
    #[error("wrench is not finite")]
    NonFiniteWrench,
    #[error("illegal dock transition {from} -> {to}")]
    IllegalTransition { from: DockState, to: DockState },
    #[error("time step and speed must be positive")]
    InvalidStep,
    #[error("joint parameters must be positive and finite")]
    InvalidParams,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transmission {
    pub wrench: Wrench,
    pub slip: bool,
    pub released: bool,
}

/// Wrench carried by the joint, expressed in the joint frame.
///
/// `wrench.force.z > 0` pulls the plate away from the magnet.
pub fn joint_transmit(joint: &DockJoint, wrench: &Wrench) -> Result<Transmission, DockError> {
    if !wrench.is_finite() {
        return Err(DockError::NonFiniteWrench);
    }
    let released = Transmission { wrench: Wrench::ZERO, slip: false, released: true };
    let constrained = joint.kind.constrained();
    if constrained.contains(Dof::Tz) && wrench.force.z > joint.breaking_force {
        return Ok(released);
    }
    if (constrained.contains(Dof::Rx) || constrained.contains(Dof::Ry))
        && hypot(wrench.torque.x, wrench.torque.y) > joint.peel_torque()
    {
        return Ok(released);
    }

    let mut out = *wrench;
    for d in constrained.complement().iter() {
        out.set_component(d, 0.0);
    }

    let limited = joint.kind.friction_limited() & constrained;
    let mut slip = false;
    if limited.count() > 0 {
        let normal = (joint.breaking_force - wrench.force.z).max(0.0);
        let f_lim = joint.friction_mu * normal;
        if limited.contains(Dof::Tx) || limited.contains(Dof::Ty) {
            let fx = if limited.contains(Dof::Tx) { out.force.x } else { 0.0 };
            let fy = if limited.contains(Dof::Ty) { out.force.y } else { 0.0 };
            let ft = hypot(fx, fy);
            if ft > f_lim {
                let s = if ft > 0.0 { f_lim / ft } else { 0.0 };
                if limited.contains(Dof::Tx) {
                    out.force.x *= s;
                }
                if limited.contains(Dof::Ty) {
                    out.force.y *= s;
                }
                slip = true;
            }
        }
        if limited.contains(Dof::Rz) {
            let t_lim = f_lim * joint.contact_radius;
            if out.torque.z.abs() > t_lim {
                out.torque.z = out.torque.z.clamp(-t_lim, t_lim);
                slip = true;
            }
        }
    }
    Ok(Transmission { wrench: out, slip, released: false })
}

impl core::ops::BitAnd for DofMask {
    type Output = DofMask;
    fn bitand(self, o: DofMask) -> DofMask {
        DofMask(self.0 & o.0)
    }
}

impl core::ops::BitOr for DofMask {
    type Output = DofMask;
    fn bitor(self, o: DofMask) -> DofMask {
        DofMask(self.0 | o.0)
    }
}

/// Geometric relation between magnet and plate faces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceAlignment {
    /// Signed distance of the magnet face from the plate along the plate normal, m.
    pub normal_gap: f64,
    /// Offset of the magnet center across the plate, m.
    pub tangential_offset: f64,
    /// Angle between the face normals, rad.
    pub misalignment: f64,
}

pub fn face_alignment(magnet_pose: &RigidTransform, plate_pose: &RigidTransform) -> FaceAlignment {
    let rel = plate_pose.inverse().compose(magnet_pose);
    let p = rel.translation();
    let mz = rel.rotation().rotate(Vec3::Z);
    FaceAlignment {
        normal_gap: p.z,
        tangential_offset: hypot(p.x, p.y),
        misalignment: crate::math::acos(mz.z.clamp(-1.0, 1.0)),
    }
}

/// Attaches when the energized magnet sits on the plate within tolerance.
///
/// The joint stores the measured relative pose, so attaching never snaps
/// either body.
pub fn try_attach(
    magnet_pose: &RigidTransform,
    plate_pose: &RigidTransform,
    energized: bool,
    kind: DockJointKind,
    params: &JointParams,
) -> Option<DockJoint> {
    if !energized {
        return None;
    }
    let a = face_alignment(magnet_pose, plate_pose);
    if a.normal_gap.abs() <= params.pos_tol
        && a.tangential_offset <= params.plate_radius
        && a.misalignment <= params.ang_tol
    {
        let attach_pose = plate_pose.inverse().compose(magnet_pose);
        Some(DockJoint::new(kind, params, attach_pose))
    } else {
        None
    }
}

/// Fixed geometry between the arm's effector pivot and the magnet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToolMount {
    pub effector_to_tool: RigidTransform,
    /// Magnet orientation held during pursuit, in the frame of the pursued poses.
    pub orientation: Quat,
}

impl ToolMount {
    pub fn tool_to_effector(&self) -> RigidTransform {
        self.effector_to_tool.inverse()
    }
}

/// Next magnet waypoint: straight at the target, at most `max_speed * dt` away.
pub fn pursuit_waypoint(
    tool_pose: &RigidTransform,
    target_pose: &RigidTransform,
    orientation: Quat,
    max_speed: f64,
    dt: f64,
) -> Result<RigidTransform, DockError> {
    if !(dt > 0.0 && max_speed > 0.0) {
        return Err(DockError::InvalidStep);
    }
    let cur = tool_pose.translation();
    let d = target_pose.translation() - cur;
    let dist = d.norm();
    let reach = max_speed * dt;
    let next = if dist <= reach { target_pose.translation() } else { cur + d * (reach / dist) };
    Ok(RigidTransform::new(orientation, next))
}

/// Pure-pursuit command for one frame. Poses are in the arm base frame;
/// `tool_pose` and `target_pose` are magnet poses.
pub fn pursue(
    tool_pose: &RigidTransform,
    target_pose: &RigidTransform,
    mount: &ToolMount,
    max_speed: f64,
    dt: f64,
) -> Result<ArmCommand, DockError> {
    let waypoint = pursuit_waypoint(tool_pose, target_pose, mount.orientation, max_speed, dt)?;
    let moving = waypoint.translation() != tool_pose.translation();
    Ok(ArmCommand {
        target: waypoint.compose(&mount.tool_to_effector()),
        linear_speed: if moving { max_speed } else { 0.0 },
        angular_speed: if moving { max_speed / 0.1 } else { 0.0 },
    })
}

/// Constant-velocity extrapolation of the hand.
pub fn predict_position(position: Vec3, velocity: Vec3, horizon: f64) -> Vec3 {
    position + velocity * horizon
}

/// One arm as seen by the interception planner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterceptCandidate {
    pub base_pose: RigidTransform,
    pub workspace: Aabb,
    pub tool_position: Vec3,
    /// Where the magnet would have to be to meet the predicted hand.
    pub predicted_target: Vec3,
    /// Effector position matching `predicted_target`.
    pub predicted_effector: Vec3,
    pub eligible: bool,
}

impl InterceptCandidate {
    pub fn reaches(&self, p_world: Vec3, margin: f64) -> bool {
        let p = self.base_pose.inverse().transform_point(p_world);
        self.workspace.inflated(margin).contains(p)
    }
}

/// Picks the arm that should intercept the hand.
///
/// Among eligible arms whose inflated workspace contains their predicted
/// effector target, the one whose magnet is nearest its predicted target wins;
/// ties go to the lowest index.
pub fn select_interceptor(candidates: &[InterceptCandidate], margin: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if !c.eligible || !c.reaches(c.predicted_effector, margin) {
            continue;
        }
        let d = c.tool_position.distance(c.predicted_target);
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DockState {
    Free,
    Intercepting,
    Docked,
    Releasing,
}

impl DockState {
    pub fn name(self) -> &'static str {
        match self {
            DockState::Free => "free",
            DockState::Intercepting => "intercepting",
            DockState::Docked => "docked",
            DockState::Releasing => "releasing",
        }
    }

    pub fn can_transition_to(self, to: DockState) -> bool {
        use DockState::*;
        matches!(
            (self, to),
            (Free, Intercepting) | (Intercepting, Docked) | (Intercepting, Free) | (Docked, Releasing) | (Releasing, Free)
        )
    }
}

impl fmt::Display for DockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inputs to one lifecycle step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DockContext {
    /// The hand is inside or heading into this arm's interception region.
    pub approaching: bool,
    /// `try_attach` succeeded this tick.
    pub attached: bool,
    /// The joint broke this tick.
    pub released: bool,
    pub release_command: bool,
    pub abort: bool,
    /// Consecutive ticks the magnet has been de-energized.
    pub magnet_off_ticks: u32,
}

/// Next lifecycle state. Always returns a legal successor (or the same state).
pub fn dock_step(state: DockState, ctx: &DockContext) -> DockState {
    match state {
        DockState::Free if ctx.approaching && !ctx.abort => DockState::Intercepting,
        DockState::Intercepting if ctx.attached => DockState::Docked,
        DockState::Intercepting if ctx.abort || !ctx.approaching => DockState::Free,
        DockState::Docked if ctx.released || ctx.release_command => DockState::Releasing,
        DockState::Releasing if ctx.magnet_off_ticks >= 1 => DockState::Free,
        s => s,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DockTransition {
    pub tick: u64,
    pub from: DockState,
    pub to: DockState,
}

/// Lifecycle state with a transition history stamped in control ticks.
#[derive(Clone, Debug, PartialEq)]
pub struct DockMachine {
    state: DockState,
    last_transition: u64,
    history: Vec<DockTransition>,
    rejected: Vec<DockError>,
}

impl Default for DockMachine {
    fn default() -> Self {
        DockMachine::new(DockState::Free)
    }
}

impl DockMachine {
    pub fn new(state: DockState) -> Self {
        DockMachine { state, last_transition: 0, history: Vec::new(), rejected: Vec::new() }
    }

    pub fn state(&self) -> DockState {
        self.state
    }

    pub fn last_transition(&self) -> u64 {
        self.last_transition
    }

    pub fn history(&self) -> &[DockTransition] {
        &self.history
    }

    pub fn rejected(&self) -> &[DockError] {
        &self.rejected
    }

    pub fn step(&mut self, tick: u64, ctx: &DockContext) -> Option<DockTransition> {
        let next = dock_step(self.state, ctx);
        if next == self.state {
            None
        } else {
            self.transition(tick, next).ok()
        }
    }

    /// Requests an explicit transition; illegal requests are recorded and rejected.
    pub fn transition(&mut self, tick: u64, to: DockState) -> Result<DockTransition, DockError> {
        if !self.state.can_transition_to(to) {
            let e = DockError::IllegalTransition { from: self.state, to };
            self.rejected.push(e);
            return Err(e);
        }
        let t = DockTransition { tick, from: self.state, to };
        self.state = to;
        self.last_transition = tick;
        self.history.push(t);
        Ok(t)
    }
}

/// Boolean magnet command channel with a fixed actuation latency in ticks.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnetChannel {
    latency: u64,
    pending: VecDeque<(u64, bool)>,
    commanded: bool,
    energized: bool,
    off_ticks: u32,
}

impl MagnetChannel {
    pub fn new(latency_ticks: u64) -> Self {
        MagnetChannel { latency: latency_ticks, pending: VecDeque::new(), commanded: false, energized: false, off_ticks: 0 }
    }

    /// Starts energized, for scenarios that begin docked.
    pub fn energized(latency_ticks: u64) -> Self {
        MagnetChannel { commanded: true, energized: true, ..MagnetChannel::new(latency_ticks) }
    }

    pub fn commanded(&self) -> bool {
        self.commanded
    }

    pub fn is_energized(&self) -> bool {
        self.energized
    }

    pub fn off_ticks(&self) -> u32 {
        self.off_ticks
    }

    /// Sends a command at `tick`; repeated identical commands are ignored.
    pub fn command(&mut self, tick: u64, on: bool) {
        if on != self.commanded {
            self.commanded = on;
            self.pending.push_back((tick + self.latency, on));
        }
    }

    /// Advances to `tick` and returns whether the magnet is energized.
    pub fn update(&mut self, tick: u64) -> bool {
        while let Some(&(due, on)) = self.pending.front() {
            if due > tick {
                break;
            }
            self.energized = on;
            self.pending.pop_front();
        }
        if self.energized {
            self.off_ticks = 0;
        } else {
            self.off_ticks = self.off_ticks.saturating_add(1);
        }
        self.energized
    }

    /// Immediate de-energize, used when the joint breaks mechanically.
    pub fn cut(&mut self) {
        self.pending.clear();
        self.commanded = false;
        self.energized = false;
    }
}
