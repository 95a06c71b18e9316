//! Device models: the grounded 6-DOF arm and the hand exoskeleton.
//!
//! The arm is driven through an admittance interface (target pose plus speed
//! limits, consumed by a 1 kHz callback). Forces are rendered by offsetting that
//! target by a Hooke's-law displacement. The glove is driven by per-finger
//! stop angles and spring constants in the normalized flex space measured at
//! calibration time.

use thiserror::Error;

use crate::frames::RigidTransform;
use crate::math::{deg_to_rad, Aabb, Quat, Vec3};

pub const FINGERS: usize = 5;
pub const SENSED_DOFS: usize = 11;
/// Sensor vector layout: five flex values, five abduction values, thumb rotation.
pub const FLEX_OFFSET: usize = 0;
pub const ABDUCTION_OFFSET: usize = 5;
pub const THUMB_ROTATION_INDEX: usize = 10;

/// Arm callback period.
pub const CONTROL_TICK_US: u64 = 1_000;
/// Glove updates may not be issued more often than this.
pub const GLOVE_MIN_INTERVAL_US: u64 = 33_300;
/// Arm targets must be refreshed at least this often.
pub const ARM_MAX_INTERVAL_US: u64 = 33_300;

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum DeviceError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("stiffness must be positive, got {0}")]
    NonPositiveStiffness(f64),
    #[error("invalid device spec: {0}")]
    InvalidSpec(&'static str),
    #[error("calibration for sensor {dof} has min >= max")]
    InvalidCalibration { dof: usize },
    #[error("invalid glove command for finger {finger}: {reason}")]
    InvalidGloveCommand { finger: usize, reason: &'static str },
    #[error("arm command is not finite")]
    NonFiniteCommand,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmSpec {
    /// Reachable effector positions, in the arm base frame.
    pub workspace: Aabb,
    /// Full angular range per axis (RX, RY, RZ), centered on the neutral orientation.
    pub rot_range_deg: [f64; 3],
    pub max_force: Vec3,
    pub max_torque: Vec3,
    /// Spring constant of the control loop, N/m.
    pub stiffness: f64,
    pub base_pose: RigidTransform,
    /// Bandwidth of the position tracker, 1/s.
    pub tracking_gain: f64,
    /// Angular speed used when a command does not ask for less, rad/s.
    pub max_angular_speed: f64,
}

impl ArmSpec {
    /// Haption Virtuose 6D: 1330 x 575 x 1020 mm, 330 x 130 x 270 deg, 9.5 N and 1 Nm per axis.
    pub fn virtuose_6d(base_pose: RigidTransform) -> Self {
        ArmSpec {
            workspace: Aabb::from_size(Vec3::ZERO, Vec3::new(1.330, 0.575, 1.020)),
            rot_range_deg: [330.0, 130.0, 270.0],
            max_force: Vec3::splat(9.5),
            max_torque: Vec3::splat(1.0),
            stiffness: 1000.0,
            base_pose,
            tracking_gain: 1000.0,
            max_angular_speed: 6.0,
        }
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        let h = self.workspace.half_extents;
        if !(h.x > 0.0 && h.y > 0.0 && h.z > 0.0) {
            return Err(DeviceError::InvalidSpec("workspace extents must be positive"));
        }
        if !self.rot_range_deg.iter().all(|r| *r > 0.0) {
            return Err(DeviceError::InvalidSpec("rotation ranges must be positive"));
        }
        if !(self.max_force.x > 0.0 && self.max_force.y > 0.0 && self.max_force.z > 0.0) {
            return Err(DeviceError::InvalidSpec("force limits must be positive"));
        }
        if !(self.max_torque.x > 0.0 && self.max_torque.y > 0.0 && self.max_torque.z > 0.0) {
            return Err(DeviceError::InvalidSpec("torque limits must be positive"));
        }
        if !(self.stiffness > 0.0) {
            return Err(DeviceError::NonPositiveStiffness(self.stiffness));
        }
        if !(self.tracking_gain > 0.0 && self.max_angular_speed > 0.0) {
            return Err(DeviceError::InvalidSpec("tracker gain and angular speed must be positive"));
        }
        Ok(())
    }

    /// World-frame position of a base-frame point.
    pub fn to_world(&self, p_base: Vec3) -> Vec3 {
        self.base_pose.transform_point(p_base)
    }

    pub fn to_base(&self, p_world: Vec3) -> Vec3 {
        self.base_pose.inverse().transform_point(p_world)
    }

    /// Clamps an orientation (base frame) into the per-axis rotation ranges.
    pub fn clamp_rotation(&self, q: Quat) -> (Quat, bool) {
        let (rx, ry, rz) = q.to_euler_zyx();
        let lim = |i: usize| deg_to_rad(self.rot_range_deg[i]) * 0.5;
        let cx = rx.clamp(-lim(0), lim(0));
        let cy = ry.clamp(-lim(1), lim(1));
        let cz = rz.clamp(-lim(2), lim(2));
        if cx == rx && cy == ry && cz == rz {
            (q.normalized(), false)
        } else {
            (Quat::from_euler_zyx(cx, cy, cz), true)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmState {
    /// True effector pose in the arm base frame.
    pub pose: RigidTransform,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmCommand {
    /// Effector pivot target in the arm base frame.
    pub target: RigidTransform,
    /// m/s
    pub linear_speed: f64,
    /// rad/s
    pub angular_speed: f64,
}

impl ArmCommand {
    pub fn hold(pose: RigidTransform) -> Self {
        ArmCommand { target: pose, linear_speed: 0.0, angular_speed: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmStep {
    pub state: ArmState,
    pub target_clamped: bool,
    pub rotation_clamped: bool,
}

/// Advances the arm by one callback period.
///
/// The inner loop is a first-order tracker (bandwidth `tracking_gain`) whose
/// commanded speed is capped by the command's speed limits. Targets are
/// projected into the workspace and rotation ranges first, so the effector
/// never leaves them and its error to a static target never grows.
pub fn arm_step(
    spec: &ArmSpec,
    state: &ArmState,
    cmd: &ArmCommand,
    dt: f64,
) -> Result<ArmStep, DeviceError> {
    if !(dt > 0.0) {
        return Err(DeviceError::NonPositiveDt(dt));
    }
    if !cmd.target.is_finite() || !cmd.linear_speed.is_finite() || !cmd.angular_speed.is_finite() {
        return Err(DeviceError::NonFiniteCommand);
    }
    let raw = cmd.target.translation();
    let target_pos = spec.workspace.clamp(raw);
    let target_clamped = target_pos != raw;
    let (target_rot, rotation_clamped) = spec.clamp_rotation(cmd.target.rotation());

    let alpha = (spec.tracking_gain * dt).min(1.0);

    let pos = state.pose.translation();
    let err = target_pos - pos;
    let dist = err.norm();
    let step = (dist * alpha).min(cmd.linear_speed.max(0.0) * dt).min(dist);
    let new_pos = if dist > 0.0 && step > 0.0 {
        if step >= dist {
            target_pos
        } else {
            spec.workspace.clamp(pos + err * (step / dist))
        }
    } else {
        pos
    };

    let rot = state.pose.rotation();
    let ang = rot.angle_to(target_rot);
    let ang_speed = cmd.angular_speed.max(0.0).min(spec.max_angular_speed);
    let ang_step = (ang * alpha).min(ang_speed * dt);
    let new_rot = if ang > 0.0 && ang_step > 0.0 {
        rot.rotate_towards(target_rot, ang_step)
    } else {
        rot
    };

    Ok(ArmStep {
        state: ArmState { pose: RigidTransform::new(new_rot, new_pos) },
        target_clamped,
        rotation_clamped,
    })
}

/// Hooke's-law offset that makes the arm's position loop render `force`.
pub fn impedance_displacement(force: Vec3, stiffness: f64) -> Result<Vec3, DeviceError> {
    if !(stiffness > 0.0) {
        return Err(DeviceError::NonPositiveStiffness(stiffness));
    }
    Ok(force / stiffness)
}

/// Force produced by a target offset, clamped per axis to the arm's limits.
pub fn rendered_force(displacement: Vec3, stiffness: f64, max_force: Vec3) -> (Vec3, bool) {
    let f = displacement * stiffness;
    let c = Vec3::new(
        f.x.clamp(-max_force.x, max_force.x),
        f.y.clamp(-max_force.y, max_force.y),
        f.z.clamp(-max_force.z, max_force.z),
    );
    (c, c != f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GloveSpec {
    pub actuated_dofs: usize,
    pub joint_range_deg: f64,
    /// Nm per actuated DOF.
    pub max_joint_torque: f64,
    pub sensed_dofs: usize,
}

impl GloveSpec {
    /// Dexmo: five force-feedback DOFs of 165 deg and 0.5 Nm each, 11 sensed DOFs.
    pub fn dexmo() -> Self {
        GloveSpec {
            actuated_dofs: 5,
            joint_range_deg: 165.0,
            max_joint_torque: 0.5,
            sensed_dofs: 11,
        }
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        if self.actuated_dofs == 0 || self.actuated_dofs > FINGERS {
            return Err(DeviceError::InvalidSpec("actuated DOFs must be between 1 and 5"));
        }
        if self.actuated_dofs > self.sensed_dofs {
            return Err(DeviceError::InvalidSpec("actuated DOFs exceed sensed DOFs"));
        }
        if !(self.joint_range_deg > 0.0 && self.max_joint_torque > 0.0) {
            return Err(DeviceError::InvalidSpec("joint range and torque must be positive"));
        }
        Ok(())
    }
}

/// Power-grasp coupling: PIP and DIP are fixed multiples of the MCP angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FingerCoupling {
    pub mcp_extended: f64,
    pub mcp_flexed: f64,
    pub pip_ratio: f64,
    pub dip_ratio: f64,
    /// Spread angle between abduction 0 and 1, rad.
    pub abduction_range: f64,
}

impl Default for FingerCoupling {
    fn default() -> Self {
        FingerCoupling {
            mcp_extended: 0.0,
            mcp_flexed: deg_to_rad(80.0),
            pip_ratio: 1.0,
            dip_ratio: 2.0 / 3.0,
            abduction_range: deg_to_rad(20.0),
        }
    }
}

impl FingerCoupling {
    pub fn joints(&self, flex: f64) -> FingerJoints {
        let mcp = self.mcp_extended + flex * (self.mcp_flexed - self.mcp_extended);
        FingerJoints { mcp, pip: self.pip_ratio * mcp, dip: self.dip_ratio * mcp }
    }

    /// Signed spread angle; 0.5 is the neutral pose.
    pub fn spread(&self, abduction: f64) -> f64 {
        (abduction - 0.5) * self.abduction_range
    }
}

/// Relative joint angles of one finger, rad.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FingerJoints {
    pub mcp: f64,
    pub pip: f64,
    pub dip: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandState {
    pub wrist_pose: RigidTransform,
    pub flex: [f64; FINGERS],
    pub abduction: [f64; FINGERS],
    pub thumb_rotation: f64,
    pub joints: [FingerJoints; FINGERS],
}

impl HandState {
    /// Builds a hand from normalized parameters, clamping them into `[0, 1]`.
    pub fn from_normalized(
        wrist_pose: RigidTransform,
        flex: [f64; FINGERS],
        abduction: [f64; FINGERS],
        thumb_rotation: f64,
        coupling: &FingerCoupling,
    ) -> Self {
        let flex = flex.map(|f| f.clamp(0.0, 1.0));
        let abduction = abduction.map(|a| a.clamp(0.0, 1.0));
        HandState {
            wrist_pose,
            flex,
            abduction,
            thumb_rotation: thumb_rotation.clamp(0.0, 1.0),
            joints: flex.map(|f| coupling.joints(f)),
        }
    }

    pub fn with_flex(&self, flex: [f64; FINGERS], coupling: &FingerCoupling) -> Self {
        HandState::from_normalized(self.wrist_pose, flex, self.abduction, self.thumb_rotation, coupling)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawSensors(pub [f64; SENSED_DOFS]);

/// Per-user raw sensor extremes recorded during calibration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    pub min: [f64; SENSED_DOFS],
    pub max: [f64; SENSED_DOFS],
}

impl Calibration {
    pub fn validate(&self) -> Result<(), DeviceError> {
        for dof in 0..SENSED_DOFS {
            if !(self.min[dof] < self.max[dof]) {
                return Err(DeviceError::InvalidCalibration { dof });
            }
        }
        Ok(())
    }

    pub fn normalize(&self, dof: usize, raw: f64) -> (f64, bool) {
        let t = (raw - self.min[dof]) / (self.max[dof] - self.min[dof]);
        let c = t.clamp(0.0, 1.0);
        (c, c != t || !t.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForwardModelOutput {
    pub hand: HandState,
    /// Sensors that read outside their calibrated range and were clamped.
    pub clamped: [bool; SENSED_DOFS],
}

impl ForwardModelOutput {
    pub fn any_clamped(&self) -> bool {
        self.clamped.iter().any(|c| *c)
    }
}

/// Virtual-hand forward model for an under-instrumented glove.
///
/// Flex sensors interpolate the MCP angle between the calibrated extremes and
/// the other finger joints follow it by fixed ratios. Abduction is passed through.
pub fn hand_forward_model(
    sensed: &RawSensors,
    calibration: &Calibration,
    coupling: &FingerCoupling,
    wrist_pose: RigidTransform,
) -> Result<ForwardModelOutput, DeviceError> {
    calibration.validate()?;
    let mut clamped = [false; SENSED_DOFS];
    let mut norm = [0.0; SENSED_DOFS];
    for dof in 0..SENSED_DOFS {
        let (v, c) = calibration.normalize(dof, sensed.0[dof]);
        norm[dof] = if v.is_finite() { v } else { 0.0 };
        clamped[dof] = c;
    }
    let mut flex = [0.0; FINGERS];
    let mut abduction = [0.0; FINGERS];
    flex.copy_from_slice(&norm[FLEX_OFFSET..FLEX_OFFSET + FINGERS]);
    abduction.copy_from_slice(&norm[ABDUCTION_OFFSET..ABDUCTION_OFFSET + FINGERS]);
    let hand = HandState::from_normalized(
        wrist_pose,
        flex,
        abduction,
        norm[THUMB_ROTATION_INDEX],
        coupling,
    );
    Ok(ForwardModelOutput { hand, clamped })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GloveCommand {
    pub stop: [f64; FINGERS],
    pub spring: [f64; FINGERS],
}

impl GloveCommand {
    pub fn unrestricted(spring: f64) -> Self {
        GloveCommand { stop: [1.0; FINGERS], spring: [spring; FINGERS] }
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        for finger in 0..FINGERS {
            let s = self.stop[finger];
            if !(0.0..=1.0).contains(&s) {
                return Err(DeviceError::InvalidGloveCommand { finger, reason: "stop outside [0, 1]" });
            }
            let k = self.spring[finger];
            if !(k >= 0.0) || !k.is_finite() {
                return Err(DeviceError::InvalidGloveCommand { finger, reason: "negative spring constant" });
            }
        }
        Ok(())
    }

    pub fn engaged(&self) -> bool {
        self.stop.iter().any(|s| *s < 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GloveOutput {
    /// Hand after the stops: flex is the smaller of intended flex and stop.
    pub hand: HandState,
    /// Resisting torque at each actuator, Nm.
    pub resistance: [f64; FINGERS],
}

/// Applies contact-drum stops to the user's intended hand pose.
pub fn glove_apply(
    cmd: &GloveCommand,
    intended: &HandState,
    spec: &GloveSpec,
    coupling: &FingerCoupling,
) -> Result<GloveOutput, DeviceError> {
    cmd.validate()?;
    let mut flex = intended.flex;
    let mut resistance = [0.0; FINGERS];
    for i in 0..spec.actuated_dofs.min(FINGERS) {
        let stop = cmd.stop[i];
        if intended.flex[i] > stop {
            flex[i] = stop;
            resistance[i] = (cmd.spring[i] * (intended.flex[i] - stop)).min(spec.max_joint_torque);
        }
    }
    Ok(GloveOutput { hand: intended.with_flex(flex, coupling), resistance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arm() -> ArmSpec {
        ArmSpec::virtuose_6d(RigidTransform::IDENTITY)
    }

    fn calibration() -> Calibration {
        Calibration { min: [100.0; SENSED_DOFS], max: [3900.0; SENSED_DOFS] }
    }

    #[test]
    fn arm_holds_at_fixed_point() {
        let s = ArmState { pose: RigidTransform::from_translation(Vec3::new(0.1, 0.0, 0.2)) };
        let cmd = ArmCommand { target: s.pose, linear_speed: 1.0, angular_speed: 1.0 };
        let out = arm_step(&arm(), &s, &cmd, 0.001).unwrap();
        assert_eq!(out.state, s);
        assert!(!out.target_clamped);
    }

    #[test]
    fn arm_reaches_static_target_in_distance_over_speed() {
        let spec = arm();
        let mut s = ArmState { pose: RigidTransform::IDENTITY };
        let target = RigidTransform::from_translation(Vec3::new(0.1, 0.0, 0.0));
        let cmd = ArmCommand { target, linear_speed: 1.0, angular_speed: 1.0 };
        let mut prev = 0.1;
        for _ in 0..100 {
            s = arm_step(&spec, &s, &cmd, 0.001).unwrap().state;
            let e = s.pose.translation().distance(target.translation());
            assert!(e <= prev);
            prev = e;
        }
        assert!(prev < 1e-9, "residual {prev}");
    }

    #[test]
    fn arm_target_outside_box_rests_on_nearest_face() {
        let spec = arm();
        let mut s = ArmState { pose: RigidTransform::IDENTITY };
        let cmd = ArmCommand {
            target: RigidTransform::from_translation(Vec3::new(0.0, 2.0, 0.1)),
            linear_speed: 1.0,
            angular_speed: 1.0,
        };
        let mut clamped = false;
        for _ in 0..1000 {
            let out = arm_step(&spec, &s, &cmd, 0.001).unwrap();
            clamped |= out.target_clamped;
            s = out.state;
        }
        assert!(clamped);
        let p = s.pose.translation();
        assert!((p - Vec3::new(0.0, 0.2875, 0.1)).norm() < 1e-9);
    }

    #[test]
    fn arm_rejects_non_positive_dt() {
        let s = ArmState { pose: RigidTransform::IDENTITY };
        assert!(arm_step(&arm(), &s, &ArmCommand::hold(s.pose), 0.0).is_err());
    }

    #[test]
    fn arm_rotation_is_range_limited() {
        let spec = arm();
        let (q, clamped) = spec.clamp_rotation(Quat::from_euler_zyx(0.0, deg_to_rad(80.0), 0.0));
        assert!(clamped);
        let (_, ry, _) = q.to_euler_zyx();
        assert!((ry - deg_to_rad(65.0)).abs() < 1e-9);
    }

    #[test]
    fn impedance_division() {
        assert_eq!(impedance_displacement(Vec3::ZERO, 1000.0).unwrap(), Vec3::ZERO);
        let d = impedance_displacement(Vec3::new(0.0, -2.943, 0.0), 1000.0).unwrap();
        assert!((d - Vec3::new(0.0, -0.002943, 0.0)).norm() < 1e-15);
        let (f, clamped) = rendered_force(d, 1000.0, Vec3::splat(9.5));
        assert!(!clamped);
        assert!((f.y + 2.943).abs() < 1e-12);
        assert!(impedance_displacement(Vec3::X, 0.0).is_err());
        assert!(impedance_displacement(Vec3::X, -5.0).is_err());
    }

    #[test]
    fn rendered_force_clamps_per_axis() {
        let (f, clamped) = rendered_force(Vec3::new(0.02, -0.001, 0.0), 1000.0, Vec3::splat(9.5));
        assert!(clamped);
        assert_eq!(f, Vec3::new(9.5, -1.0, 0.0));
    }

    #[test]
    fn forward_model_endpoints() {
        let c = FingerCoupling::default();
        let cal = calibration();
        let lo = hand_forward_model(&RawSensors(cal.min), &cal, &c, RigidTransform::IDENTITY).unwrap();
        let hi = hand_forward_model(&RawSensors(cal.max), &cal, &c, RigidTransform::IDENTITY).unwrap();
        for f in 0..FINGERS {
            assert_eq!(lo.hand.joints[f], FingerJoints { mcp: 0.0, pip: 0.0, dip: 0.0 });
            assert!((hi.hand.joints[f].mcp - c.mcp_flexed).abs() < 1e-15);
            assert!((hi.hand.joints[f].dip - c.dip_ratio * c.mcp_flexed).abs() < 1e-15);
        }
        assert!(!lo.any_clamped() && !hi.any_clamped());
    }

    #[test]
    fn forward_model_midpoint_follows_ratios() {
        let c = FingerCoupling::default();
        let cal = calibration();
        let mid = RawSensors([2000.0; SENSED_DOFS]);
        let out = hand_forward_model(&mid, &cal, &c, RigidTransform::IDENTITY).unwrap();
        let j = out.hand.joints[2];
        // Direct interpolation: raw 2000 lies exactly halfway between 100 and 3900.
        let mcp = 0.5 * deg_to_rad(80.0);
        assert!((j.mcp - mcp).abs() < 1e-12);
        assert!((j.pip - mcp).abs() < 1e-12);
        assert!((j.dip - mcp * 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(out.hand.abduction[0], 0.5);
    }

    #[test]
    fn forward_model_flags_out_of_range() {
        let c = FingerCoupling::default();
        let cal = calibration();
        let mut raw = [2000.0; SENSED_DOFS];
        raw[3] = 5000.0;
        let out = hand_forward_model(&RawSensors(raw), &cal, &c, RigidTransform::IDENTITY).unwrap();
        assert!(out.clamped[3]);
        assert_eq!(out.hand.flex[3], 1.0);
        let mut bad = cal;
        bad.min[4] = bad.max[4];
        assert_eq!(
            hand_forward_model(&RawSensors(raw), &bad, &c, RigidTransform::IDENTITY),
            Err(DeviceError::InvalidCalibration { dof: 4 })
        );
    }

    fn hand(flex: f64) -> HandState {
        HandState::from_normalized(RigidTransform::IDENTITY, [flex; FINGERS], [0.5; FINGERS], 0.0, &FingerCoupling::default())
    }

    #[test]
    fn glove_unrestricted_stop_is_noop() {
        let h = hand(0.8);
        let out = glove_apply(&GloveCommand::unrestricted(1.0), &h, &GloveSpec::dexmo(), &FingerCoupling::default()).unwrap();
        assert_eq!(out.hand, h);
        assert_eq!(out.resistance, [0.0; FINGERS]);
    }

    #[test]
    fn glove_stop_clamps_flex_and_spring_sets_torque() {
        let h = hand(0.8);
        let spec = GloveSpec::dexmo();
        let c = FingerCoupling::default();
        let soft = GloveCommand { stop: [0.5; FINGERS], spring: [0.0; FINGERS] };
        let firm = GloveCommand { stop: [0.5; FINGERS], spring: [1.2; FINGERS] };
        let a = glove_apply(&soft, &h, &spec, &c).unwrap();
        let b = glove_apply(&firm, &h, &spec, &c).unwrap();
        assert_eq!(a.hand.flex, [0.5; FINGERS]);
        assert_eq!(a.hand, b.hand);
        assert_eq!(a.resistance, [0.0; FINGERS]);
        for t in b.resistance {
            assert!((t - 1.2 * (0.8 - 0.5)).abs() < 1e-12);
        }
        let stiff = GloveCommand { stop: [0.5; FINGERS], spring: [100.0; FINGERS] };
        let s = glove_apply(&stiff, &h, &spec, &c).unwrap();
        assert_eq!(s.resistance, [0.5; FINGERS]);
    }

    #[test]
    fn glove_rejects_bad_commands() {
        let h = hand(0.2);
        let mut cmd = GloveCommand::unrestricted(1.0);
        cmd.stop[1] = 1.5;
        assert!(glove_apply(&cmd, &h, &GloveSpec::dexmo(), &FingerCoupling::default()).is_err());
        let mut cmd = GloveCommand::unrestricted(1.0);
        cmd.spring[0] = -1.0;
        assert!(cmd.validate().is_err());
    }

    #[test]
    fn specs_validate() {
        assert!(arm().validate().is_ok());
        assert!(GloveSpec::dexmo().validate().is_ok());
        let mut a = arm();
        a.stiffness = 0.0;
        assert!(a.validate().is_err());
        let mut g = GloveSpec::dexmo();
        g.sensed_dofs = 4;
        assert!(g.validate().is_err());
    }
}
