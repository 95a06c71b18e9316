use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::capability::TopologyMode;
use crate::devices::{ArmSpec, FingerCoupling, GloveSpec, CONTROL_TICK_US};
use crate::docking::{DockJointKind, JointParams, ToolMount};
use crate::frames::RigidTransform;
use crate::math::{deg_to_rad, Quat, Vec3};
use crate::sim::{HandGeometry, SolverParams};

use super::trajectory::{Trajectory, TrajectoryError};

pub const GRAVITY: Vec3 = Vec3::new(0.0, -9.81, 0.0);

/// Experimental conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Glove only; the arms never intercept.
    Free,
    /// Joint attached but the arm renders no force.
    Docked,
    ForceFeedback,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Free => "free",
            Condition::Docked => "docked",
            Condition::ForceFeedback => "force_feedback",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmSetup {
    pub spec: ArmSpec,
    /// Miscalibration of the arm's forward kinematics: true pose = error * reported pose.
    pub fk_error: RigidTransform,
    /// Initial magnet position in the world; defaults to the workspace center.
    pub home_tool_position: Option<Vec3>,
    /// Where this arm's magnet lands on the plate, in the plate frame.
    pub plate_offset: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanSpec {
    pub mass: f64,
    pub center: Vec3,
    pub half_extents: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticBox {
    pub center: Vec3,
    pub half_extents: Vec3,
    pub collides_with_hand: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneConfig {
    pub statics: Vec<StaticBox>,
    pub cans: Vec<CanSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DockingConfig {
    pub joint: DockJointKind,
    pub params: JointParams,
    pub mode: TopologyMode,
    pub magnet_latency_ticks: u64,
    /// Magnet is energized once it is this close to its target, m.
    pub approach_radius: f64,
    /// Pursuit speed, m/s.
    pub max_speed: f64,
    /// Constant-velocity look-ahead for interception, s.
    pub prediction_horizon: f64,
    /// Workspace inflation for interception, m.
    pub region_margin: f64,
    /// Arm docked at t = 0.
    pub initial_dock: Option<usize>,
    pub tool: ToolMount,
}

impl Default for DockingConfig {
    fn default() -> Self {
        DockingConfig {
            joint: DockJointKind::PlateSlip,
            params: JointParams::default(),
            mode: TopologyMode::Single,
            magnet_latency_ticks: 10,
            approach_radius: 0.015,
            max_speed: 1.0,
            prediction_horizon: 0.2,
            region_margin: 0.1,
            initial_dock: None,
            tool: ToolMount {
                effector_to_tool: RigidTransform::from_translation(Vec3::new(0.0, 0.0, -0.05)),
                orientation: Quat::from_axis_angle(Vec3::X, deg_to_rad(90.0)),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingConfig {
    pub tick_us: u64,
    /// Control ticks per application frame.
    pub frame_ticks: u64,
    /// Control ticks between glove commands.
    pub glove_ticks: u64,
    /// s
    pub duration: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig { tick_us: CONTROL_TICK_US, frame_ticks: 10, glove_ticks: 34, duration: 1.0 }
    }
}

impl TimingConfig {
    pub fn dt(&self) -> f64 {
        self.tick_us as f64 * 1e-6
    }

    pub fn ticks(&self) -> u64 {
        let n = self.duration / self.dt();
        let r = libm::round(n);
        if (n - r).abs() < 1e-9 {
            r as u64
        } else {
            libm::ceil(n) as u64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceConfig {
    pub filter_enabled: bool,
    pub cutoff_hz: f64,
    pub render_torque: bool,
}

impl Default for ForceConfig {
    fn default() -> Self {
        ForceConfig { filter_enabled: true, cutoff_hz: 20.0, render_torque: false }
    }
}

/// Tensile load ramp added to the joint, along the plate normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadRamp {
    pub start: f64,
    pub duration: f64,
    pub from: f64,
    pub to: f64,
}

impl LoadRamp {
    pub fn at(&self, t: f64) -> f64 {
        if t < self.start {
            0.0
        } else if t >= self.start + self.duration {
            self.to
        } else {
            self.from + (self.to - self.from) * (t - self.start) / self.duration
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub condition: Condition,
    pub arms: Vec<ArmSetup>,
    pub glove: GloveSpec,
    pub coupling: FingerCoupling,
    pub glove_spring: f64,
    pub hand: HandGeometry,
    pub scene: SceneConfig,
    pub trajectory: Trajectory,
    pub docking: DockingConfig,
    pub timing: TimingConfig,
    pub force: ForceConfig,
    pub solver: SolverParams,
    pub seed: u64,
    /// Uniform noise amplitude on tracked plate positions, m.
    pub tracking_noise: f64,
    pub load_ramp: Option<LoadRamp>,
}

/// Validation failure with the offending field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl core::error::Error for ConfigError {}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be positive and finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.arms.is_empty() && self.condition != Condition::Free {
            return Err(ConfigError::new("arms", "docked conditions need at least one arm"));
        }
        for (i, a) in self.arms.iter().enumerate() {
            a.spec.validate().map_err(|e| ConfigError::new(format!("arms[{i}]"), format!("{e}")))?;
            if let Some(p) = a.home_tool_position {
                if !p.is_finite() {
                    return Err(ConfigError::new(format!("arms[{i}].home_tool_position"), "must be finite"));
                }
            }
        }
        self.glove.validate().map_err(|e| ConfigError::new("glove", format!("{e}")))?;
        let c = &self.coupling;
        if !(c.mcp_flexed > c.mcp_extended) || !(c.pip_ratio >= 0.0) || !(c.dip_ratio >= 0.0) {
            return Err(ConfigError::new("glove.coupling", "flexed MCP must exceed extended and ratios be non-negative"));
        }
        if !(self.glove_spring >= 0.0) {
            return Err(ConfigError::new("glove.spring", "must be non-negative"));
        }
        for (i, s) in self.scene.statics.iter().enumerate() {
            positive(&format!("scene.statics[{i}].half_extents.x"), s.half_extents.x)?;
            positive(&format!("scene.statics[{i}].half_extents.y"), s.half_extents.y)?;
            positive(&format!("scene.statics[{i}].half_extents.z"), s.half_extents.z)?;
        }
        for (i, can) in self.scene.cans.iter().enumerate() {
            positive(&format!("scene.cans[{i}].mass"), can.mass)?;
            positive(&format!("scene.cans[{i}].half_extents.x"), can.half_extents.x)?;
            positive(&format!("scene.cans[{i}].half_extents.y"), can.half_extents.y)?;
            positive(&format!("scene.cans[{i}].half_extents.z"), can.half_extents.z)?;
        }
        self.trajectory.validate().map_err(|e| match e {
            TrajectoryError::Empty => ConfigError::new("trajectory.keyframes", "at least one keyframe is required"),
            TrajectoryError::NotIncreasing(i) => {
                ConfigError::new(format!("trajectory.keyframes[{i}].t"), "timestamps must be strictly increasing")
            }
            TrajectoryError::NonFinite(i) => ConfigError::new(format!("trajectory.keyframes[{i}]"), "must be finite"),
            TrajectoryError::OutOfRange(i) => {
                ConfigError::new(format!("trajectory.keyframes[{i}]"), "flex and abduction must lie in [0, 1]")
            }
        })?;
        let d = &self.docking;
        d.params.validate().map_err(|e| ConfigError::new("docking", format!("{e}")))?;
        positive("docking.approach_radius", d.approach_radius)?;
        positive("docking.max_speed", d.max_speed)?;
        if !(d.prediction_horizon >= 0.0) || !(d.region_margin >= 0.0) {
            return Err(ConfigError::new("docking", "prediction horizon and region margin must be non-negative"));
        }
        if let Some(i) = d.initial_dock {
            if i >= self.arms.len() {
                return Err(ConfigError::new("docking.initial_dock", format!("no arm with index {i}")));
            }
        }
        if d.mode == TopologyMode::Single && self.arms.len() > 1 {
            return Err(ConfigError::new("docking.mode", "single mode allows one arm"));
        }
        let t = &self.timing;
        if t.tick_us == 0 {
            return Err(ConfigError::new("timing.tick_us", "must be positive"));
        }
        if t.frame_ticks == 0 || t.glove_ticks == 0 {
            return Err(ConfigError::new("timing", "frame and glove periods must be positive"));
        }
        positive("timing.duration", t.duration)?;
        positive("force.cutoff_hz", self.force.cutoff_hz)?;
        if !(self.tracking_noise >= 0.0) {
            return Err(ConfigError::new("tracking_noise", "must be non-negative"));
        }
        if let Some(r) = &self.load_ramp {
            positive("load_ramp.duration", r.duration)?;
            if !(r.start >= 0.0 && r.from.is_finite() && r.to.is_finite()) {
                return Err(ConfigError::new("load_ramp", "start must be non-negative and loads finite"));
            }
        }
        if self.solver.velocity_iterations == 0 {
            return Err(ConfigError::new("solver.velocity_iterations", "must be positive"));
        }
        Ok(())
    }
}
