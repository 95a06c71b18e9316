//! TOML scenario files.
//!
//! Every section except `name`, `condition`, `arms` and `trajectory` has
//! defaults. Angles are in degrees, lengths in metres, masses in kilograms.

use std::fs;
use std::path::Path;

use dockhap_core::capability::TopologyMode;
use dockhap_core::devices::{ArmSpec, FingerCoupling, GloveSpec, FINGERS};
use dockhap_core::docking::{Dof, DofMask, DockJointKind, JointParams, ToolMount};
use dockhap_core::frames::RigidTransform;
use dockhap_core::math::{deg_to_rad, Aabb, Quat, Vec3};
use dockhap_core::scenario::{
    ArmSetup, CanSpec, Condition, ConfigError, DockingConfig, ForceConfig, Interpolation, Keyframe, LoadRamp,
    SceneConfig, ScenarioConfig, StaticBox, TimingConfig, Trajectory,
};
use dockhap_core::sim::{HandGeometry, SolverParams};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(#[from] ConfigError),
}

impl LoadError {
    fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        LoadError::Invalid(ConfigError::new(path, message))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: u32,
    pub name: String,
    pub condition: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tracking_noise: f64,
    pub arms: Vec<ArmDto>,
    #[serde(default)]
    pub glove: GloveDto,
    #[serde(default)]
    pub hand: Option<HandDto>,
    #[serde(default)]
    pub scene: SceneDto,
    pub trajectory: TrajectoryDto,
    #[serde(default)]
    pub docking: DockingDto,
    #[serde(default)]
    pub timing: TimingDto,
    #[serde(default)]
    pub force: ForceDto,
    #[serde(default)]
    pub solver: SolverDto,
    pub load_ramp: Option<LoadRampDto>,
    /// Acceptance bounds checked against the run; ignored by the simulator.
    #[serde(default)]
    pub expect: Expectations,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDto {
    #[serde(default)]
    pub position: [f64; 3],
    /// Intrinsic Z-Y-X Euler angles given as `[rx, ry, rz]`.
    #[serde(default)]
    pub rotation_deg: [f64; 3],
}

impl PoseDto {
    fn to_transform(self) -> RigidTransform {
        let [rx, ry, rz] = self.rotation_deg.map(deg_to_rad);
        RigidTransform::new(Quat::from_euler_zyx(rx, ry, rz), Vec3::from_array(self.position))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmDto {
    #[serde(default = "default_arm_model")]
    pub model: String,
    #[serde(default)]
    pub base: PoseDto,
    pub fk_error: Option<PoseDto>,
    pub home_tool_position: Option<[f64; 3]>,
    #[serde(default)]
    pub plate_offset: [f64; 3],
    pub workspace_size: Option<[f64; 3]>,
    pub rot_range_deg: Option<[f64; 3]>,
    pub max_force: Option<[f64; 3]>,
    pub max_torque: Option<[f64; 3]>,
    pub stiffness: Option<f64>,
    pub tracking_gain: Option<f64>,
    pub max_angular_speed: Option<f64>,
}

fn default_arm_model() -> String {
    "virtuose_6d".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GloveDto {
    #[serde(default = "default_glove_model")]
    pub model: String,
    #[serde(default = "default_spring")]
    pub spring: f64,
    pub actuated_dofs: Option<usize>,
    pub joint_range_deg: Option<f64>,
    pub max_joint_torque: Option<f64>,
    #[serde(default)]
    pub coupling: CouplingDto,
}

impl Default for GloveDto {
    fn default() -> Self {
        GloveDto {
            model: default_glove_model(),
            spring: default_spring(),
            actuated_dofs: None,
            joint_range_deg: None,
            max_joint_torque: None,
            coupling: CouplingDto::default(),
        }
    }
}

fn default_glove_model() -> String {
    "dexmo".into()
}

fn default_spring() -> f64 {
    2.0
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingDto {
    pub mcp_extended_deg: Option<f64>,
    pub mcp_flexed_deg: Option<f64>,
    pub pip_ratio: Option<f64>,
    pub dip_ratio: Option<f64>,
    pub abduction_range_deg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandDto {
    pub palm_radius: Option<f64>,
    pub phalange_radius: Option<f64>,
    pub phalanges: Option<[f64; 3]>,
    pub plate: Option<PoseDto>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDto {
    #[serde(default)]
    pub statics: Vec<StaticDto>,
    #[serde(default)]
    pub cans: Vec<CanDto>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticDto {
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    #[serde(default)]
    pub collides_with_hand: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanDto {
    pub mass: f64,
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryDto {
    #[serde(default = "default_interpolation")]
    pub interpolation: String,
    pub keyframes: Vec<KeyframeDto>,
}

fn default_interpolation() -> String {
    "smoothstep".into()
}

/// Either one value for every finger or one per finger.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum PerFinger {
    All(f64),
    Each([f64; FINGERS]),
}

impl PerFinger {
    fn expand(self) -> [f64; FINGERS] {
        match self {
            PerFinger::All(v) => [v; FINGERS],
            PerFinger::Each(a) => a,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeDto {
    pub t: f64,
    pub position: [f64; 3],
    #[serde(default)]
    pub rotation_deg: [f64; 3],
    pub flex: Option<PerFinger>,
    pub abduction: Option<PerFinger>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DockingDto {
    #[serde(default = "default_joint")]
    pub joint: String,
    /// Constrained DOFs when `joint = "free_axes"`, e.g. `["tx", "ty", "tz"]`.
    pub constrained: Option<Vec<String>>,
    #[serde(default = "default_mode")]
    pub mode: String,
    pub magnet_latency_ticks: Option<u64>,
    pub approach_radius: Option<f64>,
    pub max_speed: Option<f64>,
    pub prediction_horizon: Option<f64>,
    pub region_margin: Option<f64>,
    pub initial_dock: Option<usize>,
    pub breaking_force: Option<f64>,
    pub friction_mu: Option<f64>,
    pub contact_radius: Option<f64>,
    pub plate_radius: Option<f64>,
    pub pos_tol: Option<f64>,
    pub ang_tol_deg: Option<f64>,
    pub tool_offset: Option<[f64; 3]>,
    pub tool_rotation_deg: Option<[f64; 3]>,
}

impl Default for DockingDto {
    fn default() -> Self {
        DockingDto {
            joint: default_joint(),
            constrained: None,
            mode: default_mode(),
            magnet_latency_ticks: None,
            approach_radius: None,
            max_speed: None,
            prediction_horizon: None,
            region_margin: None,
            initial_dock: None,
            breaking_force: None,
            friction_mu: None,
            contact_radius: None,
            plate_radius: None,
            pos_tol: None,
            ang_tol_deg: None,
            tool_offset: None,
            tool_rotation_deg: None,
        }
    }
}

fn default_joint() -> String {
    "plate_slip".into()
}

fn default_mode() -> String {
    "single".into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingDto {
    pub tick_us: Option<u64>,
    pub frame_ticks: Option<u64>,
    pub glove_ticks: Option<u64>,
    pub duration: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceDto {
    pub filter: Option<bool>,
    pub cutoff_hz: Option<f64>,
    pub render_torque: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverDto {
    pub velocity_iterations: Option<u32>,
    pub position_iterations: Option<u32>,
    pub speculative_margin: Option<f64>,
    pub slop: Option<f64>,
    pub position_correction: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadRampDto {
    pub start: f64,
    pub duration: f64,
    pub from: f64,
    pub to: f64,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    /// Longest tolerated gap in rendered support during a handover, s.
    pub max_dropout: Option<f64>,
    /// Latest acceptable attach time, s.
    pub dock_within: Option<f64>,
    /// Lift windows file, relative to the scenario file.
    pub windows: Option<String>,
}

/// A parsed scenario ready to run.
#[derive(Clone, Debug)]
pub struct LoadedScenario {
    pub config: ScenarioConfig,
    pub expect: Expectations,
}

pub fn parse_condition(s: &str) -> Option<Condition> {
    match s {
        "free" => Some(Condition::Free),
        "docked" => Some(Condition::Docked),
        "force_feedback" => Some(Condition::ForceFeedback),
        _ => None,
    }
}

pub fn parse_mode(s: &str) -> Option<TopologyMode> {
    match s {
        "single" => Some(TopologyMode::Single),
        "simultaneous" => Some(TopologyMode::Simultaneous),
        "handover" => Some(TopologyMode::Handover),
        _ => None,
    }
}

fn parse_dof(s: &str) -> Option<Dof> {
    Dof::ALL.into_iter().find(|d| d.name().eq_ignore_ascii_case(s))
}

fn parse_joint(d: &DockingDto) -> Result<DockJointKind, LoadError> {
    let kind = match d.joint.as_str() {
        "plate_slip" => DockJointKind::PlateSlip,
        "plate_friction" => DockJointKind::PlateFriction,
        "pinned_rotary" => DockJointKind::PinnedRotary,
        "toothed" => DockJointKind::Toothed,
        "prismatic" => DockJointKind::Prismatic,
        "free_axes" => {
            let Some(names) = &d.constrained else {
                return Err(LoadError::field("docking.constrained", "required when joint is free_axes"));
            };
            let mut dofs = Vec::new();
            for (i, n) in names.iter().enumerate() {
                dofs.push(
                    parse_dof(n)
                        .ok_or_else(|| LoadError::field(format!("docking.constrained[{i}]"), format!("unknown DOF {n:?}")))?,
                );
            }
            DockJointKind::FreeAxes(DofMask::of(&dofs))
        }
        other => return Err(LoadError::field("docking.joint", format!("unknown joint {other:?}"))),
    };
    if d.constrained.is_some() && !matches!(kind, DockJointKind::FreeAxes(_)) {
        return Err(LoadError::field("docking.constrained", "only valid with joint = \"free_axes\""));
    }
    Ok(kind)
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::from_array(a)
}

fn arm_spec(i: usize, a: &ArmDto) -> Result<ArmSetup, LoadError> {
    let base = a.base.to_transform();
    let mut spec = match a.model.as_str() {
        "virtuose_6d" => ArmSpec::virtuose_6d(base),
        other => return Err(LoadError::field(format!("arms[{i}].model"), format!("unknown arm model {other:?}"))),
    };
    if let Some(s) = a.workspace_size {
        spec.workspace = Aabb::from_size(Vec3::ZERO, v3(s));
    }
    if let Some(r) = a.rot_range_deg {
        spec.rot_range_deg = r;
    }
    if let Some(f) = a.max_force {
        spec.max_force = v3(f);
    }
    if let Some(t) = a.max_torque {
        spec.max_torque = v3(t);
    }
    if let Some(k) = a.stiffness {
        spec.stiffness = k;
    }
    if let Some(g) = a.tracking_gain {
        spec.tracking_gain = g;
    }
    if let Some(w) = a.max_angular_speed {
        spec.max_angular_speed = w;
    }
    Ok(ArmSetup {
        spec,
        fk_error: a.fk_error.map_or(RigidTransform::IDENTITY, PoseDto::to_transform),
        home_tool_position: a.home_tool_position.map(v3),
        plate_offset: v3(a.plate_offset),
    })
}

impl ScenarioFile {
    pub fn into_config(self) -> Result<LoadedScenario, LoadError> {
        if self.schema != SCHEMA_VERSION {
            return Err(LoadError::field("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        let condition = parse_condition(&self.condition)
            .ok_or_else(|| LoadError::field("condition", format!("unknown condition {:?}", self.condition)))?;
        let arms = self.arms.iter().enumerate().map(|(i, a)| arm_spec(i, a)).collect::<Result<Vec<_>, _>>()?;

        let g = &self.glove;
        let mut glove = match g.model.as_str() {
            "dexmo" => GloveSpec::dexmo(),
            other => return Err(LoadError::field("glove.model", format!("unknown glove model {other:?}"))),
        };
        if let Some(n) = g.actuated_dofs {
            glove.actuated_dofs = n;
        }
        if let Some(r) = g.joint_range_deg {
            glove.joint_range_deg = r;
        }
        if let Some(t) = g.max_joint_torque {
            glove.max_joint_torque = t;
        }
        let mut coupling = FingerCoupling::default();
        let c = &g.coupling;
        if let Some(v) = c.mcp_extended_deg {
            coupling.mcp_extended = deg_to_rad(v);
        }
        if let Some(v) = c.mcp_flexed_deg {
            coupling.mcp_flexed = deg_to_rad(v);
        }
        if let Some(v) = c.pip_ratio {
            coupling.pip_ratio = v;
        }
        if let Some(v) = c.dip_ratio {
            coupling.dip_ratio = v;
        }
        if let Some(v) = c.abduction_range_deg {
            coupling.abduction_range = deg_to_rad(v);
        }

        let mut hand = HandGeometry::default();
        if let Some(h) = &self.hand {
            if let Some(r) = h.palm_radius {
                hand.palm_radius = r;
            }
            if let Some(r) = h.phalange_radius {
                hand.phalange_radius = r;
            }
            if let Some(p) = h.phalanges {
                hand.phalanges = p;
            }
            if let Some(p) = h.plate {
                hand.plate = p.to_transform();
            }
            if !(hand.palm_radius > 0.0 && hand.phalange_radius > 0.0 && hand.phalanges.iter().all(|l| *l > 0.0)) {
                return Err(LoadError::field("hand", "radii and phalange lengths must be positive"));
            }
        }

        let scene = SceneConfig {
            statics: self
                .scene
                .statics
                .iter()
                .map(|s| StaticBox { center: v3(s.center), half_extents: v3(s.half_extents), collides_with_hand: s.collides_with_hand })
                .collect(),
            cans: self
                .scene
                .cans
                .iter()
                .map(|c| CanSpec { mass: c.mass, center: v3(c.center), half_extents: v3(c.half_extents) })
                .collect(),
        };

        let interpolation = match self.trajectory.interpolation.as_str() {
            "linear" => Interpolation::Linear,
            "smoothstep" => Interpolation::Smoothstep,
            other => return Err(LoadError::field("trajectory.interpolation", format!("unknown interpolation {other:?}"))),
        };
        let keyframes = self
            .trajectory
            .keyframes
            .iter()
            .map(|k| {
                let [rx, ry, rz] = k.rotation_deg.map(deg_to_rad);
                Keyframe {
                    t: k.t,
                    position: v3(k.position),
                    rotation: Quat::from_euler_zyx(rx, ry, rz),
                    flex: k.flex.map_or([0.0; FINGERS], PerFinger::expand),
                    abduction: k.abduction.map_or([0.5; FINGERS], PerFinger::expand),
                }
            })
            .collect();

        let d = &self.docking;
        let mut docking = DockingConfig { joint: parse_joint(d)?, ..Default::default() };
        docking.mode =
            parse_mode(&d.mode).ok_or_else(|| LoadError::field("docking.mode", format!("unknown mode {:?}", d.mode)))?;
        let mut params = JointParams::default();
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(docking.magnet_latency_ticks, d.magnet_latency_ticks);
        set!(docking.approach_radius, d.approach_radius);
        set!(docking.max_speed, d.max_speed);
        set!(docking.prediction_horizon, d.prediction_horizon);
        set!(docking.region_margin, d.region_margin);
        docking.initial_dock = d.initial_dock;
        set!(params.breaking_force, d.breaking_force);
        set!(params.friction_mu, d.friction_mu);
        set!(params.contact_radius, d.contact_radius);
        set!(params.plate_radius, d.plate_radius);
        set!(params.pos_tol, d.pos_tol);
        set!(params.ang_tol, d.ang_tol_deg.map(deg_to_rad));
        docking.params = params;
        if let Some(o) = d.tool_offset {
            docking.tool.effector_to_tool = RigidTransform::from_translation(v3(o));
        }
        if let Some(r) = d.tool_rotation_deg {
            let [rx, ry, rz] = r.map(deg_to_rad);
            docking.tool = ToolMount { orientation: Quat::from_euler_zyx(rx, ry, rz), ..docking.tool };
        }

        let mut timing = TimingConfig::default();
        set!(timing.tick_us, self.timing.tick_us);
        set!(timing.frame_ticks, self.timing.frame_ticks);
        set!(timing.glove_ticks, self.timing.glove_ticks);
        set!(timing.duration, self.timing.duration);

        let mut force = ForceConfig::default();
        set!(force.filter_enabled, self.force.filter);
        set!(force.cutoff_hz, self.force.cutoff_hz);
        set!(force.render_torque, self.force.render_torque);

        let mut solver = SolverParams::default();
        set!(solver.velocity_iterations, self.solver.velocity_iterations);
        set!(solver.position_iterations, self.solver.position_iterations);
        set!(solver.speculative_margin, self.solver.speculative_margin);
        set!(solver.slop, self.solver.slop);
        set!(solver.position_correction, self.solver.position_correction);

        let config = ScenarioConfig {
            name: self.name,
            condition,
            arms,
            glove,
            coupling,
            glove_spring: g.spring,
            hand,
            scene,
            trajectory: Trajectory { keyframes, interpolation },
            docking,
            timing,
            force,
            solver,
            seed: self.seed,
            tracking_noise: self.tracking_noise,
            load_ramp: self.load_ramp.map(|r| LoadRamp { start: r.start, duration: r.duration, from: r.from, to: r.to }),
        };
        config.validate()?;
        if let Some(b) = self.expect.max_dropout {
            if !(b >= 0.0) {
                return Err(LoadError::field("expect.max_dropout", "must be non-negative"));
            }
        }
        Ok(LoadedScenario { config, expect: self.expect })
    }
}

/// Parses scenario TOML; `origin` names the source in error messages.
pub fn parse_scenario(text: &str, origin: &str) -> Result<LoadedScenario, LoadError> {
    let de = toml::Deserializer::parse(text).map_err(|e| LoadError::Parse { path: origin.into(), message: e.to_string() })?;
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        LoadError::Parse { path: format!("{origin}: {path}"), message: e.into_inner().message().to_string() }
    })?;
    file.into_config()
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&text, &path.display().to_string())
}
