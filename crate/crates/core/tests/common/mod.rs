#![allow(dead_code)]

use dockhap_core::capability::TopologyMode;
use dockhap_core::devices::{ArmSpec, FingerCoupling, GloveSpec, FINGERS};
use dockhap_core::frames::RigidTransform;
use dockhap_core::math::{Quat, Vec3};
use dockhap_core::scenario::{
    ArmSetup, CanSpec, Condition, DockingConfig, ForceConfig, Interpolation, Keyframe, SceneConfig, ScenarioConfig,
    StaticBox, TimingConfig, Trajectory,
};
use dockhap_core::sim::{HandGeometry, SolverParams};

pub const DESK_TOP: f64 = 0.7;
pub const CAN_HALF: Vec3 = Vec3::new(0.03, 0.05, 0.03);

pub fn kf(t: f64, p: Vec3) -> Keyframe {
    Keyframe { t, position: p, rotation: Quat::IDENTITY, flex: [0.0; FINGERS], abduction: [0.5; FINGERS] }
}

pub fn arm(base: Vec3) -> ArmSetup {
    ArmSetup {
        spec: ArmSpec::virtuose_6d(RigidTransform::from_translation(base)),
        fk_error: RigidTransform::IDENTITY,
        home_tool_position: None,
        plate_offset: Vec3::ZERO,
    }
}

pub fn base_config(name: &str, condition: Condition, keyframes: Vec<Keyframe>, duration: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        condition,
        arms: vec![arm(Vec3::new(0.0, 0.68, 0.0))],
        glove: GloveSpec::dexmo(),
        coupling: FingerCoupling::default(),
        glove_spring: 2.0,
        hand: HandGeometry::default(),
        scene: SceneConfig {
            statics: vec![StaticBox {
                center: Vec3::new(0.0, DESK_TOP / 2.0, 0.0),
                half_extents: Vec3::new(0.6, DESK_TOP / 2.0, 0.4),
                collides_with_hand: false,
            }],
            cans: Vec::new(),
        },
        trajectory: Trajectory { keyframes, interpolation: Interpolation::Smoothstep },
        docking: DockingConfig::default(),
        timing: TimingConfig { duration, ..Default::default() },
        force: ForceConfig::default(),
        solver: SolverParams::default(),
        seed: 7,
        tracking_noise: 0.0,
        load_ramp: None,
    }
}

/// Lifts each can in turn from underneath with a flat palm and holds it.
pub fn weight_sort(condition: Condition, masses: &[f64]) -> (ScenarioConfig, Vec<(usize, f64, f64)>) {
    let low = 0.62;
    let rest = DESK_TOP + 0.012;
    let high = rest + 0.12;
    let xs: Vec<f64> = (0..masses.len()).map(|i| (i as f64 - (masses.len() as f64 - 1.0) / 2.0) * 0.3).collect();
    let mut keys = vec![kf(0.0, Vec3::new(xs[0], low, 0.0))];
    let mut windows = Vec::new();
    let mut t = 0.1;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            t += 0.4;
            keys.push(kf(t, Vec3::new(*x, low, 0.0)));
        }
        t += 0.4;
        keys.push(kf(t, Vec3::new(*x, high, 0.0)));
        windows.push((i, t + 0.3, t + 0.8));
        t += 0.9;
        keys.push(kf(t, Vec3::new(*x, high, 0.0)));
        t += 0.4;
        keys.push(kf(t, Vec3::new(*x, low, 0.0)));
    }
    let mut cfg = base_config(&format!("weight_sort_{}", condition.name()), condition, keys, t + 0.1);
    cfg.scene.cans = masses
        .iter()
        .zip(&xs)
        .map(|(m, x)| CanSpec { mass: *m, center: Vec3::new(*x, DESK_TOP + CAN_HALF.y, 0.0), half_extents: CAN_HALF })
        .collect();
    cfg.docking.initial_dock = Some(0);
    cfg.docking.mode = TopologyMode::Single;
    (cfg, windows)
}

/// Palm-down hand above a can on the desk; thumb and middle finger close on its sides.
pub fn squeeze() -> ScenarioConfig {
    use dockhap_core::math::deg_to_rad;
    let down = Quat::from_axis_angle(Vec3::X, deg_to_rad(180.0));
    let wrist = Vec3::new(0.0, DESK_TOP + 2.0 * CAN_HALF.y + 0.03, 0.0);
    let mut open = kf(0.0, wrist);
    open.rotation = down;
    let mut start = open;
    start.t = 0.1;
    let mut closed = start;
    closed.t = 0.7;
    closed.flex[0] = 1.0;
    closed.flex[2] = 1.0;
    let mut end = closed;
    end.t = 1.0;
    let mut cfg = base_config("squeeze", Condition::ForceFeedback, vec![open, start, closed, end], 1.0);
    cfg.trajectory.interpolation = Interpolation::Linear;
    cfg.scene.cans = vec![CanSpec { mass: 0.15, center: Vec3::new(0.0, DESK_TOP + CAN_HALF.y, 0.0), half_extents: CAN_HALF }];
    cfg.docking.initial_dock = Some(0);
    cfg
}

pub const HOLD: Vec3 = Vec3::new(0.0, 0.85, 0.0);

pub fn decoupling_sweep() -> ScenarioConfig {
    use dockhap_core::scenario::LoadRamp;
    let mut cfg = base_config("decoupling_sweep", Condition::ForceFeedback, vec![kf(0.0, HOLD)], 1.2);
    cfg.docking.initial_dock = Some(0);
    cfg.load_ramp = Some(LoadRamp { start: 0.1, duration: 1.0, from: 40.0, to: 60.0 });
    cfg
}

pub fn pursuit_static() -> ScenarioConfig {
    let mut cfg = base_config("pursuit_static", Condition::ForceFeedback, vec![kf(0.0, HOLD)], 0.8);
    let plate = cfg.hand.plate_pose(&RigidTransform::from_translation(HOLD)).translation();
    cfg.arms[0].home_tool_position = Some(plate + Vec3::new(-0.4, -0.3, 0.0));
    cfg
}

pub fn pursuit_moving() -> ScenarioConfig {
    let a = Vec3::new(-0.3, 0.85, -0.3);
    let b = Vec3::new(0.3, 0.85, -0.3);
    let mut cfg = base_config("pursuit_moving", Condition::ForceFeedback, vec![kf(0.0, a), kf(2.0, b)], 1.5);
    cfg.trajectory.interpolation = Interpolation::Linear;
    let plate = cfg.hand.plate_pose(&RigidTransform::from_translation(a)).translation();
    cfg.arms[0].home_tool_position = Some(plate + Vec3::new(0.2, -0.2, 0.3));
    cfg
}

/// Carries a can in a cupped hand across two arms placed side by side.
pub fn handover() -> ScenarioConfig {
    let x0 = -0.4;
    let x1 = 0.4;
    let low = 0.62;
    let high = DESK_TOP + 0.012 + 0.1;
    let mut keys = vec![kf(0.0, Vec3::new(x0, low, 0.0)), kf(0.4, Vec3::new(x0, high, 0.0))];
    let mut cup = kf(0.7, Vec3::new(x0, high, 0.0));
    cup.flex[0] = 0.6;
    cup.flex[2] = 0.6;
    keys.push(cup);
    let mut carried = cup;
    carried.t = 3.7;
    carried.position = Vec3::new(x1, high, 0.0);
    keys.push(carried);
    let mut cfg = base_config("handover", Condition::ForceFeedback, keys, 4.0);
    let half_x = 1.330 / 2.0;
    cfg.arms = vec![arm(Vec3::new(-half_x, 0.68, 0.0)), arm(Vec3::new(half_x, 0.68, 0.0))];
    cfg.arms[0].plate_offset = Vec3::new(-0.045, 0.0, 0.0);
    cfg.arms[1].plate_offset = Vec3::new(0.045, 0.0, 0.0);
    cfg.arms[1].home_tool_position = Some(Vec3::new(0.05, high - 0.07, 0.0));
    cfg.docking.mode = TopologyMode::Handover;
    cfg.docking.initial_dock = Some(0);
    cfg.scene.cans = vec![CanSpec { mass: 0.3, center: Vec3::new(x0, DESK_TOP + CAN_HALF.y, 0.0), half_extents: CAN_HALF }];
    cfg
}
