//! Tick-driven coordinator that owns every device and the world.
//!
//! Each 1 ms control tick advances the hand, the glove, the physics and every
//! arm callback. Every `frame_ticks` ticks the application frame runs:
//! interception decisions, new arm targets and force offsets. The glove is
//! commanded every `glove_ticks` ticks.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::capability::TopologyMode;
use crate::devices::{
    arm_step, glove_apply, impedance_displacement, rendered_force, ArmCommand, ArmState, DeviceError, GloveCommand,
    HandState, FINGERS,
};
use crate::docking::{
    dock_step, joint_transmit, pursuit_waypoint, select_interceptor, try_attach, DockContext, DockError, DockJoint,
    DockMachine, DockState, InterceptCandidate, MagnetChannel, Wrench,
};
use crate::frames::{effector_correction, RigidTransform};
use crate::math::Vec3;
use crate::sim::{
    contact_drum_param, route_forces, BodyId, BodyRole, ForceFilter, RigidBody, SimError, SimWorld, HAND_COLLIDERS,
};

use super::config::{ConfigError, Condition, ScenarioConfig, GRAVITY};
use super::record::{ArmTick, Event, MetricLog, ReleaseCause, TickRecord};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("simulation diverged at tick {tick}: {source}")]
    Sim { tick: u64, source: SimError },
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Dock(#[from] DockError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSummary {
    pub ticks: u64,
}

struct ArmRt {
    base: RigidTransform,
    fk_error: RigidTransform,
    /// Pose reported by the arm, base frame.
    api: RigidTransform,
    command: ArmCommand,
    machine: DockMachine,
    magnet: MagnetChannel,
    joint: Option<DockJoint>,
    disarmed: bool,
    commanded_force: Vec3,
    rendered_force: Vec3,
    transmitted: Vec3,
    axial: f64,
}

impl ArmRt {
    fn true_local(&self) -> RigidTransform {
        self.fk_error.compose(&self.api)
    }

    fn effector_world(&self) -> RigidTransform {
        self.base.compose(&self.true_local())
    }

    /// Reported pose that puts the true effector at `world`.
    fn api_for_world(&self, world: &RigidTransform) -> RigidTransform {
        self.fk_error.inverse().compose(&self.base.inverse().compose(world))
    }
}

struct Coordinator<'a> {
    cfg: &'a ScenarioConfig,
    world: SimWorld,
    hand_bodies: Vec<BodyId>,
    can_bodies: Vec<BodyId>,
    arms: Vec<ArmRt>,
    glove_cmd: GloveCommand,
    filter: ForceFilter,
    filtered: Vec3,
    rng: ChaCha8Rng,
    tracked_prev: Option<Vec3>,
    dt: f64,
}

fn noise(rng: &mut ChaCha8Rng, amp: f64) -> Vec3 {
    if amp == 0.0 {
        return Vec3::ZERO;
    }
    let mut u = || ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0) * amp;
    Vec3::new(u(), u(), u())
}

impl<'a> Coordinator<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self, ScenarioError> {
        cfg.validate()?;
        let dt = cfg.timing.dt();
        let mut world = SimWorld::new(GRAVITY, cfg.solver);
        let sim_err = |source| ScenarioError::Sim { tick: 0, source };
        for s in &cfg.scene.statics {
            world.add_body(RigidBody::static_box(s.center, s.half_extents, s.collides_with_hand)).map_err(sim_err)?;
        }
        let mut can_bodies = Vec::new();
        for (i, c) in cfg.scene.cans.iter().enumerate() {
            can_bodies.push(
                world.add_body(RigidBody::dynamic_box(c.center, c.half_extents, c.mass, BodyRole::Can(i))).map_err(sim_err)?,
            );
        }
        let hand0 = hand_at(cfg, 0.0);
        let positions = cfg.hand.collider_positions(&hand0, &cfg.coupling);
        let mut hand_bodies = Vec::new();
        for (i, p) in positions.iter().enumerate() {
            let r = cfg.hand.collider_radius(i as u8);
            hand_bodies.push(world.add_body(RigidBody::hand_sphere(*p, r, i as u8)).map_err(sim_err)?);
        }

        let plate = cfg.hand.plate_pose(&hand0.wrist_pose);
        let mount = &cfg.docking.tool;
        let mut arms = Vec::new();
        for (i, a) in cfg.arms.iter().enumerate() {
            let base = a.spec.base_pose;
            let mut rt = ArmRt {
                base,
                fk_error: a.fk_error,
                api: RigidTransform::IDENTITY,
                command: ArmCommand::hold(RigidTransform::IDENTITY),
                machine: DockMachine::default(),
                magnet: MagnetChannel::new(cfg.docking.magnet_latency_ticks),
                joint: None,
                disarmed: false,
                commanded_force: Vec3::ZERO,
                rendered_force: Vec3::ZERO,
                transmitted: Vec3::ZERO,
                axial: 0.0,
            };
            let docked_now = cfg.docking.initial_dock == Some(i) && cfg.condition != Condition::Free;
            let tool_world = if docked_now {
                magnet_target(cfg, i, &plate)
            } else {
                let p = a.home_tool_position.unwrap_or_else(|| {
                    let eff = base.transform_point(a.spec.workspace.center);
                    eff + RigidTransform::from_rotation(mount.orientation)
                        .transform_vector(mount.effector_to_tool.translation())
                });
                RigidTransform::new(mount.orientation, p)
            };
            let eff_world = tool_world.compose(&mount.tool_to_effector());
            rt.api = rt.api_for_world(&eff_world);
            rt.command = ArmCommand::hold(rt.api);
            if docked_now {
                rt.machine = DockMachine::new(DockState::Docked);
                rt.magnet = MagnetChannel::energized(cfg.docking.magnet_latency_ticks);
                let attach_pose = plate.inverse().compose(&tool_world);
                rt.joint = Some(DockJoint::new(cfg.docking.joint, &cfg.docking.params, attach_pose));
            }
            arms.push(rt);
        }

        Ok(Coordinator {
            cfg,
            world,
            hand_bodies,
            can_bodies,
            arms,
            glove_cmd: GloveCommand::unrestricted(cfg.glove_spring),
            filter: ForceFilter::new(cfg.force.cutoff_hz, cfg.force.filter_enabled),
            filtered: Vec3::ZERO,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            tracked_prev: None,
            dt,
        })
    }

    fn any_docked(&self) -> bool {
        self.arms.iter().any(|a| a.machine.state() == DockState::Docked)
    }

    fn release(&mut self, i: usize, tick: u64, cause: ReleaseCause, events: &mut Vec<Event>) {
        let arm = &mut self.arms[i];
        let from = arm.machine.state();
        match arm.machine.transition(tick, DockState::Releasing) {
            Ok(_) => events.push(Event::Transition { arm: i, from, to: DockState::Releasing }),
            Err(_) => {
                events.push(Event::IllegalTransition { arm: i, from, to: DockState::Releasing });
                return;
            }
        }
        events.push(Event::Release { arm: i, cause });
        if arm.magnet.commanded() {
            arm.magnet.command(tick, false);
            events.push(Event::MagnetCommand { arm: i, on: false });
        }
        arm.joint = None;
        arm.disarmed = true;
        arm.commanded_force = Vec3::ZERO;
        arm.rendered_force = Vec3::ZERO;
        arm.transmitted = Vec3::ZERO;
        arm.axial = 0.0;
        arm.command = ArmCommand::hold(arm.api);
    }

    /// Effector pose that keeps a docked arm's magnet on the plate.
    fn slaved_effector(&self, i: usize, plate: &RigidTransform) -> Option<RigidTransform> {
        let joint = self.arms[i].joint?;
        Some(plate.compose(&joint.attach_pose).compose(&self.cfg.docking.tool.tool_to_effector()))
    }

    fn frame(&mut self, tick: u64, hand: &HandState, issued: &mut [bool], events: &mut Vec<Event>) -> Result<(), ScenarioError> {
        let cfg = self.cfg;
        let d = &cfg.docking;
        let mount = d.tool;
        let frame_dt = self.dt * cfg.timing.frame_ticks as f64;
        let plate = cfg.hand.plate_pose(&hand.wrist_pose);
        let tracked = plate.translation() + noise(&mut self.rng, cfg.tracking_noise);
        let velocity = self.tracked_prev.map_or(Vec3::ZERO, |p| (tracked - p) / frame_dt);
        self.tracked_prev = Some(tracked);
        let tracked_plate = plate.with_translation(tracked);
        let predicted_plate = plate.with_translation(tracked + velocity * d.prediction_horizon);

        let n = self.arms.len();
        let targets: Vec<RigidTransform> = (0..n).map(|i| magnet_target(cfg, i, &tracked_plate)).collect();
        let predicted_eff: Vec<Vec3> = (0..n)
            .map(|i| magnet_target(cfg, i, &predicted_plate).compose(&mount.tool_to_effector()).translation())
            .collect();

        // Software release and re-arming.
        for i in 0..n {
            let spec = &cfg.arms[i].spec;
            let local = self.arms[i].base.inverse().transform_point(predicted_eff[i]);
            if self.arms[i].machine.state() == DockState::Docked && !spec.workspace.contains(local) {
                self.release(i, tick, ReleaseCause::Workspace, events);
            }
            if self.arms[i].disarmed && !spec.workspace.inflated(d.region_margin).contains(local) {
                self.arms[i].disarmed = false;
            }
        }

        // Interception.
        let candidates: Vec<InterceptCandidate> = (0..n)
            .map(|i| {
                let a = &self.arms[i];
                InterceptCandidate {
                    base_pose: a.base,
                    workspace: cfg.arms[i].spec.workspace,
                    tool_position: a.effector_world().compose(&mount.effector_to_tool).translation(),
                    predicted_target: magnet_target(cfg, i, &predicted_plate).translation(),
                    predicted_effector: predicted_eff[i],
                    eligible: cfg.condition != Condition::Free
                        && !a.disarmed
                        && matches!(a.machine.state(), DockState::Free | DockState::Intercepting),
                }
            })
            .collect();
        let approaching: Vec<bool> = match d.mode {
            TopologyMode::Simultaneous => candidates
                .iter()
                .map(|c| c.eligible && c.reaches(c.predicted_effector, d.region_margin))
                .collect(),
            _ => {
                let winner = select_interceptor(&candidates, d.region_margin);
                (0..n).map(|i| winner == Some(i)).collect()
            }
        };

        for i in 0..n {
            let state = self.arms[i].machine.state();
            if matches!(state, DockState::Free | DockState::Intercepting) {
                let ctx = DockContext { approaching: approaching[i], ..Default::default() };
                let next = dock_step(state, &ctx);
                if next != state {
                    match self.arms[i].machine.transition(tick, next) {
                        Ok(_) => events.push(Event::Transition { arm: i, from: state, to: next }),
                        Err(_) => events.push(Event::IllegalTransition { arm: i, from: state, to: next }),
                    }
                }
            }
        }

        // Targets and force offsets.
        let n_docked = self.arms.iter().filter(|a| a.machine.state() == DockState::Docked).count();
        for i in 0..n {
            let spec = cfg.arms[i].spec;
            let state = self.arms[i].machine.state();
            let magnet_before = self.arms[i].magnet.commanded();
            let mut magnet_on = magnet_before;
            match state {
                DockState::Docked => {
                    let Some(eff) = self.slaved_effector(i, &plate) else { continue };
                    let local = self.arms[i].base.inverse().compose(&eff);
                    let (commanded, disp) = if cfg.condition == Condition::ForceFeedback && n_docked > 0 {
                        let share = self.filtered / n_docked as f64;
                        let f_base = self.arms[i].base.inverse_transform_vector(share);
                        (f_base, impedance_displacement(f_base, spec.stiffness)?)
                    } else {
                        (Vec3::ZERO, Vec3::ZERO)
                    };
                    let (rendered, _) = rendered_force(disp, spec.stiffness, spec.max_force);
                    let offset = rendered / spec.stiffness;
                    let target_local = local.with_translation(local.translation() + offset);
                    let a = &mut self.arms[i];
                    a.commanded_force = commanded;
                    a.rendered_force = rendered;
                    a.command = ArmCommand {
                        target: a.fk_error.inverse().compose(&target_local),
                        linear_speed: f64::INFINITY,
                        angular_speed: spec.max_angular_speed,
                    };
                }
                DockState::Intercepting => {
                    let a = &self.arms[i];
                    let eff_w = a.effector_world();
                    let tool_w = eff_w.compose(&mount.effector_to_tool);
                    let waypoint = pursuit_waypoint(&tool_w, &targets[i], mount.orientation, d.max_speed, frame_dt)?;
                    let api_target = effector_correction(&a.base, &eff_w, &tool_w, &waypoint, &a.api);
                    let close = tool_w.translation().distance(targets[i].translation()) <= d.approach_radius;
                    magnet_on = close && (d.mode == TopologyMode::Simultaneous || !self.any_docked());
                    let a = &mut self.arms[i];
                    a.command = ArmCommand { target: api_target, linear_speed: d.max_speed, angular_speed: spec.max_angular_speed };
                    a.commanded_force = Vec3::ZERO;
                    a.rendered_force = Vec3::ZERO;
                }
                DockState::Free | DockState::Releasing => {
                    let a = &mut self.arms[i];
                    a.command = ArmCommand::hold(a.api);
                    a.commanded_force = Vec3::ZERO;
                    a.rendered_force = Vec3::ZERO;
                    magnet_on = false;
                }
            }
            if magnet_on != magnet_before {
                self.arms[i].magnet.command(tick, magnet_on);
                events.push(Event::MagnetCommand { arm: i, on: magnet_on });
            }
            issued[i] = true;
        }
        Ok(())
    }

    fn arm_callbacks(&mut self, tick: u64, t: f64, hand: &HandState, issued: &[bool], events: &mut Vec<Event>) -> Result<(), ScenarioError> {
        let cfg = self.cfg;
        let plate = cfg.hand.plate_pose(&hand.wrist_pose);
        for i in 0..self.arms.len() {
            let spec = cfg.arms[i].spec;
            match self.arms[i].machine.state() {
                DockState::Docked => {
                    let Some(eff) = self.slaved_effector(i, &plate) else { continue };
                    let local = self.arms[i].base.inverse().compose(&eff);
                    if spec.workspace.excess(local.translation()) > 1e-9 {
                        self.release(i, tick, ReleaseCause::Workspace, events);
                    } else {
                        let a = &mut self.arms[i];
                        a.api = a.fk_error.inverse().compose(&local);
                        let on_hand = a.base.transform_vector(a.rendered_force);
                        let mut w = Wrench::new(plate.inverse_transform_vector(on_hand), Vec3::ZERO);
                        if let Some(r) = &cfg.load_ramp {
                            w.force.z += r.at(t);
                        }
                        let joint = a.joint.expect("docked arm has a joint");
                        let tr = joint_transmit(&joint, &w)?;
                        if tr.released {
                            let cause = if w.force.z > joint.breaking_force { ReleaseCause::Breaking } else { ReleaseCause::Peel };
                            self.release(i, tick, cause, events);
                        } else {
                            if tr.slip {
                                events.push(Event::Slip { arm: i });
                            }
                            a.transmitted = tr.wrench.force;
                            a.axial = tr.wrench.force.z;
                        }
                    }
                }
                _ => {
                    let a = &mut self.arms[i];
                    let step = arm_step(&spec, &ArmState { pose: a.api }, &a.command, self.dt)?;
                    a.api = step.state.pose;
                    if step.target_clamped && issued[i] {
                        events.push(Event::TargetClamped { arm: i });
                    }
                }
            }

            let energized = self.arms[i].magnet.update(tick);
            let state = self.arms[i].machine.state();
            if state == DockState::Intercepting && energized {
                let mode_ok = cfg.docking.mode == TopologyMode::Simultaneous || !self.any_docked();
                let tool_w = self.arms[i].effector_world().compose(&cfg.docking.tool.effector_to_tool);
                if mode_ok {
                    if let Some(joint) = try_attach(&tool_w, &plate, true, cfg.docking.joint, &cfg.docking.params) {
                        let a = &mut self.arms[i];
                        if a.machine.transition(tick, DockState::Docked).is_ok() {
                            a.joint = Some(joint);
                            a.command = ArmCommand::hold(a.api);
                            events.push(Event::Transition { arm: i, from: state, to: DockState::Docked });
                            events.push(Event::Attach { arm: i });
                        }
                    }
                }
            }
            if state == DockState::Releasing {
                let ctx = DockContext { magnet_off_ticks: self.arms[i].magnet.off_ticks(), ..Default::default() };
                if let Some(tr) = self.arms[i].machine.step(tick, &ctx) {
                    events.push(Event::Transition { arm: i, from: tr.from, to: tr.to });
                }
            }
        }
        Ok(())
    }

    fn tick(&mut self, tick: u64) -> Result<TickRecord, ScenarioError> {
        let cfg = self.cfg;
        let dt = self.dt;
        let t_next = (tick + 1) as f64 * dt;
        let mut events = Vec::new();

        let intended = hand_at(cfg, t_next);
        let glove_issued = tick % cfg.timing.glove_ticks == 0;
        if glove_issued {
            let mut stop = [1.0; FINGERS];
            for (f, s) in stop.iter_mut().enumerate().take(cfg.glove.actuated_dofs) {
                *s = contact_drum_param(&self.world, &cfg.hand, &cfg.coupling, &intended, f);
            }
            self.glove_cmd = GloveCommand { stop, spring: [cfg.glove_spring; FINGERS] };
        }
        let glove = glove_apply(&self.glove_cmd, &intended, &cfg.glove, &cfg.coupling)?;
        let hand = glove.hand;

        let positions = cfg.hand.collider_positions(&hand, &cfg.coupling);
        for (k, id) in self.hand_bodies.iter().enumerate().take(HAND_COLLIDERS) {
            self.world
                .set_kinematic_target(*id, positions[k], dt)
                .map_err(|source| ScenarioError::Sim { tick, source })?;
        }
        let report = self.world.step(dt).map_err(|source| ScenarioError::Sim { tick, source })?;

        let plate = cfg.hand.plate_pose(&hand.wrist_pose);
        let docked_base = self
            .arms
            .iter()
            .find(|a| a.machine.state() == DockState::Docked)
            .map(|a| a.base);
        let routed = route_forces(
            &report.impulses,
            self.glove_cmd,
            docked_base.is_some(),
            &docked_base.unwrap_or(RigidTransform::IDENTITY),
            plate.translation(),
            dt,
        );
        self.filtered = self.filter.step(routed.net_force, dt);

        let mut issued = vec![false; self.arms.len()];
        if tick % cfg.timing.frame_ticks == 0 {
            self.frame(tick, &hand, &mut issued, &mut events)?;
        }
        self.arm_callbacks(tick, t_next, &hand, &issued, &mut events)?;

        let mut can_support = vec![0.0; self.can_bodies.len()];
        for imp in report.impulses.iter().filter(|i| i.hand_collider.is_some()) {
            if let Some(c) = self.can_bodies.iter().position(|b| *b == imp.body_b) {
                can_support[c] += imp.normal.y * imp.magnitude / dt;
            }
        }

        let mount = cfg.docking.tool;
        let arms = self
            .arms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let eff = a.effector_world();
                let tool = eff.compose(&mount.effector_to_tool).translation();
                let target = magnet_target(cfg, i, &plate).translation();
                ArmTick {
                    state: a.machine.state(),
                    effector: eff.translation(),
                    tool,
                    target_distance: tool.distance(target),
                    commanded_force: a.commanded_force,
                    rendered_force: a.rendered_force,
                    rendered_world: a.base.transform_vector(a.rendered_force),
                    transmitted_force: a.transmitted,
                    joint_axial: a.axial,
                    magnet: a.magnet.is_energized(),
                    target_issued: issued[i],
                }
            })
            .collect();

        Ok(TickRecord {
            tick,
            t_us: tick * cfg.timing.tick_us,
            arms,
            hand_position: hand.wrist_pose.translation(),
            intended_flex: intended.flex,
            applied_flex: hand.flex,
            glove_issued,
            glove_stops: self.glove_cmd.stop,
            glove_torques: glove.resistance,
            net_hand_force: routed.net_force,
            can_support,
            impulse_count: report.impulses.len(),
            events,
        })
    }
}

fn hand_at(cfg: &ScenarioConfig, t: f64) -> HandState {
    let s = cfg.trajectory.sample(t);
    HandState::from_normalized(s.wrist, s.flex, s.abduction, 0.0, &cfg.coupling)
}

/// Magnet pose that arm `i` aims for on the given plate.
fn magnet_target(cfg: &ScenarioConfig, i: usize, plate: &RigidTransform) -> RigidTransform {
    RigidTransform::new(cfg.docking.tool.orientation, plate.transform_point(cfg.arms[i].plate_offset))
}

/// Runs a scenario and hands every tick record to `sink` as it is produced.
pub fn run_scenario_with<F: FnMut(&TickRecord)>(cfg: &ScenarioConfig, mut sink: F) -> Result<RunSummary, ScenarioError> {
    let mut c = Coordinator::new(cfg)?;
    let ticks = cfg.timing.ticks();
    for tick in 0..ticks {
        let rec = c.tick(tick)?;
        sink(&rec);
    }
    Ok(RunSummary { ticks })
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<MetricLog, ScenarioError> {
    let mut log = MetricLog::default();
    run_scenario_with(cfg, |r| log.records.push(r.clone()))?;
    Ok(log)
}
