use std::f64::consts::PI;

use dockhap_core::capability::{capability_at, compose, Device, DockEdge, TopologyMode};
use dockhap_core::devices::{
    arm_step, glove_apply, ArmCommand, ArmSpec, ArmState, FingerCoupling, GloveCommand, GloveSpec, HandState, FINGERS,
};
use dockhap_core::docking::{
    dock_step, joint_transmit, pursuit_waypoint, Dof, DockContext, DockJoint, DockJointKind, DockState, DofMask,
    JointParams, MagnetChannel, Wrench,
};
use dockhap_core::frames::{effector_correction, RigidTransform};
use dockhap_core::math::{Aabb, Quat, Vec3};
use dockhap_core::sim::drum::{contact_drum_param, DRUM_TOLERANCE};
use dockhap_core::sim::hand::{HandGeometry, MIDDLE};
use dockhap_core::sim::routing::{pair_opposing, route_forces, HandForce};
use dockhap_core::sim::world::{ContactImpulse, RigidBody, SimWorld, SolverParams};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn quat() -> impl Strategy<Value = Quat> {
    (-PI..PI, -PI / 2.0..PI / 2.0, -PI..PI).prop_map(|(x, y, z)| Quat::from_euler_zyx(x, y, z))
}

fn pose(r: f64) -> impl Strategy<Value = RigidTransform> {
    (quat(), vec3(r)).prop_map(|(q, t)| RigidTransform::new(q, t))
}

fn joint_kind() -> impl Strategy<Value = DockJointKind> {
    prop_oneof![
        Just(DockJointKind::PlateSlip),
        Just(DockJointKind::PlateFriction),
        Just(DockJointKind::PinnedRotary),
        Just(DockJointKind::Toothed),
        Just(DockJointKind::Prismatic),
        (0u8..64).prop_map(|b| DockJointKind::FreeAxes(DofMask::from_bits(b))),
    ]
}

fn dock_state() -> impl Strategy<Value = DockState> {
    prop_oneof![
        Just(DockState::Free),
        Just(DockState::Intercepting),
        Just(DockState::Docked),
        Just(DockState::Releasing)
    ]
}

proptest! {
    #[test]
    fn compose_with_inverse_is_identity(a in pose(3.0), p in vec3(1.0)) {
        let back = a.compose(&a.inverse()).transform_point(p);
        prop_assert!((back - p).norm() < 1e-12);
    }

    #[test]
    fn compose_is_associative(a in pose(2.0), b in pose(2.0), c in pose(2.0)) {
        let l = a.compose(&b).compose(&c);
        let r = a.compose(&b.compose(&c));
        prop_assert!(l.approx_eq(&r, 1e-12));
    }

    #[test]
    fn corrected_tool_lands_on_target(
        base in pose(2.0), eff in pose(1.0), mount in pose(0.1), target in pose(2.0), err in pose(0.05),
    ) {
        let effect_w = base.compose(&eff);
        let tool_w = effect_w.compose(&mount);
        let api = err.inverse().compose(&eff);
        let cmd = effector_correction(&base, &effect_w, &tool_w, &target, &api);
        let tool_after = base.compose(&err).compose(&cmd).compose(&mount);
        prop_assert!(tool_after.approx_eq(&target, 1e-9));
    }

    /// Re-expressing every tracked pose in another world frame leaves the command unchanged.
    #[test]
    fn correction_is_independent_of_world_frame(
        world in pose(5.0), base in pose(2.0), eff in pose(1.0), mount in pose(0.1), target in pose(2.0), api in pose(1.0),
    ) {
        let effect_w = base.compose(&eff);
        let tool_w = effect_w.compose(&mount);
        let a = effector_correction(&base, &effect_w, &tool_w, &target, &api);
        let w = |t: &RigidTransform| world.compose(t);
        let b = effector_correction(&w(&base), &w(&effect_w), &w(&tool_w), &w(&target), &api);
        prop_assert!(a.approx_eq(&b, 1e-9));
    }

    #[test]
    fn free_dofs_carry_nothing(kind in joint_kind(), f in vec3(60.0), t in vec3(0.4)) {
        let joint = DockJoint::new(kind, &JointParams::default(), RigidTransform::IDENTITY);
        let out = joint_transmit(&joint, &Wrench::new(f, t)).unwrap();
        if !out.released {
            for d in kind.free().iter() {
                prop_assert_eq!(out.wrench.component(d), 0.0);
            }
            prop_assert!(out.wrench.force.z <= joint.breaking_force);
        } else {
            prop_assert_eq!(out.wrench, Wrench::ZERO);
        }
    }

    #[test]
    fn constrained_rigid_dofs_pass_unchanged(kind in joint_kind(), f in vec3(60.0), t in vec3(0.25)) {
        let joint = DockJoint::new(kind, &JointParams::default(), RigidTransform::IDENTITY);
        let out = joint_transmit(&joint, &Wrench::new(f, t)).unwrap();
        prop_assume!(!out.released);
        let rigid = kind.constrained() & kind.friction_limited().complement();
        for d in rigid.iter() {
            prop_assert_eq!(out.wrench.component(d), Wrench::new(f, t).component(d));
        }
    }

    #[test]
    fn axial_overload_always_releases(kind in joint_kind(), excess in 1e-9..100.0f64, side in vec3(5.0)) {
        prop_assume!(kind.constrained().contains(Dof::Tz));
        let joint = DockJoint::new(kind, &JointParams::default(), RigidTransform::IDENTITY);
        let f = Vec3::new(side.x, side.y, joint.breaking_force + excess);
        prop_assert!(joint_transmit(&joint, &Wrench::new(f, Vec3::ZERO)).unwrap().released);
    }

    #[test]
    fn friction_caps_tangential_load(f in vec3(80.0)) {
        let joint = DockJoint::new(DockJointKind::PlateSlip, &JointParams::default(), RigidTransform::IDENTITY);
        let out = joint_transmit(&joint, &Wrench::new(f, Vec3::ZERO)).unwrap();
        prop_assume!(!out.released);
        let limit = joint.friction_mu * (joint.breaking_force - f.z).max(0.0);
        let ft = out.wrench.force.x.hypot(out.wrench.force.y);
        prop_assert!(ft <= limit * (1.0 + 1e-12) + 1e-12);
        prop_assert_eq!(out.slip, f.x.hypot(f.y) > limit);
    }

    #[test]
    fn lifecycle_steps_are_legal(
        s in dock_state(),
        bits in 0u8..32,
        off in 0u32..3,
    ) {
        let ctx = DockContext {
            approaching: bits & 1 != 0,
            attached: bits & 2 != 0,
            released: bits & 4 != 0,
            release_command: bits & 8 != 0,
            abort: bits & 16 != 0,
            magnet_off_ticks: off,
        };
        let next = dock_step(s, &ctx);
        prop_assert!(next == s || s.can_transition_to(next));
    }

    #[test]
    fn magnet_follows_commands_after_latency(latency in 0u64..20, cmds in prop::collection::vec((0u64..200, any::<bool>()), 0..20)) {
        let mut cmds = cmds;
        cmds.sort_by_key(|c| c.0);
        let mut ch = MagnetChannel::new(latency);
        let mut next = 0;
        for tick in 0..260u64 {
            while next < cmds.len() && cmds[next].0 == tick {
                ch.command(tick, cmds[next].1);
                next += 1;
            }
            let on = ch.update(tick);
            // Oracle: the last command issued at or before tick - latency, coalescing repeats.
            let mut expect = false;
            let mut last = false;
            for (t, c) in &cmds {
                if *c != last {
                    last = *c;
                    if *t + latency <= tick {
                        expect = *c;
                    }
                }
            }
            prop_assert_eq!(on, expect, "tick {}", tick);
        }
    }

    #[test]
    fn arm_never_leaves_workspace_and_converges(start in vec3(0.28), target in vec3(2.0), speed in 0.1..2.0f64) {
        let spec = ArmSpec::virtuose_6d(RigidTransform::IDENTITY);
        let mut s = ArmState { pose: RigidTransform::from_translation(start) };
        let cmd = ArmCommand { target: RigidTransform::from_translation(target), linear_speed: speed, angular_speed: 1.0 };
        let goal = spec.workspace.clamp(target);
        let mut prev = start.distance(goal);
        let dt = 0.001;
        for _ in 0..200 {
            let out = arm_step(&spec, &s, &cmd, dt).unwrap();
            let p = out.state.pose.translation();
            prop_assert!(spec.workspace.contains(p));
            prop_assert!(p.distance(s.pose.translation()) <= speed * dt + 1e-12);
            let e = p.distance(goal);
            prop_assert!(e <= prev + 1e-12);
            prev = e;
            s = out.state;
        }
    }

    #[test]
    fn pursuit_step_is_bounded_and_direct(tool in vec3(1.0), target in vec3(1.0), speed in 0.01..3.0f64) {
        let dt = 0.01;
        let wp = pursuit_waypoint(
            &RigidTransform::from_translation(tool),
            &RigidTransform::from_translation(target),
            Quat::IDENTITY,
            speed,
            dt,
        ).unwrap().translation();
        let d0 = tool.distance(target);
        prop_assert!(wp.distance(tool) <= speed * dt * (1.0 + 1e-12));
        let expected = (d0 - speed * dt).max(0.0);
        prop_assert!((wp.distance(target) - expected).abs() < 1e-12);
    }

    #[test]
    fn glove_flex_is_min_of_intent_and_stop(
        flex in prop::array::uniform5(0.0..=1.0f64),
        stop in prop::array::uniform5(0.0..=1.0f64),
        spring in 0.0..10.0f64,
    ) {
        let coupling = FingerCoupling::default();
        let spec = GloveSpec::dexmo();
        let hand = HandState::from_normalized(RigidTransform::IDENTITY, flex, [0.5; FINGERS], 0.5, &coupling);
        let out = glove_apply(&GloveCommand { stop, spring: [spring; FINGERS] }, &hand, &spec, &coupling).unwrap();
        for i in 0..FINGERS {
            prop_assert_eq!(out.hand.flex[i], flex[i].min(stop[i]));
            prop_assert!(out.resistance[i] >= 0.0 && out.resistance[i] <= spec.max_joint_torque);
            prop_assert_eq!(out.resistance[i] > 0.0, flex[i] > stop[i] && spring > 0.0);
        }
    }

    #[test]
    fn pairing_uses_each_collider_once(
        forces in prop::collection::vec((0u8..19, 0usize..3, vec3(5.0)), 0..12),
    ) {
        let forces: Vec<HandForce> = forces
            .into_iter()
            .enumerate()
            .map(|(i, (_, body, f))| HandForce { collider: i as u8, body, point: Vec3::ZERO, force: f })
            .collect();
        let pairs = pair_opposing(&forces);
        let mut seen = std::collections::HashSet::new();
        for p in &pairs {
            prop_assert!(seen.insert(p.first) && seen.insert(p.second));
            let a = &forces[p.first as usize];
            let b = &forces[p.second as usize];
            prop_assert_eq!(a.body, b.body);
            prop_assert_eq!(p.body, a.body);
            prop_assert!(p.magnitude >= 0.0);
            let cos = -a.force.normalized().unwrap().dot(b.force.normalized().unwrap());
            prop_assert!(cos >= (15.0f64).to_radians().cos() - 1e-12);
        }
    }

    #[test]
    fn routing_conserves_the_net_wrench(
        imps in prop::collection::vec((0u8..19, vec3(1.0), vec3(1.0), 0.0..0.01f64), 0..10),
        base in pose(1.0),
        docked in any::<bool>(),
    ) {
        let impulses: Vec<ContactImpulse> = imps
            .iter()
            .filter_map(|(c, p, n, j)| {
                n.normalized().map(|n| ContactImpulse {
                    body_a: 100 + *c as usize,
                    body_b: 1,
                    point: *p,
                    normal: n,
                    magnitude: *j,
                    hand_collider: Some(*c),
                })
            })
            .collect();
        let dt = 0.001;
        let origin = Vec3::new(0.0, 0.1, 0.0);
        let r = route_forces(&impulses, GloveCommand::unrestricted(1.0), docked, &base, origin, dt);
        let mut net = Vec3::ZERO;
        let mut torque = Vec3::ZERO;
        for i in &impulses {
            let f = i.normal * (-i.magnitude / dt);
            net = net + f;
            torque = torque + (i.point - origin).cross(f);
        }
        prop_assert!((r.net_force - net).norm() <= 1e-9 * (1.0 + net.norm()));
        prop_assert!((r.net_torque - torque).norm() <= 1e-9 * (1.0 + torque.norm()));
        if docked {
            prop_assert_eq!(r.residual, Wrench::ZERO);
            let back = base.rotation().rotate(r.arm_wrench.force);
            prop_assert!((back - net).norm() <= 1e-9 * (1.0 + net.norm()));
        } else {
            prop_assert_eq!(r.arm_wrench, Wrench::ZERO);
            prop_assert_eq!(r.residual.force, r.net_force);
        }
    }

    #[test]
    fn grounded_region_is_union_of_arm_boxes(
        arms in prop::collection::vec((vec3(1.0), -PI..PI, (0.1..1.0f64, 0.1..1.0f64, 0.1..1.0f64)), 1..4),
        seed in any::<u64>(),
    ) {
        let mut devices: Vec<Device> = Vec::new();
        let mut boxes = Vec::new();
        for (t, yaw, (sx, sy, sz)) in &arms {
            let mut spec = ArmSpec::virtuose_6d(RigidTransform::new(Quat::from_axis_angle(Vec3::Y, *yaw), *t));
            spec.workspace = Aabb::from_size(Vec3::ZERO, Vec3::new(*sx, *sy, *sz));
            boxes.push((*t, *yaw, Vec3::new(*sx, *sy, *sz) * 0.5));
            devices.push(Device::Arm(spec));
        }
        let glove = devices.len();
        devices.push(Device::Glove { spec: GloveSpec::dexmo(), hand: 0 });
        let edges: Vec<DockEdge> = (0..glove).map(|i| DockEdge { parent: i, child: glove, joint: DockJointKind::PlateSlip }).collect();
        let mode = if glove == 1 { TopologyMode::Single } else { TopologyMode::Handover };
        let cap = compose(&devices, &edges, mode).unwrap();

        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..200 {
            let p = Vec3::new(next(), next(), next());
            // Independent point-in-rotated-box test.
            let inside = boxes.iter().any(|(t, yaw, h)| {
                let d = p - *t;
                let (s, c) = yaw.sin_cos();
                let lx = c * d.x - s * d.z;
                let lz = s * d.x + c * d.z;
                lx.abs() <= h.x && d.y.abs() <= h.y && lz.abs() <= h.z
            });
            prop_assert_eq!(cap.translation.contains_enhanced(p), inside);
            let at = capability_at(&cap, &RigidTransform::from_translation(p));
            prop_assert_eq!(at.is_grounded(), inside);
        }
    }
}

fn mcp_heights(flex: f64, coupling: &FingerCoupling, geometry: &HandGeometry) -> [f64; 3] {
    // Finger segment end heights above the palm, straight spread.
    let a = flex * coupling.mcp_flexed;
    let angles = [a, a * (1.0 + coupling.pip_ratio), a * (1.0 + coupling.pip_ratio + coupling.dip_ratio)];
    let mut y = 0.0;
    let mut out = [0.0; 3];
    for k in 0..3 {
        y += geometry.phalanges[k] * angles[k].sin();
        out[k] = y;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The bisected stop matches a fine scan for the first flex that touches a ceiling.
    #[test]
    fn drum_stop_matches_scan(height in 0.015..0.035f64, intended in 0.3..1.0f64) {
        let geometry = HandGeometry::default();
        let coupling = FingerCoupling::default();
        let mut world = SimWorld::new(Vec3::new(0.0, -9.81, 0.0), SolverParams::default());
        let half = Vec3::new(1.0, 0.05, 1.0);
        world.add_body(RigidBody::static_box(Vec3::new(0.0, height + half.y, 0.0), half, true)).unwrap();
        let mut flex = [0.0; FINGERS];
        flex[MIDDLE] = intended;
        let hand = HandState::from_normalized(RigidTransform::IDENTITY, flex, [0.5; FINGERS], 0.5, &coupling);
        let stop = contact_drum_param(&world, &geometry, &coupling, &hand, MIDDLE);

        let r = geometry.phalange_radius;
        let touches = |f: f64| mcp_heights(f, &coupling, &geometry).iter().any(|y| y + r > height);
        let step = 1e-5;
        let mut scan = 0.0;
        while scan + step <= intended && !touches(scan + step) {
            scan += step;
        }
        prop_assert!(touches(intended));
        prop_assert!((stop - scan).abs() <= step + DRUM_TOLERANCE, "stop {} scan {}", stop, scan);
        prop_assert!(!touches(stop));
    }
}
