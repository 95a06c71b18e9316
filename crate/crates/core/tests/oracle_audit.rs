use dockhap_core::docking::DockState;
use dockhap_core::math::Vec3;
use dockhap_core::scenario::{
    audit_rates, weight_oracle, ArmTick, LiftWindow, MetricLog, OracleError, RateAuditor, TickRecord, Verdict,
    NOISE_FLOOR,
};
use proptest::prelude::*;

fn arm_tick(force: Vec3, issued: bool) -> ArmTick {
    ArmTick {
        state: DockState::Docked,
        effector: Vec3::ZERO,
        tool: Vec3::ZERO,
        target_distance: 0.0,
        commanded_force: force,
        rendered_force: force,
        rendered_world: force,
        transmitted_force: Vec3::ZERO,
        joint_axial: 0.0,
        magnet: true,
        target_issued: issued,
    }
}

fn record(tick: u64, force: Vec3, glove: bool, arm: bool) -> TickRecord {
    TickRecord {
        tick,
        t_us: tick * 1000,
        arms: vec![arm_tick(force, arm)],
        hand_position: Vec3::ZERO,
        intended_flex: [0.0; 5],
        applied_flex: [0.0; 5],
        glove_issued: glove,
        glove_stops: [1.0; 5],
        glove_torques: [0.0; 5],
        net_hand_force: Vec3::ZERO,
        can_support: vec![],
        impulse_count: 0,
        events: vec![],
    }
}

/// One 100 ms window per force, 50 ms apart, starting at 0.1 s.
fn lifts(forces: &[f64]) -> (MetricLog, Vec<LiftWindow>) {
    let total = 100 + 150 * forces.len() as u64;
    let mut windows = Vec::new();
    let mut records = Vec::new();
    for tick in 0..total {
        let k = tick.checked_sub(100).map(|t| (t / 150, t % 150));
        let f = match k {
            Some((i, off)) if off < 100 => forces[i as usize],
            _ => 0.0,
        };
        records.push(record(tick, Vec3::new(0.0, -f, 0.0), false, true));
    }
    for (i, _) in forces.iter().enumerate() {
        let start = 0.1 + 0.15 * i as f64;
        windows.push(LiftWindow { can: i, start, end: start + 0.1 });
    }
    (MetricLog { records }, windows)
}

#[test]
fn oracle_orders_by_rendered_weight() {
    let (log, w) = lifts(&[2.943, 0.0981, 1.4715]);
    let r = weight_oracle(&log, &w).unwrap();
    for (m, f) in r.mean_force.iter().zip([2.943, 0.0981, 1.4715]) {
        assert!((m - f).abs() < 1e-12, "{m} vs {f}");
    }
    match r.verdict {
        Verdict::Ordered { order, confidence } => {
            assert_eq!(order, vec![1, 2, 0]);
            assert!((confidence - 0.5).abs() < 1e-9);
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn oracle_silent_arm_is_indistinguishable() {
    let (log, w) = lifts(&[0.0, 0.0, NOISE_FLOOR * 0.5]);
    assert_eq!(weight_oracle(&log, &w).unwrap().verdict, Verdict::Indistinguishable);
}

#[test]
fn oracle_groups_close_weights() {
    let (log, w) = lifts(&[1.0, 1.02, 3.0]);
    match weight_oracle(&log, &w).unwrap().verdict {
        Verdict::Tie { groups, .. } => assert_eq!(groups, vec![vec![0, 1], vec![2]]),
        v => panic!("{v:?}"),
    }
}

#[test]
fn oracle_rejects_bad_windows() {
    let (log, mut w) = lifts(&[1.0, 2.0]);
    assert_eq!(weight_oracle(&log, &[]), Err(OracleError::NoWindows));
    let dup = [w[0], w[0]];
    assert_eq!(weight_oracle(&log, &dup), Err(OracleError::DuplicateCan { can: 0 }));
    let gap = [w[0], LiftWindow { can: 2, ..w[1] }];
    assert_eq!(weight_oracle(&log, &gap), Err(OracleError::MissingCan { can: 1 }));
    w[1].start = 50.0;
    w[1].end = 51.0;
    assert_eq!(weight_oracle(&log, &w), Err(OracleError::EmptyWindow { can: 1 }));
}

proptest! {
    #[test]
    fn oracle_order_is_sorted_weight(
        masses in prop::collection::vec(0.01..1.0f64, 1..5),
        rotate in 0usize..5,
    ) {
        // Spread masses geometrically so every pair is well separated.
        let mut forces: Vec<f64> = (0..masses.len()).map(|i| 9.81 * masses[0] * 1.5f64.powi(i as i32)).collect();
        let n = forces.len();
        forces.rotate_left(rotate % n);
        let (log, mut w) = lifts(&forces);
        let a = weight_oracle(&log, &w).unwrap();
        w.reverse();
        let b = weight_oracle(&log, &w).unwrap();
        prop_assert_eq!(&a, &b);
        let mut expect: Vec<usize> = (0..forces.len()).collect();
        expect.sort_by(|x, y| forces[*x].total_cmp(&forces[*y]));
        match a.verdict {
            Verdict::Ordered { order, .. } => prop_assert_eq!(order, expect),
            v => prop_assert!(false, "{:?}", v),
        }
    }

    #[test]
    fn audit_measures_issue_intervals(glove_every in 1u64..60, arm_every in 1u64..60, ticks in 100u64..400) {
        let records: Vec<TickRecord> = (0..ticks)
            .map(|t| record(t, Vec3::ZERO, t % glove_every == 0, t % arm_every == 0))
            .collect();
        let a = audit_rates(&records);
        prop_assert!(a.control_tick_exact);
        prop_assert_eq!(a.ticks, ticks);
        prop_assert_eq!(a.min_glove_interval_us, Some(glove_every * 1000));
        // The last issue may be followed by a shorter open gap.
        prop_assert_eq!(&a.max_arm_interval_us, &vec![arm_every.min(ticks - 1) * 1000]);
        prop_assert_eq!(a.glove_ok(), glove_every * 1000 >= 33_300);
        prop_assert_eq!(a.arms_ok(), arm_every * 1000 <= 33_300);

        let mut streaming = RateAuditor::new();
        for r in &records {
            streaming.push(r);
        }
        prop_assert_eq!(streaming.finish(), audit_rates(&records));
    }
}

#[test]
fn audit_flags_tick_drift_and_silent_arm() {
    let mut records: Vec<TickRecord> = (0..100).map(|t| record(t, Vec3::ZERO, false, t == 0)).collect();
    let a = audit_rates(&records);
    assert!(a.control_tick_exact);
    assert_eq!(a.min_glove_interval_us, None);
    assert_eq!(a.max_arm_interval_us, vec![99_000]);
    assert!(!a.passed());
    records[50].t_us += 1;
    assert!(!audit_rates(&records).control_tick_exact);
}
