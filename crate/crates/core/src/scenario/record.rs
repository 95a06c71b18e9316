use alloc::vec::Vec;

use crate::devices::FINGERS;
use crate::docking::DockState;
use crate::math::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReleaseCause {
    /// Tensile load above the breaking force.
    Breaking,
    /// Off-axis torque above the peel threshold.
    Peel,
    /// The hand is leaving the arm's workspace.
    Workspace,
}

impl ReleaseCause {
    pub fn name(self) -> &'static str {
        match self {
            ReleaseCause::Breaking => "breaking",
            ReleaseCause::Peel => "peel",
            ReleaseCause::Workspace => "workspace",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Event {
    Transition { arm: usize, from: DockState, to: DockState },
    IllegalTransition { arm: usize, from: DockState, to: DockState },
    MagnetCommand { arm: usize, on: bool },
    Attach { arm: usize },
    Release { arm: usize, cause: ReleaseCause },
    TargetClamped { arm: usize },
    Slip { arm: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmTick {
    pub state: DockState,
    /// True effector position, world frame.
    pub effector: Vec3,
    /// Magnet position, world frame.
    pub tool: Vec3,
    /// Distance from the magnet to its plate target, m.
    pub target_distance: f64,
    /// Force requested from this arm before clamping, base frame.
    pub commanded_force: Vec3,
    /// Force the arm renders, base frame.
    pub rendered_force: Vec3,
    /// Same force in the world frame.
    pub rendered_world: Vec3,
    /// Force reaching the hand through the joint, plate frame.
    pub transmitted_force: Vec3,
    /// Tensile load on the joint along the plate normal, N.
    pub joint_axial: f64,
    pub magnet: bool,
    pub target_issued: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TickRecord {
    pub tick: u64,
    pub t_us: u64,
    pub arms: Vec<ArmTick>,
    pub hand_position: Vec3,
    pub intended_flex: [f64; FINGERS],
    pub applied_flex: [f64; FINGERS],
    pub glove_issued: bool,
    pub glove_stops: [f64; FINGERS],
    pub glove_torques: [f64; FINGERS],
    /// Sum of forces on hand colliders, world frame.
    pub net_hand_force: Vec3,
    /// Vertical force from the hand on each can, N.
    pub can_support: Vec<f64>,
    pub impulse_count: usize,
    pub events: Vec<Event>,
}

impl TickRecord {
    /// Sum of the forces rendered by all arms, world frame.
    pub fn total_rendered(&self) -> Vec3 {
        self.arms.iter().fold(Vec3::ZERO, |a, r| a + r.rendered_world)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricLog {
    pub records: Vec<TickRecord>,
}

impl MetricLog {
    pub fn events(&self) -> impl Iterator<Item = (u64, &Event)> {
        self.records.iter().flat_map(|r| r.events.iter().map(move |e| (r.tick, e)))
    }
}
