//! Declarative scenarios, the tick coordinator and log analysis.

pub mod audit;
pub mod config;
pub mod coordinator;
pub mod oracle;
pub mod record;
pub mod trajectory;

pub use audit::{audit_rates, RateAudit, RateAuditor};
pub use config::{
    ArmSetup, CanSpec, Condition, ConfigError, DockingConfig, ForceConfig, LoadRamp, SceneConfig, ScenarioConfig,
    StaticBox, TimingConfig, GRAVITY,
};
pub use coordinator::{run_scenario, run_scenario_with, RunSummary, ScenarioError};
pub use oracle::{weight_oracle, LiftWindow, OracleError, OracleReport, Verdict, NOISE_FLOOR, TIE_GAP};
pub use record::{ArmTick, Event, MetricLog, ReleaseCause, TickRecord};
pub use trajectory::{HandSample, Interpolation, Keyframe, Trajectory, TrajectoryError};
