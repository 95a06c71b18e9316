//! Newline-delimited JSON metric logs.
//!
//! The first line is a header, every following line one control tick.

use std::io::{self, BufRead, Write};

use dockhap_core::devices::FINGERS;
use dockhap_core::docking::DockState;
use dockhap_core::math::Vec3;
use dockhap_core::scenario::{ArmTick, Event, MetricLog, ReleaseCause, ScenarioConfig, TickRecord};
use serde::{Deserialize, Serialize};

pub const LOG_FORMAT: &str = "dockhap-log";
pub const LOG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format: String,
    pub version: u32,
    pub scenario: String,
    pub condition: String,
    pub mode: String,
    pub arms: usize,
    pub cans: usize,
    pub tick_us: u64,
    pub seed: u64,
}

impl LogHeader {
    pub fn for_config(cfg: &ScenarioConfig) -> Self {
        LogHeader {
            format: LOG_FORMAT.into(),
            version: LOG_VERSION,
            scenario: cfg.name.clone(),
            condition: cfg.condition.name().into(),
            mode: cfg.docking.mode.name().into(),
            arms: cfg.arms.len(),
            cans: cfg.scene.cans.len(),
            tick_us: cfg.timing.tick_us,
            seed: cfg.seed,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum EventDto {
    Transition { arm: usize, from: String, to: String },
    IllegalTransition { arm: usize, from: String, to: String },
    MagnetCommand { arm: usize, on: bool },
    Attach { arm: usize },
    Release { arm: usize, cause: String },
    TargetClamped { arm: usize },
    Slip { arm: usize },
}

#[derive(Serialize, Deserialize)]
struct ArmDto {
    state: String,
    effector: [f64; 3],
    tool: [f64; 3],
    target_distance: f64,
    commanded_force: [f64; 3],
    rendered_force: [f64; 3],
    rendered_world: [f64; 3],
    transmitted_force: [f64; 3],
    joint_axial: f64,
    magnet: bool,
    target_issued: bool,
}

#[derive(Serialize, Deserialize)]
struct RecordDto {
    tick: u64,
    t_us: u64,
    arms: Vec<ArmDto>,
    hand_position: [f64; 3],
    intended_flex: [f64; FINGERS],
    applied_flex: [f64; FINGERS],
    glove_issued: bool,
    glove_stops: [f64; FINGERS],
    glove_torques: [f64; FINGERS],
    net_hand_force: [f64; 3],
    can_support: Vec<f64>,
    impulse_count: usize,
    events: Vec<EventDto>,
}

fn state_from(s: &str) -> Option<DockState> {
    [DockState::Free, DockState::Intercepting, DockState::Docked, DockState::Releasing].into_iter().find(|d| d.name() == s)
}

fn cause_from(s: &str) -> Option<ReleaseCause> {
    [ReleaseCause::Breaking, ReleaseCause::Peel, ReleaseCause::Workspace].into_iter().find(|c| c.name() == s)
}

fn event_dto(e: &Event) -> EventDto {
    match *e {
        Event::Transition { arm, from, to } => EventDto::Transition { arm, from: from.name().into(), to: to.name().into() },
        Event::IllegalTransition { arm, from, to } => {
            EventDto::IllegalTransition { arm, from: from.name().into(), to: to.name().into() }
        }
        Event::MagnetCommand { arm, on } => EventDto::MagnetCommand { arm, on },
        Event::Attach { arm } => EventDto::Attach { arm },
        Event::Release { arm, cause } => EventDto::Release { arm, cause: cause.name().into() },
        Event::TargetClamped { arm } => EventDto::TargetClamped { arm },
        Event::Slip { arm } => EventDto::Slip { arm },
    }
}

fn event_from(d: EventDto) -> Result<Event, String> {
    let st = |s: &str| state_from(s).ok_or_else(|| format!("unknown dock state {s:?}"));
    Ok(match d {
        EventDto::Transition { arm, from, to } => Event::Transition { arm, from: st(&from)?, to: st(&to)? },
        EventDto::IllegalTransition { arm, from, to } => Event::IllegalTransition { arm, from: st(&from)?, to: st(&to)? },
        EventDto::MagnetCommand { arm, on } => Event::MagnetCommand { arm, on },
        EventDto::Attach { arm } => Event::Attach { arm },
        EventDto::Release { arm, cause } => {
            Event::Release { arm, cause: cause_from(&cause).ok_or_else(|| format!("unknown release cause {cause:?}"))? }
        }
        EventDto::TargetClamped { arm } => Event::TargetClamped { arm },
        EventDto::Slip { arm } => Event::Slip { arm },
    })
}

fn record_dto(r: &TickRecord) -> RecordDto {
    RecordDto {
        tick: r.tick,
        t_us: r.t_us,
        arms: r
            .arms
            .iter()
            .map(|a| ArmDto {
                state: a.state.name().into(),
                effector: a.effector.to_array(),
                tool: a.tool.to_array(),
                target_distance: a.target_distance,
                commanded_force: a.commanded_force.to_array(),
                rendered_force: a.rendered_force.to_array(),
                rendered_world: a.rendered_world.to_array(),
                transmitted_force: a.transmitted_force.to_array(),
                joint_axial: a.joint_axial,
                magnet: a.magnet,
                target_issued: a.target_issued,
            })
            .collect(),
        hand_position: r.hand_position.to_array(),
        intended_flex: r.intended_flex,
        applied_flex: r.applied_flex,
        glove_issued: r.glove_issued,
        glove_stops: r.glove_stops,
        glove_torques: r.glove_torques,
        net_hand_force: r.net_hand_force.to_array(),
        can_support: r.can_support.clone(),
        impulse_count: r.impulse_count,
        events: r.events.iter().map(event_dto).collect(),
    }
}

fn record_from(d: RecordDto) -> Result<TickRecord, String> {
    let v = Vec3::from_array;
    let arms = d
        .arms
        .into_iter()
        .map(|a| {
            Ok(ArmTick {
                state: state_from(&a.state).ok_or_else(|| format!("unknown dock state {:?}", a.state))?,
                effector: v(a.effector),
                tool: v(a.tool),
                target_distance: a.target_distance,
                commanded_force: v(a.commanded_force),
                rendered_force: v(a.rendered_force),
                rendered_world: v(a.rendered_world),
                transmitted_force: v(a.transmitted_force),
                joint_axial: a.joint_axial,
                magnet: a.magnet,
                target_issued: a.target_issued,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(TickRecord {
        tick: d.tick,
        t_us: d.t_us,
        arms,
        hand_position: v(d.hand_position),
        intended_flex: d.intended_flex,
        applied_flex: d.applied_flex,
        glove_issued: d.glove_issued,
        glove_stops: d.glove_stops,
        glove_torques: d.glove_torques,
        net_hand_force: v(d.net_hand_force),
        can_support: d.can_support,
        impulse_count: d.impulse_count,
        events: d.events.into_iter().map(event_from).collect::<Result<_, _>>()?,
    })
}

/// Streams records to a writer as they are produced.
pub struct LogWriter<W: Write> {
    out: W,
}

impl<W: Write> LogWriter<W> {
    pub fn new(mut out: W, header: &LogHeader) -> io::Result<Self> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(LogWriter { out })
    }

    pub fn write(&mut self, r: &TickRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, &record_dto(r))?;
        self.out.write_all(b"\n")
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn read_log<R: BufRead>(input: R) -> Result<(LogHeader, MetricLog), LogError> {
    let mut lines = input.lines();
    let first = lines.next().ok_or(LogError::Format { line: 1, message: "empty log".into() })??;
    let header: LogHeader = serde_json::from_str(&first).map_err(|source| LogError::Json { line: 1, source })?;
    if header.format != LOG_FORMAT || header.version != LOG_VERSION {
        return Err(LogError::Format {
            line: 1,
            message: format!("expected {LOG_FORMAT} version {LOG_VERSION}, found {} version {}", header.format, header.version),
        });
    }
    let mut log = MetricLog::default();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 2;
        let dto: RecordDto = serde_json::from_str(&line).map_err(|source| LogError::Json { line: n, source })?;
        log.records.push(record_from(dto).map_err(|message| LogError::Format { line: n, message })?);
    }
    Ok((header, log))
}

/// Serializes a whole log to bytes.
pub fn log_bytes(cfg: &ScenarioConfig, log: &MetricLog) -> Vec<u8> {
    let mut w = LogWriter::new(Vec::new(), &LogHeader::for_config(cfg)).expect("writing to memory");
    for r in &log.records {
        w.write(r).expect("writing to memory");
    }
    w.finish().expect("writing to memory")
}
