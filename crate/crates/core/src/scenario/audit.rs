//! Update-rate contract checks over a metric log.

use alloc::vec::Vec;

use crate::devices::{ARM_MAX_INTERVAL_US, CONTROL_TICK_US, GLOVE_MIN_INTERVAL_US};

use super::record::TickRecord;

#[derive(Clone, Debug, PartialEq)]
pub struct RateAudit {
    pub ticks: u64,
    /// Every consecutive pair of records is exactly one control tick apart.
    pub control_tick_exact: bool,
    pub min_glove_interval_us: Option<u64>,
    /// Longest gap between targets per arm, including from the start of the run.
    pub max_arm_interval_us: Vec<u64>,
}

impl RateAudit {
    pub fn glove_ok(&self) -> bool {
        self.min_glove_interval_us.map_or(true, |v| v >= GLOVE_MIN_INTERVAL_US)
    }

    pub fn arms_ok(&self) -> bool {
        self.max_arm_interval_us.iter().all(|v| *v <= ARM_MAX_INTERVAL_US)
    }

    pub fn passed(&self) -> bool {
        self.control_tick_exact && self.glove_ok() && self.arms_ok()
    }
}

/// Streaming form of [`audit_rates`].
#[derive(Clone, Debug, Default)]
pub struct RateAuditor {
    ticks: u64,
    exact: bool,
    last_t: Option<u64>,
    last_glove: Option<u64>,
    min_glove: Option<u64>,
    last_arm: Vec<u64>,
    max_arm: Vec<u64>,
}

impl RateAuditor {
    pub fn new() -> Self {
        RateAuditor { exact: true, ..Default::default() }
    }

    pub fn push(&mut self, r: &TickRecord) {
        self.ticks += 1;
        match self.last_t {
            Some(prev) => self.exact &= r.t_us == prev + CONTROL_TICK_US,
            None => self.exact &= r.t_us == 0,
        }
        self.last_t = Some(r.t_us);
        if r.glove_issued {
            if let Some(prev) = self.last_glove {
                let d = r.t_us - prev;
                self.min_glove = Some(self.min_glove.map_or(d, |m| m.min(d)));
            }
            self.last_glove = Some(r.t_us);
        }
        if self.last_arm.len() < r.arms.len() {
            self.last_arm.resize(r.arms.len(), 0);
            self.max_arm.resize(r.arms.len(), 0);
        }
        for (i, a) in r.arms.iter().enumerate() {
            // An open gap at the end of the log counts as well.
            self.max_arm[i] = self.max_arm[i].max(r.t_us - self.last_arm[i]);
            if a.target_issued {
                self.last_arm[i] = r.t_us;
            }
        }
    }

    pub fn finish(self) -> RateAudit {
        RateAudit {
            ticks: self.ticks,
            control_tick_exact: self.exact,
            min_glove_interval_us: self.min_glove,
            max_arm_interval_us: self.max_arm,
        }
    }
}

pub fn audit_rates(records: &[TickRecord]) -> RateAudit {
    let mut a = RateAuditor::new();
    for r in records {
        a.push(r);
    }
    a.finish()
}
