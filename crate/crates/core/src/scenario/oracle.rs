//! Force-discrimination oracle standing in for a participant sorting weights.

use alloc::vec::Vec;

use thiserror::Error;

use super::record::MetricLog;

/// Mean rendered force below this is treated as no signal, N.
pub const NOISE_FLOOR: f64 = 1e-3;
/// Relative gaps below this are reported as ties.
pub const TIE_GAP: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftWindow {
    pub can: usize,
    /// s
    pub start: f64,
    /// s
    pub end: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// Cans ordered from lightest to heaviest.
    Ordered { order: Vec<usize>, confidence: f64 },
    /// Some cans cannot be separated; `groups` lists them lightest first.
    Tie { groups: Vec<Vec<usize>>, confidence: f64 },
    Indistinguishable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    /// Mean rendered force magnitude per can, N, indexed by can.
    pub mean_force: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum OracleError {
    #[error("no lift windows given")]
    NoWindows,
    #[error("window for can {can} contains no log records")]
    EmptyWindow { can: usize },
    #[error("can {can} has more than one window")]
    DuplicateCan { can: usize },
    #[error("cans must be numbered 0..n without gaps; missing {can}")]
    MissingCan { can: usize },
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi <= 0.0 {
        0.0
    } else {
        (a - b).abs() / hi
    }
}

/// Ranks cans by the mean magnitude of the total rendered arm force inside
/// their lift windows.
pub fn weight_oracle(log: &MetricLog, windows: &[LiftWindow]) -> Result<OracleReport, OracleError> {
    if windows.is_empty() {
        return Err(OracleError::NoWindows);
    }
    let n = windows.len();
    let mut mean_force = alloc::vec![f64::NAN; n];
    for w in windows {
        if w.can >= n {
            return Err(OracleError::MissingCan { can: (0..n).find(|c| !windows.iter().any(|w| w.can == *c)).unwrap_or(0) });
        }
        if !mean_force[w.can].is_nan() {
            return Err(OracleError::DuplicateCan { can: w.can });
        }
        let (lo, hi) = ((w.start * 1e6) as u64, (w.end * 1e6) as u64);
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in log.records.iter().filter(|r| r.t_us >= lo && r.t_us < hi) {
            sum += r.total_rendered().norm();
            count += 1;
        }
        if count == 0 {
            return Err(OracleError::EmptyWindow { can: w.can });
        }
        mean_force[w.can] = sum / count as f64;
    }

    if mean_force.iter().all(|f| *f < NOISE_FLOOR) {
        return Ok(OracleReport { mean_force, verdict: Verdict::Indistinguishable });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| mean_force[*a].total_cmp(&mean_force[*b]).then(a.cmp(b)));
    let mut confidence = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            confidence = confidence.min(relative_gap(mean_force[i], mean_force[j]));
        }
    }
    if n == 1 {
        confidence = 1.0;
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &c in &order {
        match groups.last_mut() {
            Some(g) if relative_gap(mean_force[*g.last().unwrap()], mean_force[c]) < TIE_GAP => g.push(c),
            _ => groups.push(alloc::vec![c]),
        }
    }
    let verdict = if groups.len() < n {
        Verdict::Tie { groups, confidence }
    } else {
        Verdict::Ordered { order, confidence }
    };
    Ok(OracleReport { mean_force, verdict })
}
