use core::f64::consts::PI;

use crate::math::Vec3;

/// First-order low-pass filter on a 3-vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceFilter {
    pub cutoff_hz: f64,
    pub enabled: bool,
    state: Option<Vec3>,
}

impl ForceFilter {
    pub fn new(cutoff_hz: f64, enabled: bool) -> Self {
        ForceFilter { cutoff_hz, enabled, state: None }
    }

    pub fn alpha(&self, dt: f64) -> f64 {
        let rc = 1.0 / (2.0 * PI * self.cutoff_hz);
        dt / (dt + rc)
    }

    pub fn step(&mut self, input: Vec3, dt: f64) -> Vec3 {
        if !self.enabled {
            return input;
        }
        let prev = self.state.unwrap_or(Vec3::ZERO);
        let out = prev + (input - prev) * self.alpha(dt);
        self.state = Some(out);
        out
    }

    pub fn reset(&mut self) {
        self.state = None;
    }
}
