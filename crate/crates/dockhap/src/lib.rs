//! File formats, scenario loading and reports around `dockhap-core`.

pub mod config;
pub mod log;
pub mod report;
pub mod windows;

pub use config::{load_scenario, parse_scenario, Expectations, LoadError, LoadedScenario};
pub use log::{log_bytes, read_log, LogHeader, LogWriter};
pub use windows::{load_windows, parse_windows};
