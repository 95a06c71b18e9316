//! Lift windows for the weight oracle.
//!
//! ```toml
//! [[window]]
//! can = 0
//! start = 1.2
//! end = 1.7
//! ```

use std::fs;
use std::path::Path;

use dockhap_core::scenario::LiftWindow;
use serde::Deserialize;

use crate::config::LoadError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowsFile {
    window: Vec<WindowDto>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowDto {
    can: usize,
    start: f64,
    end: f64,
}

pub fn parse_windows(text: &str, origin: &str) -> Result<Vec<LiftWindow>, LoadError> {
    let de = toml::Deserializer::parse(text).map_err(|e| LoadError::Parse { path: origin.into(), message: e.to_string() })?;
    let file: WindowsFile = serde_path_to_error::deserialize(de).map_err(|e| LoadError::Parse {
        path: format!("{origin}: {}", e.path()),
        message: e.into_inner().message().to_string(),
    })?;
    let mut out = Vec::new();
    for (i, w) in file.window.into_iter().enumerate() {
        if !(w.start >= 0.0 && w.end > w.start && w.end.is_finite()) {
            return Err(LoadError::Parse {
                path: format!("{origin}: window[{i}]"),
                message: "need 0 <= start < end".into(),
            });
        }
        out.push(LiftWindow { can: w.can, start: w.start, end: w.end });
    }
    Ok(out)
}

pub fn load_windows(path: &Path) -> Result<Vec<LiftWindow>, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    parse_windows(&text, &path.display().to_string())
}
