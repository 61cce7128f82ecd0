//! Optional key=value configuration files. Flags always win over file
//! values; file values win over built-in defaults.
//!
//! Format: one `key = value` per line, `#` starts a comment, blank lines
//! ignored. Keys use the long flag names (e.g. `rel-tol`).

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use crate::app::CliError;

#[derive(Debug, Default, Clone)]
pub struct Config {
    entries: HashMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("config file {}: {e}", path.display())))?;
        let mut entries = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config file {} line {}: expected `key = value`, found {raw:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    /// Resolve one option: explicit flag, else config entry, else default.
    pub fn resolve<T: FromStr + Copy>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.entries.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| {
                CliError::Usage(format!("config entry `{key}` has unparsable value {s:?}"))
            }),
        }
    }
}
