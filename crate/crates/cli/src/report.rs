//! The JSON report every subcommand emits.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    /// Every input needed to rerun the command.
    pub config: Value,
    pub results: Value,
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub generated_unix: u64,
}

impl Report {
    pub fn new(command: &str, config: Value, results: Value) -> Self {
        let generated_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_owned(),
            config,
            results,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            generated_unix,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values serialize")
    }
}
