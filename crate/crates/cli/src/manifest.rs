use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::io::write_atomic;
use crate::CliError;

#[derive(Debug, Serialize)]
struct ErrorRecord {
    class: &'static str,
    exit_code: i32,
    message: String,
}

/// Run record written next to the outputs of every command, also on failure.
#[derive(Debug, Serialize)]
pub struct Manifest {
    tool: &'static str,
    tool_version: &'static str,
    library_version: &'static str,
    command: String,
    config: Value,
    started_unix: u64,
    elapsed_secs: f64,
    timings: Vec<(String, f64)>,
    outputs: Vec<PathBuf>,
    details: serde_json::Map<String, Value>,
    status: &'static str,
    error: Option<ErrorRecord>,
    #[serde(skip)]
    clock: Option<Instant>,
    #[serde(skip)]
    lap: Option<Instant>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let now = Instant::now();
        Self {
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            library_version: msv_core::VERSION,
            command: command.to_string(),
            config: Value::Null,
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            elapsed_secs: 0.0,
            timings: Vec::new(),
            outputs: Vec::new(),
            details: Default::default(),
            status: "running",
            error: None,
            clock: Some(now),
            lap: Some(now),
        }
    }

    pub fn set_config<C: Serialize>(&mut self, config: &C) {
        self.config = serde_json::to_value(config).unwrap_or(Value::Null);
    }

    /// Records the time since the previous lap under `step`.
    pub fn lap(&mut self, step: &str) {
        let now = Instant::now();
        let since = self.lap.map(|l| now.duration_since(l).as_secs_f64()).unwrap_or(0.0);
        self.timings.push((step.to_string(), since));
        self.lap = Some(now);
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn detail<V: Serialize>(&mut self, key: &str, value: V) {
        self.details.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn finish(&mut self, outcome: &Result<(), CliError>) {
        self.elapsed_secs = self.clock.map(|c| c.elapsed().as_secs_f64()).unwrap_or(0.0);
        match outcome {
            Ok(()) => self.status = "ok",
            Err(e) => {
                self.status = "error";
                self.error = Some(ErrorRecord { class: e.class_name(), exit_code: e.exit_code(), message: e.to_string() });
            }
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_atomic(path, |w| serde_json::to_writer_pretty(w, self).map_err(|e| CliError::Io(e.to_string())))
    }
}
