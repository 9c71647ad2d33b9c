//! Self-describing run directories.
//!
//! Every run writes three kinds of files into `--out`:
//!   - `config.kv`: the fully resolved configuration (reloadable with
//!     `--config` to reproduce the run),
//!   - `metadata.json`: command, crate version, wall time and run
//!     diagnostics (the one file that is *not* byte-reproducible),
//!   - the data files (CSV/JSON) of the subcommand.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! identical results produce identical bytes.

use crate::config::ResolvedConfig;
use crate::CliError;
use serde_json::{json, Map, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct RunDir {
    dir: PathBuf,
    started: Instant,
    command: String,
    diagnostics: Map<String, Value>,
}

impl RunDir {
    pub fn create(dir: &Path, resolved: &ResolvedConfig, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        fs::write(dir.join("config.kv"), resolved.to_kv())
            .map_err(|e| CliError::Io(format!("writing config.kv: {e}")))?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            command: command.to_string(),
            diagnostics: Map::new(),
        })
    }

    /// Record a run diagnostic for metadata.json.
    pub fn note(&mut self, key: &str, value: Value) {
        self.diagnostics.insert(key.to_string(), value);
    }

    /// Write a CSV file with a header row; each row is preformatted.
    pub fn write_csv(
        &self,
        name: &str,
        header: &str,
        rows: impl IntoIterator<Item = String>,
    ) -> Result<(), CliError> {
        let mut file = fs::File::create(self.dir.join(name))
            .map_err(|e| CliError::Io(format!("creating {name}: {e}")))?;
        writeln!(file, "{header}").map_err(|e| CliError::Io(e.to_string()))?;
        for row in rows {
            writeln!(file, "{row}").map_err(|e| CliError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn write_json(&self, name: &str, value: &Value) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("serializing {name}: {e}")))?;
        fs::write(self.dir.join(name), text + "\n")
            .map_err(|e| CliError::Io(format!("writing {name}: {e}")))
    }

    /// Write metadata.json and finish the run.
    pub fn finalize(self, resolved: &ResolvedConfig) -> Result<(), CliError> {
        let config: Map<String, Value> =
            resolved.entries().iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let metadata = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_seconds": self.started.elapsed().as_secs_f64(),
            "config": config,
            "diagnostics": self.diagnostics,
        });
        self.write_json("metadata.json", &metadata)
    }
}

/// Shortest round-trip float formatting shared by all CSV writers.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
