//! CSV tables and the JSON run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Shortest round-trip scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Writes one CSV table with a header row.
pub fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::io(std::io::Error::other(e)))?;
    w.write_record(header).map_err(|e| CliError::io(std::io::Error::other(e)))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::io(std::io::Error::other(e)))?;
    }
    w.flush().map_err(CliError::io)
}

pub fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

/// Output directory plus the list of files written into it.
pub struct OutputDir {
    pub root: PathBuf,
    pub files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(CliError::io)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn csv<I>(&mut self, name: &str, header: &[String], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        write_csv(&self.root.join(name), header, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(std::io::Error::other(e)))?;
        text.push('\n');
        std::fs::write(self.root.join(name), text).map_err(CliError::io)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Run manifest. Everything except `created_unix` is a function of the
/// configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_path: String,
    pub config_hash: String,
    pub created_unix: u64,
    pub model: String,
    pub dimension: usize,
    pub diffusion: String,
    pub eta: f64,
    pub seed: u64,
    pub files: Vec<String>,
    /// One entry per viscosity, in schedule order.
    pub runs: Vec<Value>,
    pub summary: Value,
}

impl Manifest {
    pub fn new(command: &str, loaded: &crate::config::LoadedConfig, resolved: &crate::config::Resolved) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_path: loaded.source.display().to_string(),
            config_hash: loaded.hash.clone(),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            model: resolved.model.name.clone(),
            dimension: resolved.model.system.dimension,
            diffusion: resolved.diffusion.name.clone(),
            eta: resolved.diffusion.eta,
            seed: loaded.config.seed,
            files: Vec::new(),
            runs: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn write(mut self, out: &mut OutputDir) -> Result<PathBuf, CliError> {
        self.files = out.files.clone();
        out.json("manifest.json", &self)?;
        Ok(out.root.join("manifest.json"))
    }
}
