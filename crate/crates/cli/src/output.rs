use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use tipfold_core::SystemConfig;

use crate::args::OutputArgs;
use crate::error::CliError;

/// Significant digits of numbers written to CSV.
const CSV_DIGITS: i32 = 10;

/// `v` with ten significant digits, in fixed notation for moderate magnitudes
/// and scientific notation otherwise. Non-finite values are written as-is.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (CSV_DIGITS - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // rounding can carry into a new digit; that still parses to the right value
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", (CSV_DIGITS - 1) as usize, v)
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub configs: Vec<SystemConfig>,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Collects the files a command writes and records them in its manifest.
pub struct Run {
    command: &'static str,
    dir: PathBuf,
    prefix: String,
    started: Instant,
    configs: Vec<SystemConfig>,
    outputs: Vec<PathBuf>,
}

impl Run {
    pub fn new(command: &'static str, out: &OutputArgs) -> Result<Self, CliError> {
        fs::create_dir_all(&out.out_dir)?;
        Ok(Run {
            command,
            dir: out.out_dir.clone(),
            prefix: out.prefix.clone().unwrap_or_else(|| command.to_string()),
            started: Instant::now(),
            configs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn add_config(&mut self, cfg: SystemConfig) {
        self.configs.push(cfg);
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.prefix))
    }

    /// Write a CSV file `<prefix><suffix>` with a header row.
    pub fn csv(&mut self, suffix: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let path = self.path(suffix);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    /// Write a pretty-printed JSON file `<prefix><suffix>`.
    pub fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(suffix);
        write_json(&path, value)?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    /// Write the resolved configuration to a caller-chosen path.
    pub fn config_file(&mut self, path: &Path, cfg: &SystemConfig) -> Result<(), CliError> {
        write_json(path, cfg)?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    /// Write `<prefix>.manifest.json` and return its path.
    pub fn finish(self) -> Result<PathBuf, CliError> {
        let path = self.path(".manifest.json");
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            configs: self.configs,
            outputs: self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        write_json(&path, &manifest)?;
        Ok(path)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
