//! Deterministic file output: CSV tables and `report.json`, each stamped
//! with the tool version and the fully resolved configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const TOOL: &str = "fucik";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Output {
    dir: PathBuf,
    /// Single-line JSON of the resolved configuration.
    config_json: String,
    command: String,
    written: Vec<PathBuf>,
}

/// Full-precision cell: 17 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Output {
    pub fn new<C: Serialize>(dir: &Path, command: &str, config: &C) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config_json: serde_json::to_string(config).map_err(|e| CliError::Io(e.to_string()))?,
            command: command.to_string(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    /// Writes a CSV table preceded by `#` header lines.
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut s = String::new();
        writeln!(s, "# {TOOL} {VERSION} {}", self.command).unwrap();
        writeln!(s, "# config: {}", self.config_json).unwrap();
        writeln!(s, "{}", columns.join(",")).unwrap();
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            writeln!(s, "{}", row.join(",")).unwrap();
        }
        self.write(name, &s)
    }

    pub fn report<R: Serialize>(&mut self, result: &R) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Envelope<'a, R> {
            tool: &'a str,
            version: &'a str,
            command: &'a str,
            config: serde_json::Value,
            result: &'a R,
        }
        let env = Envelope {
            tool: TOOL,
            version: VERSION,
            command: &self.command,
            config: serde_json::from_str(&self.config_json).expect("config JSON round-trips"),
            result,
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write("report.json", &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
