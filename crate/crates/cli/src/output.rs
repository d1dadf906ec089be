use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Seventeen significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Where a command's data goes: a named file, or standard output.
pub fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub struct CsvOut {
    w: csv::Writer<Box<dyn Write>>,
}

impl CsvOut {
    pub fn new(path: Option<&Path>, header: &[&str]) -> Result<Self, CliError> {
        let mut w = csv::Writer::from_writer(open_out(path)?);
        w.write_record(header).map_err(csv_err)?;
        Ok(Self { w })
    }

    pub fn row<I, S>(&mut self, cells: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(cells).map_err(csv_err)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w.flush().map_err(|e| CliError::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open_out(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    /// SHA-256 over the bytes of every input file, in argument order.
    pub config_hash: Option<String>,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp_unix: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new() -> Self {
        Self {
            command_line: std::env::args().collect(),
            config_hash: None,
            inputs: Vec::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            outputs: Vec::new(),
        }
    }

    /// Reads an input file, folding its bytes into the hash.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.inputs.push(path.display().to_string());
        let mut hasher = Sha256::new();
        if let Some(prev) = &self.config_hash {
            hasher.update(prev.as_bytes());
        }
        hasher.update(&bytes);
        self.config_hash = Some(hex::encode(hasher.finalize()));
        Ok(bytes)
    }

    pub fn output(&mut self, path: Option<&PathBuf>) {
        self.outputs
            .push(path.map_or_else(|| "<stdout>".to_string(), |p| p.display().to_string()));
    }

    /// Writes to `path`, or to standard error as one JSON line.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) => write_json(Some(p), self),
            None => {
                let line = serde_json::to_string(self).map_err(|e| CliError::Io(e.to_string()))?;
                eprintln!("manifest: {line}");
                Ok(())
            }
        }
    }
}
