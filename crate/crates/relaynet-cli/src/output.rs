//! Output files: a `#` manifest header followed by CSV rows or a JSON report.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde_json::Value;

/// Run metadata written as comment lines ahead of every output.
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub version: &'static str,
    pub started: Instant,
}

impl RunManifest {
    pub fn new(command: String, config: Value, seed: u64) -> Self {
        Self { command, config, seed, version: env!("CARGO_PKG_VERSION"), started: Instant::now() }
    }

    fn write_header(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# config: {}", self.config)?;
        writeln!(out, "# seed: {}", self.seed)?;
        writeln!(out, "# version: relaynet {}", self.version)?;
        writeln!(out, "# wall_time_s: {:.3}", self.started.elapsed().as_secs_f64())
    }
}

/// Result body of a subcommand.
pub enum Report {
    Csv { header: Vec<&'static str>, rows: Vec<Vec<String>> },
    Json(Value),
}

/// Formats a float with the shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Empty cell for absent values.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn open(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the manifest and report to `out`, or to stdout when absent.
pub fn emit(manifest: &RunManifest, report: &Report, out: Option<&Path>) -> io::Result<()> {
    let mut w = open(out)?;
    manifest.write_header(&mut w)?;
    match report {
        Report::Csv { header, rows } => {
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(header)?;
            for r in rows {
                csv.write_record(r)?;
            }
            csv.flush()?;
        }
        Report::Json(v) => {
            serde_json::to_writer_pretty(&mut w, v)?;
            writeln!(w)?;
        }
    }
    w.flush()
}
