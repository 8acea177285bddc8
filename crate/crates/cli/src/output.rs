//! CSV emission with a commented header block. Everything below the
//! header is deterministic for a fixed configuration and seed; the
//! timestamp line is the only run-dependent content.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::{Context, Result};

use crate::config::ResolvedConfig;

pub struct CsvOut {
    writer: Box<dyn Write>,
}

impl CsvOut {
    pub fn open(command: &str, cfg: &ResolvedConfig, columns: &[&str]) -> Result<Self> {
        let writer: Box<dyn Write> = match &cfg.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(io::stdout().lock()),
        };
        let mut out = Self { writer };
        writeln!(out.writer, "# hadoa v{}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out.writer, "# generated: {}", chrono::Utc::now().to_rfc3339())?;
        writeln!(out.writer, "# command: {command}")?;
        writeln!(out.writer, "# config: {cfg}")?;
        writeln!(out.writer, "{}", columns.join(","))?;
        Ok(out)
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        writeln!(self.writer, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Axis column value; empty when the run has no sweep.
pub fn axis_field(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}
