use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::{CliError, OutputFormat};

/// A command's result in both renderings.
pub struct Output {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: serde_json::Value,
}

impl Output {
    pub fn new<T: Serialize>(header: &[&str], rows: Vec<Vec<String>>, json: &T) -> Result<Self, CliError> {
        Ok(Output {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
            json: serde_json::to_value(json).map_err(strsub::Error::from)?,
        })
    }

    pub fn render(&self, format: OutputFormat) -> Result<Vec<u8>, CliError> {
        match format {
            OutputFormat::Json => {
                let mut out = serde_json::to_vec_pretty(&self.json).map_err(strsub::Error::from)?;
                out.push(b'\n');
                Ok(out)
            }
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.into_error()))
            }
        }
    }

    pub fn write(&self, format: OutputFormat, path: Option<&Path>) -> Result<(), CliError> {
        let bytes = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, bytes)?,
            None => std::io::stdout().lock().write_all(&bytes)?,
        }
        Ok(())
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
