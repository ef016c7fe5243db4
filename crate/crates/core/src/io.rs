//! Snapshot CSV and JSON report writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::grid::Field;
use crate::harness::SCHEMA;

/// Writes `x[,y],value` rows in storage order, 17 significant digits.
pub fn write_field_csv(field: &Field, mut out: impl Write) -> Result<()> {
    let grid = field.grid();
    let dim = grid.dim();
    out.write_all(if dim == 2 { b"x,y,value\n" } else { b"x,value\n" })?;
    for (i, v) in field.values().iter().enumerate() {
        let c = grid.center(i);
        if dim == 2 {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", c[0], c[1], v)?;
        } else {
            writeln!(out, "{:.16e},{:.16e}", c[0], v)?;
        }
    }
    Ok(())
}

pub fn save_field_csv(field: &Field, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_csv(field, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_field_csv`] back into values, in order.
pub fn read_csv_values(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let last = l.rsplit(',').next().unwrap_or_default();
            last.trim().parse::<f64>().map_err(|e| crate::Error::Data(format!("bad CSV value '{last}': {e}")))
        })
        .collect()
}

/// Report document: `{"schema": ..., "kind": ..., "report": ..., "metadata": ...}`.
/// Anything run-dependent (timestamps, thread counts) belongs in `metadata`.
#[derive(Debug, Serialize)]
pub struct Document<'a, T: Serialize> {
    pub schema: &'static str,
    pub kind: &'a str,
    pub report: &'a T,
    pub metadata: serde_json::Value,
}

impl<'a, T: Serialize> Document<'a, T> {
    pub fn new(kind: &'a str, report: &'a T, metadata: serde_json::Value) -> Self {
        Self { schema: SCHEMA, kind, report, metadata }
    }
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
