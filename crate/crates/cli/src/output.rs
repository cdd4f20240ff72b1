//! Rows of named cells written as CSV or JSON.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use casimir_core::{Diagnostics, MirrorSpec};
use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::CliResult;

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.10e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

/// Ordered `(column, cell)` pairs.
#[derive(Debug, Clone, Default)]
pub struct Row(pub Vec<(&'static str, Cell)>);

impl Row {
    pub fn num(mut self, key: &'static str, v: f64) -> Self {
        self.0.push((key, Cell::Num(v)));
        self
    }

    pub fn int(mut self, key: &'static str, v: usize) -> Self {
        self.0.push((key, Cell::Int(v)));
        self
    }

    pub fn text(mut self, key: &'static str, v: impl Into<String>) -> Self {
        self.0.push((key, Cell::Text(v.into())));
        self
    }

    /// The trailing `value, unit, lmax, nmax, nk, est_rel_err` columns.
    pub fn result(self, value: f64, unit: &str, d: &Diagnostics) -> Self {
        self.num("value", value)
            .text("unit", unit)
            .int("lmax", d.lmax)
            .int("nmax", d.nmax)
            .int("nk", d.nk)
            .num("est_rel_err", d.est_rel_err)
    }

    pub fn to_json(&self) -> Value {
        let map: Map<String, Value> = self.0.iter().map(|(k, c)| (k.to_string(), c.json())).collect();
        Value::Object(map)
    }
}

/// Compact, reproducible description of a mirror.
pub fn material_label(spec: &MirrorSpec) -> String {
    match spec {
        MirrorSpec::Perfect => "perfect".into(),
        MirrorSpec::Plasma { .. } => format!("plasma(lambda_P={:.6e}m)", spec.lambda_p().unwrap()),
        MirrorSpec::Drude { .. } => format!(
            "drude(lambda_P={:.6e}m,lambda_gamma={:.6e}m)",
            spec.lambda_p().unwrap(),
            spec.lambda_gamma().unwrap()
        ),
    }
}

pub fn open(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_csv(out: &mut dyn Write, rows: &[Row]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        w.write_record(first.0.iter().map(|(k, _)| *k))?;
    }
    for row in rows {
        w.write_record(row.0.iter().map(|(_, c)| c.csv()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(out: &mut dyn Write, value: &Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Write `rows`; a single-point JSON result is an object, otherwise an array.
pub fn emit(rows: &[Row], format: Format, path: Option<&Path>, single: bool) -> CliResult<()> {
    let mut out = open(path)?;
    match format {
        Format::Csv => write_csv(&mut out, rows)?,
        Format::Json => {
            let value = if single && rows.len() == 1 {
                rows[0].to_json()
            } else {
                Value::Array(rows.iter().map(Row::to_json).collect())
            };
            write_json(&mut out, &value)?;
        }
    }
    out.flush()?;
    Ok(())
}
