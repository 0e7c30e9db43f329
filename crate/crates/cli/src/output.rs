use std::fmt;
use std::io::{self, Write};

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Rows and columns shared by the CSV and table renderings.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e16)`.
pub fn real(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

pub struct Report {
    pub json: Value,
    pub table: Table,
    pub default_format: Format,
}

impl Report {
    pub fn json(json: Value, table: Table) -> Self {
        Self {
            json,
            table,
            default_format: Format::Json,
        }
    }

    pub fn csv(json: Value, table: Table) -> Self {
        Self {
            json,
            table,
            default_format: Format::Csv,
        }
    }
}

#[derive(Debug)]
pub struct OutputError(pub String);

impl fmt::Display for OutputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<io::Error> for OutputError {
    fn from(e: io::Error) -> Self {
        Self(e.to_string())
    }
}

pub fn emit(report: &Report, format: Format, out: &mut impl Write) -> Result<(), OutputError> {
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&report.json).map_err(|e| OutputError(e.to_string()))?;
            writeln!(out, "{text}")?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let write =
                |w: &mut csv::Writer<_>, r: &[String]| w.write_record(r).map_err(|e| OutputError(e.to_string()));
            write(&mut w, &report.table.headers)?;
            for row in &report.table.rows {
                write(&mut w, row)?;
            }
            w.flush()?;
        }
        Format::Table => write_aligned(&report.table, out)?,
    }
    Ok(())
}

fn write_aligned(table: &Table, out: &mut impl Write) -> io::Result<()> {
    let columns = table.headers.len();
    let mut widths: Vec<usize> = table.headers.iter().map(|h| h.chars().count()).collect();
    for row in &table.rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    writeln!(out, "{}", line(&table.headers))?;
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    writeln!(out, "{}", rule.join("  "))?;
    for row in &table.rows {
        writeln!(out, "{}", line(&row[..columns.min(row.len())]))?;
    }
    Ok(())
}
