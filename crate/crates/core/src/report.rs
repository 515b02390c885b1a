//! CSV rendering with a `#`-prefixed parameter echo.

use crate::config::SimConfig;
use crate::error::{Error, Result};

/// One CSV table: fixed header, then rows of preformatted cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    /// Appends another table's rows; headers must match.
    pub fn extend(&mut self, other: Table) {
        assert_eq!(self.columns, other.columns);
        self.rows.extend(other.rows);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

/// Formats a rate or ratio with a fixed number of significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn fixed(x: f64) -> String {
    format!("{x:.4}")
}

/// Full CSV document: echo of the subcommand, extra header lines and every
/// configuration key, then the table.
pub fn render(subcommand: &str, cfg: &SimConfig, extra: &[(String, String)], table: &Table) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# subcommand = {subcommand}\n"));
    for (k, v) in extra {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    for (k, v) in cfg.entries() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invariant(format!("csv encoding failed: {e}"));
    w.write_record(&table.columns).map_err(io)?;
    for r in &table.rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invariant(format!("csv flush failed: {e}")))?;
    out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))?);
    Ok(out)
}
