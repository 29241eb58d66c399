//! Deterministic CSV emission. Tables are rectangular, numbers are printed
//! in scientific notation with 12 significant digits and a '.' decimal
//! point, and the first line carries the schema tag as a comment, so a
//! reader can check it got the layout it expects.

use slab_transport::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    Number(f64),
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    schema: String,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(schema: &str, columns: &[&str]) -> CsvTable {
        CsvTable {
            schema: schema.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends one row; the width must match the header and every number
    /// must be finite (a NaN in a report is a bug upstream, not data).
    pub fn push_row(&mut self, cells: Vec<Cell>) -> Result<()> {
        if cells.len() != self.columns.len() {
            return Err(Error::InvalidArgument(format!(
                "row width {} does not match the {} columns of '{}'",
                cells.len(),
                self.columns.len(),
                self.schema
            )));
        }
        for cell in &cells {
            match cell {
                Cell::Number(v) if !v.is_finite() => {
                    return Err(Error::InvalidArgument(format!(
                        "non-finite value {v} in table '{}'",
                        self.schema
                    )));
                }
                Cell::Text(s) if s.contains([',', '\n', '\r']) => {
                    return Err(Error::InvalidArgument(format!(
                        "text cell '{s}' needs quoting, which this schema forbids"
                    )));
                }
                _ => {}
            }
        }
        self.rows.push(cells);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# schema: {}", self.schema).unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                match cell {
                    Cell::Text(s) => out.push_str(s),
                    Cell::Number(v) => write!(out, "{v:.11e}").unwrap(),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}
