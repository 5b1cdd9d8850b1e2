//! Two-column data export from a CSV table.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LabError, Result};
use crate::table::{format_float, Table};

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub x: String,
    pub y: String,
    pub log_x: bool,
}

/// Rows whose cells are not numeric are skipped; so are nonpositive x
/// values under `log_x`.
pub fn render(table: &Table, source: &str, opts: &PlotOptions) -> Result<String> {
    let col = |name: &str| {
        table.column(name).ok_or_else(|| {
            LabError::input(source, format!("unknown column {name:?}; columns are {}", table.columns.join(", ")))
        })
    };
    let (xi, yi) = (col(&opts.x)?, col(&opts.y)?);
    let mut out = String::new();
    let xlabel = if opts.log_x { format!("log({})", opts.x) } else { opts.x.clone() };
    writeln!(out, "# {xlabel} {}", opts.y).unwrap();
    for row in &table.rows {
        let (Some(mut x), Some(y)) = (row[xi].as_f64(), row[yi].as_f64()) else { continue };
        if opts.log_x {
            if !(x > 0.0) {
                continue;
            }
            x = x.ln();
        }
        writeln!(out, "{} {}", format_float(x), format_float(y)).unwrap();
    }
    Ok(out)
}

pub fn plot(csv: &Path, out: &Path, opts: &PlotOptions) -> Result<()> {
    let table = Table::read(csv)?;
    let text = render(&table, &csv.display().to_string(), opts)?;
    std::fs::write(out, text).map_err(|e| LabError::io(out, e))
}
