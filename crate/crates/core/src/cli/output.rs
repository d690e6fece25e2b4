//! CSV output with a `#`-prefixed provenance header that embeds the full
//! configuration.

use std::fmt;
use std::io::Write;

use super::config::Config;
use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const CONFIG_BEGIN: &str = "# ---- config ----";
const CONFIG_END: &str = "# ---- end config ----";

/// One data cell; never NaN or infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    /// The quantity is singular or undefined at this point.
    Degenerate,
    /// The column does not apply to this row (e.g. a quadrature angle for a
    /// non-homodyne scheme).
    NotApplicable,
}

impl Cell {
    pub fn num(x: f64) -> Self {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Degenerate
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x:e}"),
            Cell::Degenerate => f.write_str("degenerate"),
            Cell::NotApplicable => f.write_str("na"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All cells of a column, in row order.
    pub fn column_values(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Render `table` with its provenance header.
pub fn render(command: &str, config: &Config, extra: &[(&str, String)], table: &Table) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# diffest {VERSION}\n# command: {command}\n"));
    for (k, v) in extra {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(CONFIG_BEGIN);
    out.push('\n');
    for line in config.to_toml().lines() {
        out.push_str(&format!("# {line}\n").replace("# \n", "#\n"));
    }
    out.push_str(CONFIG_END);
    out.push('\n');

    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.to_string())).map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    Ok(out)
}

/// Recover the configuration embedded in an output file's header.
pub fn read_header_config(text: &str) -> Result<Config> {
    let mut inside = false;
    let mut toml = String::new();
    for line in text.lines() {
        if line == CONFIG_BEGIN {
            inside = true;
        } else if line == CONFIG_END {
            return Config::from_toml(&toml);
        } else if inside {
            let body = line
                .strip_prefix('#')
                .ok_or_else(|| Error::Config("config header line without '#'".into()))?;
            toml.push_str(body.strip_prefix(' ').unwrap_or(body));
            toml.push('\n');
        }
    }
    Err(Error::Config("no embedded config found".into()))
}

/// Parse the data section (everything after the header) back into a table.
pub fn read_table(text: &str) -> Result<Table> {
    let data: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(data.as_bytes());
    let bad = |e: csv::Error| Error::Io(e.to_string());
    let columns = r.headers().map_err(bad)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(bad)?;
        let row = rec
            .iter()
            .map(|s| match s {
                "degenerate" => Ok(Cell::Degenerate),
                "na" => Ok(Cell::NotApplicable),
                x => x
                    .parse()
                    .map(Cell::Num)
                    .map_err(|_| Error::Io(format!("bad cell {x:?}"))),
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

/// Write to `path`, or stdout when `path` is `None` or `-`.
pub fn write_output(path: Option<&std::path::Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, text)?,
        _ => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
