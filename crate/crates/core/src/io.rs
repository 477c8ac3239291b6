//! CSV and JSON export, and readers for user-supplied CSV files.
//!
//! Floats are written with 17 significant digits so that every value
//! round-trips exactly.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{ErrorSeries, FieldPair, Grid, RunConfig};
use crate::profile::Profile;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("i/o error: {e}"))
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_f64(*x))).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// `xi,u,v,eta`, one row per sample.
pub fn write_profile_csv<W: Write>(out: W, profile: &Profile) -> Result<()> {
    write_rows(
        out,
        &["xi", "u", "v", "eta"],
        (0..profile.len()).map(|i| vec![profile.xi[i], profile.u[i], profile.v[i], profile.eta[i]]),
    )
}

/// `x,eta,u` for one snapshot.
pub fn write_snapshot_csv<W: Write>(out: W, grid: &Grid, state: &FieldPair) -> Result<()> {
    write_rows(
        out,
        &["x", "eta", "u"],
        (0..grid.n).map(|i| vec![grid.x(i), state.eta[i], state.u[i]]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub system: String,
    pub delta: f64,
    pub epsilon: f64,
    pub dx: f64,
    pub dt: f64,
    pub t: f64,
}

impl SnapshotManifest {
    pub fn new(config: &RunConfig, t: f64) -> Self {
        let (delta, epsilon) = config.effective_coefficients();
        SnapshotManifest {
            system: config.system.name().to_string(),
            delta,
            epsilon,
            dx: config.grid.dx,
            dt: config.dt,
            t,
        }
    }
}

/// `t,y`.
pub fn write_error_series_csv<W: Write>(out: W, series: &ErrorSeries) -> Result<()> {
    write_rows(
        out,
        &["t", "y"],
        series.times.iter().zip(&series.y).map(|(t, y)| vec![*t, *y]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedAmplitudeRow {
    pub c: f64,
    pub eta_tail: f64,
    pub eta_solitary: f64,
    pub eta_t1994_inverse: f64,
}

pub fn write_speed_amplitude_csv<W: Write>(out: W, rows: &[SpeedAmplitudeRow]) -> Result<()> {
    write_rows(
        out,
        &["c", "eta_tail", "eta_solitary", "eta_T1994_inverse"],
        rows.iter()
            .map(|r| vec![r.c, r.eta_tail, r.eta_solitary, r.eta_t1994_inverse]),
    )
}

/// Numeric CSV with a header row. Lines starting with `#` are returned
/// separately as `key = value` metadata. Errors name the 1-based line.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub meta: Vec<(String, String)>,
    /// Source line of every row.
    pub lines: Vec<usize>,
}

impl NumericTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_numeric_csv<R: BufRead>(input: R, source: &str) -> Result<NumericTable> {
    let bad = |line: usize, msg: String| Error::InvalidParameter(format!("{source}:{line}: {msg}"));
    let mut header: Option<Vec<String>> = None;
    let mut table = NumericTable {
        header: Vec::new(),
        rows: Vec::new(),
        meta: Vec::new(),
        lines: Vec::new(),
    };
    for (k, line) in input.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| bad(lineno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = rest.split_once('=') {
                table.meta.push((key.trim().to_string(), value.trim().to_string()));
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        match &header {
            None => {
                if fields.iter().any(|f| f.is_empty()) {
                    return Err(bad(lineno, "empty column name in header".into()));
                }
                header = Some(fields.iter().map(|f| f.to_string()).collect());
            }
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(bad(
                        lineno,
                        format!("expected {} fields, found {}", h.len(), fields.len()),
                    ));
                }
                let mut row = Vec::with_capacity(fields.len());
                for f in fields {
                    let x: f64 = f.parse().map_err(|_| bad(lineno, format!("not a number: {f:?}")))?;
                    if !x.is_finite() {
                        return Err(bad(lineno, format!("non-finite value {f:?}")));
                    }
                    row.push(x);
                }
                table.rows.push(row);
                table.lines.push(lineno);
            }
        }
    }
    table.header = header.ok_or_else(|| Error::InvalidParameter(format!("{source}: no header row")))?;
    Ok(table)
}

pub fn read_numeric_csv_file(path: &std::path::Path) -> Result<NumericTable> {
    let f = std::fs::File::open(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot open {}: {e}", path.display())))?;
    read_numeric_csv(std::io::BufReader::new(f), &path.display().to_string())
}

/// A gnuplot script drawing `eta(xi)` and the phase portrait `(u, v)`
/// from the CSV written by [`write_profile_csv`].
pub fn profile_plot_script(csv_name: &str, title: &str) -> String {
    format!(
        "# gnuplot script\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set multiplot layout 1,2 title '{title}'\n\
         set xlabel 'xi'\n\
         set ylabel 'eta'\n\
         plot '{csv_name}' using 1:4 with lines notitle\n\
         set xlabel 'u'\n\
         set ylabel 'v'\n\
         plot '{csv_name}' using 2:3 with lines notitle\n\
         unset multiplot\n"
    )
}
