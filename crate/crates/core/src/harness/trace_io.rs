//! Trace CSV files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::solvers::SolverTrace;

/// Fixed leading columns of every trace file.
pub const TRACE_COLUMNS: [&str; 5] = ["iter", "queries", "wall_ms", "objective", "gap"];

/// A trace as stored on disk: named columns with optional cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl TraceTable {
    pub fn from_trace(trace: &SolverTrace) -> Self {
        let mut columns: Vec<String> = TRACE_COLUMNS.iter().map(|s| s.to_string()).collect();
        columns.extend(trace.metric_names.iter().cloned());
        let rows = trace
            .records
            .iter()
            .map(|r| {
                let mut row = vec![
                    Some(r.iter as f64),
                    Some(r.queries as f64),
                    Some(r.wall_ms),
                    Some(r.objective),
                    r.gap,
                ];
                row.extend(r.metrics.iter().copied());
                row
            })
            .collect();
        TraceTable { columns, rows }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// `(iter, value)` pairs of the non-empty cells of `name`.
    pub fn series(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let k = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .filter_map(|row| Some((row[0].unwrap_or(f64::NAN), row[k]?)))
                .collect(),
        )
    }
}

fn cell(v: Option<f64>, integer: bool) -> String {
    match v {
        None => String::new(),
        Some(v) if integer => format!("{}", v as u64),
        Some(v) => format!("{v:.16e}"),
    }
}

/// Writes `iter,queries,wall_ms,objective,gap,<metrics...>`; floats carry 17
/// significant digits and round-trip exactly, empty cells mark absent values.
pub fn write_trace_csv(trace: &SolverTrace, path: &Path) -> Result<()> {
    write_table(&TraceTable::from_trace(trace), path)
}

pub fn write_table(table: &TraceTable, path: &Path) -> Result<()> {
    let mut out = table.columns.join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().enumerate().map(|(k, v)| cell(*v, k < 2)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_trace_csv(path: &Path) -> Result<TraceTable> {
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if columns.len() < TRACE_COLUMNS.len() || columns[..TRACE_COLUMNS.len()] != TRACE_COLUMNS {
        return Err(err(format!(
            "not a trace file: header must start with {}",
            TRACE_COLUMNS.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let row = rec
            .iter()
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>()
                        .map(Some)
                        .map_err(|e| err(format!("line {}: {c:?}: {e}", k + 2)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(TraceTable { columns, rows })
}
