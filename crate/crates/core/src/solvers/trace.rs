use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact header line of every trace CSV.
pub const TRACE_HEADER: [&str; 7] = ["k", "epoch", "gap", "consensus", "tracking", "t", "grad_norm"];

/// One recorded iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    /// Fractional epochs completed.
    pub epoch: f64,
    /// `F(z_bar) - F(z_star)`.
    pub gap: f64,
    /// `||x - B^inf x||_2^2`.
    pub consensus: f64,
    /// `||w - B^inf w||_2^2`.
    pub tracking: f64,
    /// Auxiliary table gap, present only in instrumented SAGA runs.
    pub t: Option<f64>,
    /// `||grad F(z_bar)||_2`.
    pub grad_norm: f64,
}

// Debug formatting of f64 is the shortest string that parses back to the
// same value, and switches to exponent notation for tiny gaps.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Serializes rows to CSV bytes with the fixed header.
pub fn trace_to_csv(rows: &[TraceRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| panic!("writing CSV to memory cannot fail: {e}");
    w.write_record(TRACE_HEADER).unwrap_or_else(io);
    for r in rows {
        w.write_record([
            r.k.to_string(),
            fmt_f64(r.epoch),
            fmt_f64(r.gap),
            fmt_f64(r.consensus),
            fmt_f64(r.tracking),
            r.t.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.grad_norm),
        ])
        .unwrap_or_else(io);
    }
    w.into_inner().unwrap_or_else(|e| panic!("flushing in-memory CSV: {e}"))
}

pub fn write_trace_csv(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&trace_to_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("trace header must be {}", TRACE_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let num = |col: usize| -> Result<f64> {
            rec.get(col)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| Error::Parse { line, message: format!("column {}: {e}", TRACE_HEADER[col]) })
        };
        let k = rec
            .get(0)
            .unwrap_or("")
            .parse::<usize>()
            .map_err(|e| Error::Parse { line, message: format!("column k: {e}") })?;
        let t = match rec.get(5).unwrap_or("") {
            "" => None,
            _ => Some(num(5)?),
        };
        rows.push(TraceRow {
            k,
            epoch: num(1)?,
            gap: num(2)?,
            consensus: num(3)?,
            tracking: num(4)?,
            t,
            grad_norm: num(6)?,
        });
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse { line: 1, message: format!("{other:?}") },
    }
}
