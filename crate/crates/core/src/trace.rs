//! Per-iteration trace records and their CSV encoding (`trace_v1`).

use std::io::{self, Write};

pub const TRACE_VERSION: &str = "trace_v1";
pub const TRACE_HEADER: &str = "k,F,Gnorm,potential,bound_linear,bound_sublinear,wall_time_ns";

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub f_value: f64,
    pub g_norm: Option<f64>,
    pub potential: Option<f64>,
    pub bound_linear: Option<f64>,
    pub bound_sublinear: Option<f64>,
    pub wall_time_ns: u128,
}

fn field(v: Option<f64>) -> String {
    match v {
        Some(x) => format_f64(x),
        None => "null".to_string(),
    }
}

/// Shortest representation that round-trips.
fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

impl TraceRecord {
    /// Fields other than `wall_time_ns`, which is the only nondeterministic column.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.k,
            format_f64(self.f_value),
            field(self.g_norm),
            field(self.potential),
            field(self.bound_linear),
            field(self.bound_sublinear),
            self.wall_time_ns
        )
    }

    pub fn from_csv_row(line: &str) -> Option<Self> {
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != 7 {
            return None;
        }
        let opt = |s: &str| -> Option<Option<f64>> {
            if s == "null" {
                Some(None)
            } else {
                s.parse().ok().map(Some)
            }
        };
        Some(Self {
            k: parts[0].parse().ok()?,
            f_value: parts[1].parse().ok()?,
            g_norm: opt(parts[2])?,
            potential: opt(parts[3])?,
            bound_linear: opt(parts[4])?,
            bound_sublinear: opt(parts[5])?,
            wall_time_ns: parts[6].parse().ok()?,
        })
    }
}

pub fn write_trace<W: Write>(mut out: W, records: &[TraceRecord]) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    Ok(())
}

/// Parses a trace written by [`write_trace`].
pub fn read_trace(text: &str) -> Option<Vec<TraceRecord>> {
    let mut lines = text.lines();
    if lines.next()?.trim() != TRACE_HEADER {
        return None;
    }
    lines.filter(|l| !l.trim().is_empty()).map(TraceRecord::from_csv_row).collect()
}
