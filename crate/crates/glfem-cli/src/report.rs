//! Study results and their CSV form.

use std::io::Write;

use crate::CliError;

/// One (snapshot time, run) record of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// Requested snapshot time.
    pub time: f64,
    /// Subdivisions per axis.
    pub m: usize,
    pub tau: f64,
    pub h1: f64,
    pub h1_order: Option<f64>,
    pub superclose: f64,
    pub superclose_order: Option<f64>,
    pub postprocessed: f64,
    pub postprocessed_order: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: &str = "time,m,tau,h1_error,h1_order,superclose_error,superclose_order,postprocessed_error,postprocessed_order";

fn fmt_num(v: f64) -> String {
    format!("{v:.6e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

impl ErrorReport {
    /// Deterministic row order: by time, then mesh size, then step size.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.time, a.m, a.tau)
                .partial_cmp(&(b.time, b.m, b.tau))
                .expect("report fields are finite")
        });
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fmt_num(r.time),
                r.m,
                fmt_num(r.tau),
                fmt_num(r.h1),
                fmt_opt(r.h1_order),
                fmt_num(r.superclose),
                fmt_opt(r.superclose_order),
                fmt_num(r.postprocessed),
                fmt_opt(r.postprocessed_order),
            ));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

/// Write the report to a file, surfacing the path on failure.
pub fn emit_csv(report: &ErrorReport, path: &str) -> Result<(), CliError> {
    let write = || -> std::io::Result<()> {
        let mut file = std::fs::File::create(path)?;
        report.write_csv(&mut file)?;
        file.flush()
    };
    write().map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}
