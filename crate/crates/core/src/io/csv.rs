use std::path::Path;

use super::{fmt_f64, write_file};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "t,E_k,E_p,E_tau,E_S,F_max,m_q0,m_q1,m_q2,m_q3,m_q4,sigma_min,E_wrt,E_rt,gauge_spread,halt";

fn numeric_columns(r: &DiagnosticsRecord) -> [f64; 15] {
    let m = r.m_q;
    [r.t, r.e_k, r.e_p, r.e_tau, r.e_s, r.f_max, m[0], m[1], m[2], m[3], m[4], r.sigma_min, r.e_wrt, r.e_rt, r.gauge_spread]
}

/// The CSV text: header plus one LF-terminated row per record.
pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        for v in numeric_columns(r) {
            out.push_str(&fmt_f64(v));
            out.push(',');
        }
        out.push_str(&r.halt);
        out.push('\n');
    }
    out
}

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    write_file(path, &diagnostics_csv(records))
}

/// Reads the CSV back. Fields outside the CSV columns come back as `NaN`.
pub fn parse_diagnostics_csv(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse { line: 1, message: "unexpected CSV header".into() });
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 16 {
            return Err(Error::Parse { line: lineno, message: format!("expected 16 columns, found {}", cells.len()) });
        }
        let mut v = [0.0; 15];
        for (slot, cell) in v.iter_mut().zip(&cells) {
            *slot = cell.parse().map_err(|_| Error::Parse { line: lineno, message: format!("bad number '{cell}'") })?;
        }
        let mut r = DiagnosticsRecord::empty(v[0]);
        r.e_k = v[1];
        r.e_p = v[2];
        r.e_tau = v[3];
        r.e_s = v[4];
        r.f_max = v[5];
        r.m_q = [v[6], v[7], v[8], v[9], v[10]];
        r.sigma_min = v[11];
        r.e_wrt = v[12];
        r.e_rt = v[13];
        r.gauge_spread = v[14];
        r.halt = cells[15].to_string();
        out.push(r);
    }
    Ok(out)
}
