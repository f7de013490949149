//! CSV and JSON emission with fixed formatting.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::compute::Record;
use crate::error::{CliError, CliResult};

/// Column order of scan datasets.
pub const SCAN_HEADER: [&str; 13] = [
    "beta", "g", "n", "x_ab", "chi_B", "chi_E", "ratio", "criterion", "threshold", "epsilon", "depth_lb", "backend", "error",
];

/// Twelve significant digits in scientific notation; blank for NaN.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.11e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub fn scan_row(r: &Record) -> Vec<String> {
    vec![
        fmt_float(r.beta),
        fmt_opt(r.g),
        r.n.to_string(),
        r.x_ab.to_string(),
        fmt_float(r.chi_b),
        fmt_float(r.chi_e),
        fmt_float(r.ratio),
        fmt_float(r.criterion),
        fmt_float(r.threshold),
        fmt_float(r.epsilon),
        r.depth_lb.to_string(),
        r.backend.to_string(),
        r.error.clone().unwrap_or_default(),
    ]
}

/// Writes a header and rows as CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Config(format!("csv output: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))
}

pub fn scan_csv(records: &[Record]) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&mut buf, &SCAN_HEADER, records.iter().map(scan_row))?;
    Ok(buf)
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Config(format!("json output: {e}")))?;
    v.push(b'\n');
    Ok(v)
}

/// Writes `bytes` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            std::fs::write(p, bytes).map_err(|e| CliError::io(p, e))
        }
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// `scan.csv` -> `scan.json`; a `.json` output gets `.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        out.with_extension("meta.json")
    } else {
        out.with_extension("json")
    }
}
