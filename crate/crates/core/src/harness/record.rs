//! Per-iteration metric records and their CSV form.
//!
//! CSV layout: optional `#`-prefixed comment lines echoing the experiment
//! config, a `k,f,grad_norm_sq,min_grad_norm,bits` header, then one row per
//! recorded iterate. Floats are written with 17 significant digits so a
//! read-back reproduces them exactly.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One recorded iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub k: usize,
    pub f_value: f64,
    pub grad_norm_sq: f64,
    /// Running min of ‖∇f(x^j)‖ over j = 0..k.
    pub min_grad_norm: f64,
    /// Bits transmitted per client over rounds 0..k-1.
    pub bits_cumulative: u64,
}

/// A full run: rows k = 0..=K+1 (row k describes iterate x^k), the config
/// echo for provenance, and the master seed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub rows: Vec<MetricRow>,
    pub config_echo: Option<String>,
    pub seed: u64,
}

impl RunRecord {
    /// Min of ‖∇f(x^k)‖² over rows k = 0..=k_max (the horizon range used by
    /// the stepsize analyses and the grid search).
    pub fn min_grad_norm_sq_through(&self, k_max: usize) -> f64 {
        self.rows
            .iter()
            .take_while(|r| r.k <= k_max)
            .map(|r| r.grad_norm_sq)
            .fold(f64::INFINITY, f64::min)
    }

    /// Min of ‖∇f(x^k)‖² over every recorded row.
    pub fn final_min_grad_norm_sq(&self) -> f64 {
        self.rows
            .last()
            .map(|r| r.min_grad_norm * r.min_grad_norm)
            .unwrap_or(f64::INFINITY)
    }

    /// ‖∇f‖² at the last recorded iterate.
    pub fn final_grad_norm_sq(&self) -> f64 {
        self.rows
            .last()
            .map(|r| r.grad_norm_sq)
            .unwrap_or(f64::INFINITY)
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes a record to CSV text.
pub fn csv_string(record: &RunRecord) -> String {
    let mut out = String::new();
    if let Some(echo) = &record.config_echo {
        for line in echo.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&format!("# seed = {}\n", record.seed));
    }
    out.push_str("k,f,grad_norm_sq,min_grad_norm,bits\n");
    for row in &record.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.k,
            fmt_f64(row.f_value),
            fmt_f64(row.grad_norm_sq),
            fmt_f64(row.min_grad_norm),
            row.bits_cumulative
        ));
    }
    out
}

/// Writes the record as CSV.
pub fn write_csv(record: &RunRecord, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(csv_string(record).as_bytes())?;
    Ok(())
}

/// Reads back a CSV produced by [`write_csv`] (comments are skipped and not
/// restored into `config_echo`).
pub fn read_csv(path: &Path) -> Result<RunRecord> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

/// Parses CSV text produced by [`csv_string`].
pub fn parse_csv(text: &str) -> Result<RunRecord> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line != "k,f,grad_norm_sq,min_grad_norm,bits" {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unexpected header `{line}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad float `{s}`"),
            })
        };
        rows.push(MetricRow {
            k: fields[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad index `{}`", fields[0]),
            })?,
            f_value: parse_f(fields[1])?,
            grad_norm_sq: parse_f(fields[2])?,
            min_grad_norm: parse_f(fields[3])?,
            bits_cumulative: fields[4].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad bits `{}`", fields[4]),
            })?,
        });
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            msg: "missing CSV header".into(),
        });
    }
    Ok(RunRecord {
        rows,
        config_echo: None,
        seed: 0,
    })
}
