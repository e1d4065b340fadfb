//! CSV signal ingestion.
//!
//! Accepts files whose rows are either `value` or `time,value`, with an
//! optional header row (detected by a non-numeric first row). Non-finite
//! entries are rejected with the offending line number.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::signal::SignalWindow;
use crate::{Error, Result};

/// Reads all samples from a CSV file in file order.
pub fn ingest_csv(path: &Path, sample_rate_hz: f64) -> Result<SignalWindow> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::Io { path: display.clone(), source: e })?;
    let reader = BufReader::new(file);

    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Io { path: display.clone(), source: e })?;
        let trimmed = line.trim().trim_end_matches('\r');
        if trimmed.is_empty() {
            continue;
        }
        let value_field = match trimmed.split(',').count() {
            1 => trimmed,
            2 => trimmed.split(',').nth(1).unwrap().trim(),
            n => {
                return Err(Error::Parse {
                    path: display,
                    line: line_no,
                    message: format!("expected 1 or 2 columns, found {n}"),
                })
            }
        };
        match value_field.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => samples.push(v),
            Ok(v) => {
                return Err(Error::Parse {
                    path: display,
                    line: line_no,
                    message: format!("non-finite sample {v}"),
                })
            }
            Err(_) if line_no == 1 => continue, // header row
            Err(_) => {
                return Err(Error::Parse {
                    path: display,
                    line: line_no,
                    message: format!("cannot parse {value_field:?} as a number"),
                })
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Parse {
            path: display,
            line: 0,
            message: "file contains no samples".to_string(),
        });
    }
    SignalWindow::new(
        samples,
        sample_rate_hz,
        path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    )
}
