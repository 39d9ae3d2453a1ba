//! CSV emission and parsing for divergence samples.
//!
//! Exact header: `kind,r,value,exact,cap,stable`.  Absent values are empty
//! fields.

use thiserror::Error;

use crate::explorer::{DivergenceSample, SampleKind};

pub const HEADER: &str = "kind,r,value,exact,cap,stable";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CsvError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing header line `{HEADER}`")]
    MissingHeader,
}

pub fn write_samples(samples: &[DivergenceSample]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for s in samples {
        let value = s.value.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.kind.label(),
            s.r,
            value,
            s.exact,
            s.cap,
            s.stable
        ));
    }
    out
}

pub fn parse_samples(text: &str) -> Result<Vec<DivergenceSample>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(CsvError::MissingHeader),
    }
    let mut out = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(CsvError::Malformed {
                line: idx + 1,
                msg: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let bad = |msg: &str| CsvError::Malformed {
            line: idx + 1,
            msg: msg.to_string(),
        };
        let kind = SampleKind::from_label(fields[0]).ok_or_else(|| bad("unknown kind"))?;
        let r: u32 = fields[1].parse().map_err(|_| bad("bad r"))?;
        let value = if fields[2].is_empty() {
            None
        } else {
            Some(fields[2].parse().map_err(|_| bad("bad value"))?)
        };
        let exact: bool = fields[3].parse().map_err(|_| bad("bad exact"))?;
        let cap: u32 = fields[4].parse().map_err(|_| bad("bad cap"))?;
        let stable: bool = fields[5].parse().map_err(|_| bad("bad stable"))?;
        out.push(DivergenceSample {
            kind,
            r,
            value,
            exact,
            cap,
            stable,
        });
    }
    Ok(out)
}
