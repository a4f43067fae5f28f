//! Recorded sequence files.
//!
//! ```text
//! # objects: bookcase,desk,chair
//! # sequence: freiburg-2-3
//! 0.5 1.25 0.1 0.9 0 office
//! 0.6 1.25 0 0.8 0.05 office
//! ```
//!
//! One header line names the objects (comma separated), an optional second
//! header names the sequence, then one record per line: `x y r1 ... rN` and an
//! optional single-token label. Other `#` lines and blank lines are ignored.
//! Files are UTF-8 with LF line endings; the writer prints floats in their
//! shortest round-trip form, so write-then-parse is lossless.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pipeline::DatasetRecord;
use crate::semmap::{ObjectEvidence, Position};

const OBJECTS_HEADER: &str = "# objects:";
const SEQUENCE_HEADER: &str = "# sequence:";

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceFile {
    pub id: Option<String>,
    pub object_names: Vec<String>,
    pub records: Vec<DatasetRecord>,
}

impl SequenceFile {
    pub fn n_objects(&self) -> usize {
        self.object_names.len()
    }

    pub fn has_labels(&self) -> bool {
        self.records.iter().any(|r| r.label.is_some())
    }
}

fn parse_names(line: usize, list: &str) -> Result<Vec<String>> {
    let names: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        return Err(Error::parse(line, "empty object name in header"));
    }
    Ok(names)
}

pub fn parse_sequence(text: &str) -> Result<SequenceFile> {
    let mut names: Option<Vec<String>> = None;
    let mut id = None;
    let mut records = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(OBJECTS_HEADER) {
            if names.is_some() {
                return Err(Error::parse(ln, "duplicate objects header"));
            }
            if !records.is_empty() {
                return Err(Error::parse(ln, "objects header after records"));
            }
            names = Some(parse_names(ln, rest)?);
            continue;
        }
        if let Some(rest) = line.strip_prefix(SEQUENCE_HEADER) {
            id = Some(rest.trim().to_string());
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let n = names
            .as_ref()
            .ok_or_else(|| Error::parse(ln, "record before `# objects:` header"))?
            .len();
        records.push(parse_record(ln, line, n)?);
    }

    let object_names = names.ok_or_else(|| Error::parse(1, "missing `# objects:` header"))?;
    Ok(SequenceFile {
        id,
        object_names,
        records,
    })
}

fn parse_record(ln: usize, line: &str, n: usize) -> Result<DatasetRecord> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let label = match tokens.len() {
        t if t == n + 2 => None,
        t if t == n + 3 => Some(tokens[n + 2].to_string()),
        t => {
            return Err(Error::parse(
                ln,
                format!("expected {} or {} fields, found {t}", n + 2, n + 3),
            ))
        }
    };
    let num = |i: usize| -> Result<f64> {
        tokens[i]
            .parse::<f64>()
            .map_err(|_| Error::parse(ln, format!("field {}: {:?} is not a number", i + 1, tokens[i])))
    };
    let position = Position::new(num(0)?, num(1)?).map_err(|e| Error::parse(ln, e.to_string()))?;
    let values = (2..n + 2).map(num).collect::<Result<Vec<f64>>>()?;
    let evidence = ObjectEvidence::new(values).map_err(|e| Error::parse(ln, e.to_string()))?;
    Ok(DatasetRecord {
        position,
        evidence,
        label,
    })
}

pub fn write_sequence(file: &SequenceFile) -> Result<String> {
    if file.object_names.is_empty()
        || file
            .object_names
            .iter()
            .any(|n| n.trim().is_empty() || n.contains(',') || n.contains('\n') || n.trim() != n)
    {
        return Err(Error::InvalidConfig(
            "object names must be non-empty, trimmed and free of commas".into(),
        ));
    }
    let mut out = String::new();
    let _ = writeln!(out, "{OBJECTS_HEADER} {}", file.object_names.join(","));
    if let Some(id) = &file.id {
        let _ = writeln!(out, "{SEQUENCE_HEADER} {id}");
    }
    for r in &file.records {
        if r.evidence.len() != file.object_names.len() {
            return Err(Error::DimensionMismatch {
                expected: file.object_names.len(),
                got: r.evidence.len(),
            });
        }
        let _ = write!(out, "{} {}", r.position.x, r.position.y);
        for v in r.evidence.as_slice() {
            let _ = write!(out, " {v}");
        }
        if let Some(label) = &r.label {
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(Error::InvalidConfig(format!("label {label:?} must be a single token")));
            }
            let _ = write!(out, " {label}");
        }
        out.push('\n');
    }
    Ok(out)
}
