//! Single-column return series in CSV.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot open {path}: {err}")]
    Open { path: String, err: std::io::Error },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("no returns found")]
    Empty,
}

/// Reads one real per record. Lines starting with `#` are skipped and a
/// non-numeric first record is taken as a header; any other non-numeric or non-finite value is an error. Extra
/// columns are ignored.
pub fn parse_returns<R: Read>(reader: R) -> Result<Vec<f64>, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        let Some(field) = rec.get(0) else { continue };
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(v) => return Err(IoError::Parse { line, message: format!("non-finite value {v}") }),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(IoError::Parse { line, message: format!("cannot parse {field:?} as a number") }),
        }
    }
    if out.is_empty() {
        return Err(IoError::Empty);
    }
    Ok(out)
}

pub fn read_returns(path: &Path) -> Result<Vec<f64>, IoError> {
    let f = File::open(path).map_err(|err| IoError::Open { path: path.display().to_string(), err })?;
    parse_returns(f)
}

/// Writes `returns` under a `return` header, one value per line, in
/// shortest round-trip form.
pub fn write_returns<W: Write>(writer: W, returns: &[f64]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["return"])?;
    for v in returns {
        w.write_record([v.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
