use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{KscError, Result};

fn reader(path: &Path) -> Result<::csv::Reader<File>> {
    let file = File::open(path).map_err(|e| KscError::io(path, e))?;
    Ok(::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(::csv::Trim::All)
        .from_reader(file))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> KscError {
    KscError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads comma-separated numeric rows without a header. With `labeled`, the
/// last column of every row is parsed as an integer label.
pub fn load_csv(path: impl AsRef<Path>, labeled: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut n = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(n + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(parse_error(
                path,
                line,
                format!("expected {expected} fields, found {}", record.len()),
            ));
        }
        let features = if labeled {
            if expected < 2 {
                return Err(parse_error(
                    path,
                    line,
                    "labeled rows need at least two fields",
                ));
            }
            let raw = &record[expected - 1];
            let label: i64 = raw
                .parse()
                .map_err(|_| parse_error(path, line, format!("invalid label {raw:?}")))?;
            labels.push(label);
            expected - 1
        } else {
            expected
        };
        for field in record.iter().take(features) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(path, line, format!("non-numeric field {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_error(
                    path,
                    line,
                    format!("non-finite field {field:?}"),
                ));
            }
            values.push(v);
        }
        n += 1;
    }
    let d = width.map_or(0, |w| if labeled { w - 1 } else { w });
    let ds = Dataset::new(n, d, values)?;
    if labeled {
        ds.with_labels(labels)
    } else {
        Ok(ds)
    }
}

/// Writes the dataset as CSV; labels, if present, become a trailing column.
/// Values use the shortest representation that parses back to the same bits.
pub fn save_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let io = |e| KscError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let mut line = String::new();
    for (i, row) in data.rows().enumerate() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:?}"));
        }
        if let Some(labels) = data.labels() {
            line.push_str(&format!(",{}", labels[i]));
        }
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// One label per line.
pub fn save_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let io = |e| KscError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for l in labels {
        writeln!(out, "{l}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a label file written by [`save_labels`].
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| KscError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| parse_error(path, i + 1, format!("invalid label {l:?}")))
        })
        .collect()
}
