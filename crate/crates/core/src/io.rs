//! JSON and CSV encodings.
//!
//! Every floating-point number is written with 17 significant digits
//! (`{:.16e}`), which round-trips any `f64` exactly and keeps output files
//! byte-stable across platforms.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Formats `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Compact JSON formatter that writes floats with 17 significant digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sig17Formatter;

impl Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{}", fmt_f64(value))
        } else {
            // JSON has no encoding for these; serde_json's own choice is null.
            CompactFormatter.write_null(writer)
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serialises `value` as compact JSON with 17-digit floats.
pub fn write_json<W: Write, T: Serialize + ?Sized>(writer: W, value: &T) -> Result<(), IoError> {
    let mut ser = Serializer::with_formatter(writer, Sig17Formatter);
    value.serialize(&mut ser)?;
    Ok(())
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String, IoError> {
    let mut buf = Vec::new();
    write_json(&mut buf, value)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes a single-column CSV with the given header.
pub fn write_column_csv<W: Write>(mut w: W, header: &str, values: &[f64]) -> io::Result<()> {
    writeln!(w, "{header}")?;
    for v in values {
        writeln!(w, "{}", fmt_f64(*v))?;
    }
    Ok(())
}

/// Parses a single-column CSV of numbers. A non-numeric first line is
/// treated as a header.
pub fn parse_column_csv(text: &str) -> Result<Vec<f64>, IoError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(IoError::Parse(format!(
                    "line {}: not a number: {field:?}",
                    i + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(IoError::Parse("no numeric values found".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        let s = to_json_string(&vec![0.1, 2.5]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,2.5000000000000000e0]\n");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 2.5]);
    }

    #[test]
    fn column_csv_round_trip() {
        let mut buf = Vec::new();
        write_column_csv(&mut buf, "value", &[1.5, -0.25, 1e-300]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(parse_column_csv(&text).unwrap(), vec![1.5, -0.25, 1e-300]);
        assert!(parse_column_csv("").is_err());
        assert!(parse_column_csv("value\n").is_err());
        assert!(parse_column_csv("value\n1\nx\n").is_err());
    }
}
