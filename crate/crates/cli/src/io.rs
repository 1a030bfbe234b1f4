//! Input files and JSON output.

use std::io::{self, Write};
use std::path::Path;

use fkgrad::{parse_urdf, RobotModel};
use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<RobotModel, CliError> {
    parse_urdf(&read_text(path)?).map_err(|source| CliError::Urdf {
        path: path.to_path_buf(),
        source,
    })
}

/// Joint configurations, one row each, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Configurations {
    pub rows: usize,
    pub values: Vec<f64>,
}

/// Reads a JSON array of arrays (`.json`) or CSV rows with an optional
/// header, and checks every row has `width` finite values.
pub fn read_configurations(path: &Path, width: usize) -> Result<Configurations, CliError> {
    let text = read_text(path)?;
    let parse_err = |message: String| CliError::Parse {
        path: path.to_path_buf(),
        message,
    };
    let rows: Vec<Vec<f64>> = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?
    } else {
        parse_csv(&text).map_err(parse_err)?
    };
    let mut values = Vec::with_capacity(rows.len() * width);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(CliError::Shape(format!(
                "{}: row {i} has {} values, chain has {width} degrees of freedom",
                path.display(),
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(CliError::Shape(format!(
                "{}: row {i}, column {j} is not finite",
                path.display()
            )));
        }
        values.extend_from_slice(row);
    }
    Ok(Configurations {
        rows: rows.len(),
        values,
    })
}

fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            // a non-numeric first row is a header
            Err(_) if i == 0 => {}
            Err(e) => return Err(format!("row {i}: {e}")),
        }
    }
    Ok(rows)
}

/// Writes `f64` with 17 significant digits so values survive a round trip.
struct Exact;

impl Formatter for Exact {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, Exact);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Write(io::Error::other(e)))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}
