//! Table writers. CSV reals use 17 significant digits so that every
//! `f64` survives a text round trip and golden files compare exactly.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

/// A row that can be written as CSV or as a JSON object.
pub trait Record: Serialize {
    const HEADER: &'static [&'static str];

    fn fields(&self) -> Vec<String>;
}

/// `x` in scientific notation with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `rows` to `dir/stem.csv` or `dir/stem.json`.
pub fn write_table<R: Record>(
    dir: &FsPath,
    stem: &str,
    format: Format,
    rows: &[R],
) -> Result<PathBuf, CliError> {
    match format {
        Format::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let csv_err = |source| CliError::Csv { path: path.clone(), source };
            let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
            w.write_record(R::HEADER).map_err(csv_err)?;
            for row in rows {
                w.write_record(row.fields()).map_err(csv_err)?;
            }
            w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
            Ok(path)
        }
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            write_text(&path, &(serde_json::to_string_pretty(rows)? + "\n"))?;
            Ok(path)
        }
    }
}

pub fn write_text(path: &FsPath, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}
