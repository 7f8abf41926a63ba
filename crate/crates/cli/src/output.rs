use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qpsc_core::serial::fmt17;

use crate::error::{CliError, Kind};

/// Files produced by one command, written only after all are rendered.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_vec_pretty(value).map_err(|e| CliError::new(Kind::Numeric, e.to_string()))?;
        text.push(b'\n');
        self.files.push((name.to_string(), text));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: Table) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::new(Kind::Io, format!("{name}: {e}"));
        w.write_record(&table.header).map_err(io)?;
        for row in &table.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::new(Kind::Io, format!("{name}: {e}")))?;
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Write everything into `dir`. Refuses, before touching anything, when
    /// `dir` is not a directory or a target exists and `overwrite` is off.
    pub fn write(&self, dir: &Path, overwrite: bool) -> Result<Vec<PathBuf>, CliError> {
        if dir.exists() && !dir.is_dir() {
            return Err(CliError::io(dir, "exists and is not a directory"));
        }
        let targets: Vec<PathBuf> = self.files.iter().map(|(n, _)| dir.join(n)).collect();
        for t in &targets {
            if t.exists() && (!overwrite || t.is_dir()) {
                return Err(CliError::io(t, "already exists (set output.overwrite = true to replace)"));
            }
        }
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (t, (_, bytes)) in targets.iter().zip(&self.files) {
            fs::write(t, bytes).map_err(|e| CliError::io(t, e))?;
        }
        Ok(targets)
    }
}

/// A CSV table with preformatted cells.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn num(x: f64) -> String {
    fmt17(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Outputs {
        let mut out = Outputs::default();
        let mut t = Table::new(&["E", "value"]);
        t.push(vec![num(0.1), num(f64::NEG_INFINITY)]);
        out.csv("a.csv", t).unwrap();
        out.json("a.json", &vec![1, 2]).unwrap();
        out
    }

    #[test]
    fn writes_and_refuses_to_clobber() {
        let dir = tempfile::tempdir().unwrap();
        let out = sample();
        out.write(dir.path(), false).unwrap();
        let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert_eq!(csv, "E,value\n1.0000000000000001e-1,-inf\n");
        let e = out.write(dir.path(), false).unwrap_err();
        assert_eq!(e.kind, Kind::Io);
        out.write(dir.path(), true).unwrap();
    }

    #[test]
    fn file_in_place_of_directory() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        assert_eq!(sample().write(&file, true).unwrap_err().kind, Kind::Io);
    }
}
