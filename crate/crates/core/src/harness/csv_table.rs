//! Rectangular string tables with CSV (de)serialization.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! parsed cell reproduces the original `f64` bit for bit.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("row {row} has {got} cells, header has {expected}")]
    Arity {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("empty table: no header row")]
    NoHeader,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<(), CsvError> {
        if row.len() != self.header.len() {
            return Err(CsvError::Arity {
                row: self.rows.len() + 1,
                expected: self.header.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }

    pub fn to_csv_string(&self) -> Result<String, CsvError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| CsvError::Io {
            path: "<memory>".into(),
            source: e.into_error(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output of utf-8 cells is utf-8"))
    }

    pub fn parse(text: &str) -> Result<Self, CsvError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = r.records();
        let header: Vec<String> = match records.next() {
            Some(rec) => rec?.iter().map(str::to_string).collect(),
            None => return Err(CsvError::NoHeader),
        };
        let mut table = CsvTable::new(header);
        for rec in records {
            table.push(rec?.iter().map(str::to_string).collect())?;
        }
        Ok(table)
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CsvError> {
        let text = self.to_csv_string()?;
        std::fs::write(path, text).map_err(|source| CsvError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
