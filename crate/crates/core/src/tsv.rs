//! Minimal tab-separated I/O shared by stage outputs.
//!
//! Fields never contain tabs or newlines: writers replace them with spaces.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::{Error, Result};

pub fn clean(field: &str) -> String {
    field.replace(['\t', '\n', '\r'], " ")
}

/// Buffered writer that emits one row per call.
pub struct TsvWriter {
    out: BufWriter<File>,
    path: std::path::PathBuf,
}

impl TsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = TsvWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        w.row(header)?;
        Ok(w)
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        let line = fields
            .iter()
            .map(|f| clean(f.as_ref()))
            .collect::<Vec<_>>()
            .join("\t");
        writeln!(self.out, "{line}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Reads a TSV file with a header row. Returns the header and the data rows.
pub fn read(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(line) => split(&line.map_err(|e| Error::io(path, e))?),
        None => return Ok((Vec::new(), Vec::new())),
    };
    let mut rows = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        rows.push(split(&line));
    }
    Ok((header, rows))
}

fn split(line: &str) -> Vec<String> {
    line.split('\t').map(str::to_string).collect()
}

/// Looks up column positions by name.
pub fn columns(header: &[String], names: &[&str], path: &Path) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|name| {
            header.iter().position(|h| h == name).ok_or_else(|| {
                Error::parse(path.display().to_string(), format!("missing column `{name}`"))
            })
        })
        .collect()
}
