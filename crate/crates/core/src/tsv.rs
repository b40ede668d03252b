//! Minimal tab-separated reader/writer shared by every file format in the
//! pipeline.
//!
//! Files may open with any number of `#`-prefixed provenance lines before the
//! header row. Fields never contain tabs or newlines.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One data row with its 1-based line number in the source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub line: usize,
    pub fields: Vec<String>,
}

impl Row {
    pub fn get(&self, idx: usize) -> &str {
        self.fields.get(idx).map(String::as_str).unwrap_or("")
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Row>,
    pub meta: Vec<String>,
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

/// Reads a TSV file whose header must equal `expected` (or start with it when
/// `open_ended` is set, as for score matrices with one column per metric).
///
/// Rows with fewer than `min_columns` fields, or more fields than the header,
/// are parse errors naming the line.
pub fn read_table(path: &Path, expected: &[&str], open_ended: bool, min_columns: usize) -> Result<Table> {
    let text = read_file(path)?;
    parse_table(&path.display().to_string(), &text, expected, open_ended, min_columns)
}

pub fn parse_table(
    name: &str,
    text: &str,
    expected: &[&str],
    open_ended: bool,
    min_columns: usize,
) -> Result<Table> {
    let mut meta = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        match &header {
            None => {
                if let Some(m) = line.strip_prefix('#') {
                    meta.push(m.trim().to_string());
                    continue;
                }
                if line.is_empty() {
                    continue;
                }
                let cols: Vec<String> = line.split('\t').map(str::to_string).collect();
                let ok = if open_ended {
                    cols.len() >= expected.len() && cols.iter().zip(expected).all(|(a, b)| a == b)
                } else {
                    cols.len() == expected.len() && cols.iter().zip(expected).all(|(a, b)| a == b)
                };
                if !ok {
                    return Err(Error::parse(
                        name,
                        line_no,
                        format!("expected header `{}`, found `{}`", expected.join("\\t"), line.replace('\t', "\\t")),
                    ));
                }
                header = Some(cols);
            }
            Some(h) => {
                if line.is_empty() {
                    continue;
                }
                let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
                if fields.len() > h.len() || fields.len() < min_columns.min(h.len()) {
                    return Err(Error::parse(
                        name,
                        line_no,
                        format!("expected {} columns, found {}", h.len(), fields.len()),
                    ));
                }
                rows.push(Row { line: line_no, fields });
            }
        }
    }
    let header = header.ok_or_else(|| Error::parse(name, 1, "missing header row"))?;
    Ok(Table { header, rows, meta })
}

/// Accumulates a TSV document in memory; callers persist it atomically.
#[derive(Debug, Default, Clone)]
pub struct TsvBuilder {
    buf: String,
}

impl TsvBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn meta(&mut self, line: &str) -> &mut Self {
        let _ = writeln!(self.buf, "# {line}");
        self
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<&mut Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            let f = f.as_ref();
            if f.contains(['\t', '\n', '\r']) {
                return Err(Error::Integrity(format!("field contains a tab or newline: {f:?}")));
            }
            if !first {
                self.buf.push('\t');
            }
            self.buf.push_str(f);
            first = false;
        }
        self.buf.push('\n');
        Ok(self)
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
