use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

/// Version tag carried by every JSON document.
pub const SCHEMA: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Output of one subcommand in all three renderings.
pub struct Rendered {
    pub command: &'static str,
    pub json: Value,
    /// Flat table used for CSV, and for the human table unless `table` overrides it.
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub table: Option<(Vec<String>, Vec<Vec<String>>)>,
    /// Lines printed under the human table.
    pub notes: Vec<String>,
    /// False when a verification failed; maps to exit code 1.
    pub passed: bool,
}

impl Rendered {
    pub fn new(command: &'static str, body: impl Serialize) -> Self {
        Self {
            command,
            json: serde_json::to_value(body).expect("report serializes"),
            header: Vec::new(),
            rows: Vec::new(),
            table: None,
            notes: Vec::new(),
            passed: true,
        }
    }

    pub fn columns(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self.rows = rows;
        self
    }

    pub fn human(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.table = Some((header.iter().map(|s| s.to_string()).collect(), rows));
        self
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }

    pub fn passed(mut self, ok: bool) -> Self {
        self.passed = ok;
        self
    }

    fn document(&self) -> Value {
        let mut doc = json!({ "schema": SCHEMA, "command": self.command });
        match &self.json {
            Value::Object(map) => {
                for (k, v) in map {
                    doc[k] = v.clone();
                }
            }
            other => doc["result"] = other.clone(),
        }
        doc["passed"] = Value::Bool(self.passed);
        doc
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.document()).expect("json") + "\n",
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                if !self.header.is_empty() {
                    w.write_record(&self.header).expect("in-memory write");
                }
                for row in &self.rows {
                    w.write_record(row).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
            }
            Format::Table => {
                let (header, rows) = match &self.table {
                    Some((h, r)) => (h, r),
                    None => (&self.header, &self.rows),
                };
                let mut out = aligned(header, rows);
                for n in &self.notes {
                    out.push_str(n);
                    out.push('\n');
                }
                out
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> io::Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => fs::write(path, text),
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    if header.is_empty() {
        return String::new();
    }
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    for row in rows {
        out.push_str(&line(row));
    }
    out
}
