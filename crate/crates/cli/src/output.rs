use std::io::Write;

use serde::Serialize;

use crate::Format;

/// Rows of pre-formatted cells, rendered as CSV or aligned text.
pub struct Table {
    head: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(head: &[&str]) -> Self {
        Self::from_strings(head.iter().map(|s| s.to_string()).collect())
    }

    pub fn from_strings(head: Vec<String>) -> Self {
        Table { head, rows: Vec::new() }
    }

    pub fn row(&mut self, r: Vec<String>) {
        debug_assert_eq!(r.len(), self.head.len());
        self.rows.push(r);
    }

    pub fn csv(&self) -> String {
        let mut s = String::new();
        for r in std::iter::once(&self.head).chain(&self.rows) {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn text(&self) -> String {
        let mut w: Vec<usize> = self.head.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (k, c) in r.iter().enumerate() {
                w[k] = w[k].max(c.chars().count());
            }
        }
        let mut s = String::new();
        for r in std::iter::once(&self.head).chain(&self.rows) {
            let cells: Vec<String> = r.iter().zip(&w).map(|(c, &n)| format!("{c:<n$}")).collect();
            s.push_str(cells.join("  ").trim_end());
            s.push('\n');
        }
        s
    }
}

pub fn emit<T: Serialize>(format: Format, value: &T, table: Table) -> anyhow::Result<()> {
    match format {
        Format::Json => out(&format!("{}\n", serde_json::to_string_pretty(value)?)),
        Format::Csv => out(&table.csv()),
        Format::Table => out(&table.text()),
    }
}

/// Writes to stdout, surfacing a closed pipe as an error instead of a panic.
pub fn out(s: &str) -> anyhow::Result<()> {
    let mut w = std::io::stdout().lock();
    w.write_all(s.as_bytes())?;
    w.flush()?;
    Ok(())
}
