//! Deterministic report assembly and emission.
//!
//! Data files are byte-stable across runs of the same config: keys are
//! emitted in insertion order, floats with 17 significant digits, and no
//! timestamps appear in them. Wall time and such live in a sidecar.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "null".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "1e999" } else { "-1e999" }.into();
    }
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn to_json(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => fmt_f64(*v),
            Cell::Text(s) => json_string(s),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => fmt_f64(*v),
            Cell::Text(s) => {
                if s.contains(',') || s.contains('"') || s.contains('\n') {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Flag(b) => b.to_string(),
        }
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct Report {
    pub subcommand: String,
    pub config_hash: String,
    pub config_echo: String,
    pub scalars: Vec<(String, Cell)>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(subcommand: &str, config_hash: String, config_echo: String) -> Self {
        Report {
            subcommand: subcommand.into(),
            config_hash,
            config_echo,
            ..Default::default()
        }
    }

    pub fn scalar(&mut self, name: &str, cell: Cell) {
        self.scalars.push((name.into(), cell));
    }

    pub fn table(&mut self, name: &str, columns: &[&str]) -> &mut Table {
        self.tables.push(Table {
            name: name.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        });
        self.tables.last_mut().unwrap()
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The full JSON document, keys in fixed order.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"schema_version\": \"1\",");
        let _ = writeln!(
            out,
            "  \"code_version\": {},",
            json_string(env!("CARGO_PKG_VERSION"))
        );
        let _ = writeln!(out, "  \"config_hash\": {},", json_string(&self.config_hash));
        let _ = writeln!(out, "  \"subcommand\": {},", json_string(&self.subcommand));
        let _ = writeln!(out, "  \"config\": {},", self.config_echo.trim());
        out.push_str("  \"scalars\": {");
        for (k, (name, cell)) in self.scalars.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "\n    {}: {}", json_string(name), cell.to_json());
        }
        out.push_str("\n  },\n");
        out.push_str("  \"tables\": {");
        for (t_idx, table) in self.tables.iter().enumerate() {
            if t_idx > 0 {
                out.push(',');
            }
            let _ = write!(out, "\n    {}: {{\n      \"columns\": [", json_string(&table.name));
            for (k, c) in table.columns.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str(&json_string(c));
            }
            out.push_str("],\n      \"rows\": [");
            for (r_idx, row) in table.rows.iter().enumerate() {
                if r_idx > 0 {
                    out.push(',');
                }
                out.push_str("\n        [");
                for (k, cell) in row.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&cell.to_json());
                }
                out.push(']');
            }
            out.push_str("\n      ]\n    }");
        }
        out.push_str("\n  },\n");
        out.push_str("  \"checks\": [");
        for (k, c) in self.checks.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(
                out,
                "\n    {{\"name\": {}, \"passed\": {}, \"detail\": {}}}",
                json_string(&c.name),
                c.passed,
                json_string(&c.detail)
            );
        }
        out.push_str("\n  ],\n");
        out.push_str("  \"warnings\": [");
        for (k, w) in self.warnings.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push_str(&json_string(w));
        }
        out.push_str("]\n}\n");
        out
    }

    /// Write the data files into `dir`: one JSON document and one CSV per
    /// table. Returns the list of written paths.
    pub fn emit(&self, dir: &Path, formats: &[String]) -> io::Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if formats.iter().any(|f| f == "json") {
            let path = dir.join(format!("{}.json", self.subcommand));
            fs::write(&path, self.to_json())?;
            written.push(path.display().to_string());
        }
        if formats.iter().any(|f| f == "csv") {
            for table in &self.tables {
                let path = dir.join(format!("{}_{}.csv", self.subcommand, table.name));
                let mut out = String::new();
                out.push_str(&table.columns.join(","));
                out.push('\n');
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(|c| c.to_csv()).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                fs::write(&path, out)?;
                written.push(path.display().to_string());
            }
        }
        Ok(written)
    }

    /// Sidecar with runtime metadata; the one file allowed to differ
    /// between identical runs.
    pub fn emit_sidecar(&self, dir: &Path, wall_ms: u128) -> io::Result<()> {
        let body = format!(
            "{{\n  \"subcommand\": {},\n  \"config_hash\": {},\n  \"wall_time_ms\": {}\n}}\n",
            json_string(&self.subcommand),
            json_string(&self.config_hash),
            wall_ms
        );
        fs::write(dir.join("run_meta.json"), body)
    }
}

/// FNV-1a over the raw config bytes.
pub fn config_hash(raw: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in raw {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [std::f64::consts::PI, -1.0e-300, 4.9e-324, 0.1, 12345.6789] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn json_escapes_strings() {
        assert_eq!(json_string("a\"b\\c\n"), "\"a\\\"b\\\\c\\n\"");
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(config_hash(b"abc"), config_hash(b"abc"));
        assert_ne!(config_hash(b"abc"), config_hash(b"abd"));
    }
}
