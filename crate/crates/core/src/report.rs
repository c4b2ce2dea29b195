//! CSV tables with a configuration header.
//!
//! A report file starts with `# key = value` lines holding the resolved
//! configuration, then a header row, then data rows. Floating-point values use
//! Rust's shortest round-trip formatting, so infinities print as `inf` and
//! identical runs produce identical bytes.

use std::fmt::Write as _;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column by header name.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    /// Renders the table, preceded by one `# key = value` line per config entry.
    pub fn to_csv(&self, config: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in config {
            let _ = writeln!(out, "# {k} = {}", v.replace('\n', " "));
        }
        write_row(&mut out, &self.header);
        for r in &self.rows {
            write_row(&mut out, r);
        }
        out
    }
}

fn write_row(out: &mut String, cells: &[String]) {
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if c.contains([',', '"', '\n']) {
            out.push('"');
            out.push_str(&c.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(c);
        }
    }
    out.push('\n');
}

/// Formats a float the way every report does.
pub fn fmt_f64(v: f64) -> String {
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_header_config_and_quotes() {
        let mut t = Table::new(["a", "b"]);
        t.push(["1", "x,y"]);
        t.push([fmt_f64(f64::INFINITY), fmt_f64(0.5)]);
        let csv = t.to_csv(&[("rho".into(), "2".into())]);
        assert_eq!(csv, "# rho = 2\na,b\n1,\"x,y\"\ninf,0.5\n");
        assert_eq!(t.column("b").unwrap(), vec!["x,y", "0.5"]);
    }
}
