use std::fs;
use std::io::Write as _;

use setconv::report::Table;

use crate::context::Context;
use crate::error::CliError;
use crate::svg::Chart;

#[derive(Debug, Default)]
pub struct Report {
    /// `(file suffix, table)`; the first table usually has no suffix.
    pub tables: Vec<(Option<&'static str>, Table)>,
    /// Result lines appended to the configuration header.
    pub summary: Vec<(String, String)>,
    pub chart: Option<Chart>,
}

impl Report {
    pub fn table(table: Table) -> Self {
        Report { tables: vec![(None, table)], ..Default::default() }
    }

    pub fn with(mut self, suffix: &'static str, table: Table) -> Self {
        self.tables.push((Some(suffix), table));
        self
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }
}

pub fn emit(ctx: &Context, report: &Report) -> Result<(), CliError> {
    let mut header = ctx.header().to_vec();
    header.extend(report.summary.iter().cloned());
    match &ctx.out {
        None => {
            let mut stdout = std::io::stdout().lock();
            for (i, (suffix, table)) in report.tables.iter().enumerate() {
                if i > 0 {
                    let _ = writeln!(stdout);
                }
                let mut h = header.clone();
                if let Some(s) = suffix {
                    h.push(("table".into(), s.to_string()));
                }
                stdout.write_all(table.to_csv(&h).as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for (suffix, table) in &report.tables {
                let name = match suffix {
                    Some(s) => format!("{}_{s}.csv", ctx.demo),
                    None => format!("{}.csv", ctx.demo),
                };
                let path = dir.join(name);
                fs::write(&path, table.to_csv(&header))
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
            if let (true, Some(chart)) = (ctx.svg, &report.chart) {
                let path = dir.join(format!("{}.svg", ctx.demo));
                fs::write(&path, chart.render()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
        }
    }
    Ok(())
}
