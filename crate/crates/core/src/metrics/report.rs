// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Write};
use std::str::FromStr;

use super::cmos::CostReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown report format {s:?} (expected text, csv or json)")),
        }
    }
}

const COLUMNS: [&str; 5] = ["design", "crosstalk_T", "cmos_T", "reduction_pct", "paper_ref_pct"];

fn row(r: &CostReport) -> [String; 5] {
    [
        r.design.clone(),
        r.crosstalk_total.to_string(),
        r.cmos_total.to_string(),
        r.reduction_pct.clone().unwrap_or_else(|| "n/a".into()),
        r.annotation.as_ref().map(|a| a.paper_ref_pct.clone()).unwrap_or_default(),
    ]
}

/// Writes one row per report. JSON is an array of report objects.
pub fn emit_report(reports: &[CostReport], format: ReportFormat, sink: &mut dyn Write) -> io::Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(COLUMNS)?;
            for r in reports {
                w.write_record(row(r))?;
            }
            w.flush()
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *sink, reports)?;
            writeln!(sink)
        }
        ReportFormat::Text => {
            let rows: Vec<[String; 5]> = reports
                .iter()
                .map(|r| {
                    let mut cells = row(r);
                    for c in &mut cells[3..] {
                        if !c.is_empty() && c != "n/a" {
                            c.push('%');
                        }
                    }
                    cells
                })
                .collect();
            let mut widths: Vec<usize> = COLUMNS.iter().map(|c| c.len()).collect();
            for cells in &rows {
                for (w, c) in widths.iter_mut().zip(cells) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |cells: &[&str]| -> String {
                let mut s = format!("{:<w$}", cells[0], w = widths[0]);
                for (c, w) in cells[1..].iter().zip(&widths[1..]) {
                    s.push_str(&format!("  {c:>w$}"));
                }
                s.trim_end().to_string()
            };
            writeln!(sink, "{}", line(&COLUMNS))?;
            for cells in &rows {
                let refs: Vec<&str> = cells.iter().map(String::as_str).collect();
                writeln!(sink, "{}", line(&refs))?;
            }
            for r in reports {
                for d in &r.declared_costs {
                    writeln!(
                        sink,
                        "note: {}: {} uses declared cost {} (structural count {})",
                        r.design, d.template, d.declared, d.formula
                    )?;
                }
                for w in &r.warnings {
                    writeln!(sink, "warning: {}: {w}", r.design)?;
                }
            }
            Ok(())
        }
    }
}
