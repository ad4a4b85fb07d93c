//! Benchmark result tables and their renderers.
//!
//! The table carries the baseline's absolute MSE/MAE and one signed
//! delta row per strategy (strategy metric minus baseline metric), so a
//! negative delta is an improvement. Deltas render in scientific
//! notation with three significant digits, e.g. `-6.38E-03`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ReportFormat;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write report {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("report parse error: {0}")]
    Parse(String),
}

/// One strategy's mean deltas against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub name: String,
    pub delta_mse: f64,
    pub delta_mae: f64,
}

/// The full bench result: dataset label, baseline absolutes, and one
/// delta row per configured strategy (seeds already averaged).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub dataset: String,
    pub baseline_mse: f64,
    pub baseline_mae: f64,
    pub rows: Vec<DeltaRow>,
}

/// Scientific notation, 3 significant digits, two-digit signed
/// exponent: `-6.38E-03`, `0.00E+00`.
pub fn sci3(x: f64) -> String {
    if x == 0.0 {
        return "0.00E+00".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sign = if x < 0.0 { "-" } else { "" };
    let mag = x.abs();
    let mut exp = mag.log10().floor() as i32;
    let mut mantissa = mag / 10f64.powi(exp);
    // Rounding to 2 decimals can carry the mantissa to 10.00.
    mantissa = (mantissa * 100.0).round() / 100.0;
    if mantissa >= 10.0 {
        mantissa /= 10.0;
        exp += 1;
    }
    format!("{sign}{mantissa:.2}E{}{:02}", if exp < 0 { "-" } else { "+" }, exp.abs())
}

fn render_csv(rt: &ResultTable) -> String {
    let mut out = String::from("row,mse,mae\n");
    out.push_str(&format!(
        "baseline,{},{}\n",
        rt.baseline_mse, rt.baseline_mae
    ));
    for row in &rt.rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.name,
            sci3(row.delta_mse),
            sci3(row.delta_mae)
        ));
    }
    out
}

/// Index of the most negative delta per column, if any row improves.
fn best_indices(rt: &ResultTable) -> (Option<usize>, Option<usize>) {
    let mut best_mse: Option<usize> = None;
    let mut best_mae: Option<usize> = None;
    for (i, row) in rt.rows.iter().enumerate() {
        if row.delta_mse.is_finite()
            && best_mse.map_or(true, |b| row.delta_mse < rt.rows[b].delta_mse)
        {
            best_mse = Some(i);
        }
        if row.delta_mae.is_finite()
            && best_mae.map_or(true, |b| row.delta_mae < rt.rows[b].delta_mae)
        {
            best_mae = Some(i);
        }
    }
    (best_mse, best_mae)
}

fn render_md(rt: &ResultTable) -> String {
    let mut out = format!("# Benchmark: {}\n\n", rt.dataset);
    out.push_str("| row | MSE | MAE |\n|---|---|---|\n");
    out.push_str(&format!(
        "| baseline | {} | {} |\n",
        rt.baseline_mse, rt.baseline_mae
    ));
    let (best_mse, best_mae) = best_indices(rt);
    for (i, row) in rt.rows.iter().enumerate() {
        let mse = if Some(i) == best_mse {
            format!("**{}**", sci3(row.delta_mse))
        } else {
            sci3(row.delta_mse)
        };
        let mae = if Some(i) == best_mae {
            format!("**{}**", sci3(row.delta_mae))
        } else {
            sci3(row.delta_mae)
        };
        out.push_str(&format!("| {} | {} | {} |\n", row.name, mse, mae));
    }
    out.push_str("\nNegative deltas improve on the baseline; the best delta per column is bold.\n");
    out
}

/// Renders the table in the requested format without touching disk.
pub fn render_report(rt: &ResultTable, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(rt),
        ReportFormat::Md => render_md(rt),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rt).expect("serializable");
            s.push('\n');
            s
        }
    }
}

pub fn emit_report(rt: &ResultTable, format: ReportFormat, path: &Path) -> Result<(), ReportError> {
    std::fs::write(path, render_report(rt, format)).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a JSON report back into a table (`parse(emit(rt)) == rt`).
pub fn report_from_json(json: &str) -> Result<ResultTable, ReportError> {
    serde_json::from_str(json).map_err(|e| ReportError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        ResultTable {
            dataset: "synthetic".to_string(),
            baseline_mse: 0.445051,
            baseline_mae: 0.432,
            rows: vec![
                DeltaRow {
                    name: "jitter".to_string(),
                    delta_mse: 0.0021,
                    delta_mae: 0.001,
                },
                DeltaRow {
                    name: "ima_mlp".to_string(),
                    delta_mse: 0.438671 - 0.445051,
                    delta_mae: -0.002,
                },
            ],
        }
    }

    #[test]
    fn sci3_matches_table_convention() {
        assert_eq!(sci3(0.438671 - 0.445051), "-6.38E-03");
        assert_eq!(sci3(0.0), "0.00E+00");
        assert_eq!(sci3(-0.0), "0.00E+00");
        assert_eq!(sci3(1.0), "1.00E+00");
        assert_eq!(sci3(-123.4), "-1.23E+02");
        assert_eq!(sci3(0.0099999), "1.00E-02");
        assert_eq!(sci3(9.999e-3), "1.00E-02");
        assert_eq!(sci3(2.5e-13), "2.50E-13");
    }

    #[test]
    fn csv_layout() {
        let text = render_report(&sample(), ReportFormat::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "row,mse,mae");
        assert!(lines[1].starts_with("baseline,0.445051,"));
        assert_eq!(lines[3], "ima_mlp,-6.38E-03,-2.00E-03");
    }

    #[test]
    fn md_marks_best_per_column() {
        let text = render_report(&sample(), ReportFormat::Md);
        assert!(text.contains("| ima_mlp | **-6.38E-03** | **-2.00E-03** |"));
        assert!(text.contains("| jitter | 2.10E-03 | 1.00E-03 |"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rt = sample();
        let text = render_report(&rt, ReportFormat::Json);
        let back = report_from_json(&text).unwrap();
        assert_eq!(rt, back);
    }

    #[test]
    fn zero_delta_renders_as_zero() {
        let mut rt = sample();
        rt.rows[0].delta_mse = 0.0;
        let text = render_report(&rt, ReportFormat::Csv);
        assert!(text.contains("jitter,0.00E+00,"));
    }
}
