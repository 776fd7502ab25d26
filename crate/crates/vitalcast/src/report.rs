//! Report emission: CSV, a markdown results table (methods by horizons),
//! and JSON with per-seed values.
//!
//! Every format is a pure function of the report, uses `\n` line endings
//! and ends with a newline.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use vitalcast_core::evaluation::{Cell, Metric, MetricsReport};

use crate::error::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self, AppError> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(AppError::Usage(format!("unknown report format '{other}' (expected csv, markdown or json)"))),
        }
    }
}

/// Render `report` in `format`.
pub fn emit_report(report: &MetricsReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Markdown => emit_markdown(report),
        ReportFormat::Json => emit_json(report),
    }
    .into_bytes()
}

/// Parse `format` and render; unknown formats are an error.
pub fn emit_report_named(report: &MetricsReport, format: &str) -> Result<Vec<u8>, AppError> {
    Ok(emit_report(report, format.parse()?))
}

/// `method,horizon,mse,mape,n_runs`, one line per (method, horizon) in row
/// then horizon order; generated horizons have empty metric fields.
fn emit_csv(report: &MetricsReport) -> String {
    let mut out = String::from("method,horizon,mse,mape,n_runs\n");
    for row in &report.rows {
        for (h, cell) in report.horizons.iter().zip(&row.cells) {
            let (mse, mape) = match cell {
                Some(c) => (c.mse.to_string(), c.mape.to_string()),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(out, "{},{h},{mse},{mape},{}", row.method.name(), report.n_runs());
        }
    }
    out
}

/// Table with one MSE and one MAPE (%) column per horizon. The lowest mean
/// of each column is bold; generated horizons show `--`.
fn emit_markdown(report: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Long-range prediction of {}: test MSE and MAPE (%), mean over {} run{}.",
        report.target.name(),
        report.n_runs(),
        if report.n_runs() == 1 { "" } else { "s" }
    );
    out.push('\n');
    out.push_str("| Method |");
    for h in &report.horizons {
        let _ = write!(out, " t+{h} MSE | t+{h} MAPE |");
    }
    out.push_str("\n|:---|");
    for _ in &report.horizons {
        out.push_str("---:|---:|");
    }
    out.push('\n');
    let best: Vec<[Option<usize>; 2]> = (0..report.horizons.len())
        .map(|i| [report.best_row(i, Metric::Mse), report.best_row(i, Metric::Mape)])
        .collect();
    for (r, row) in report.rows.iter().enumerate() {
        let _ = write!(out, "| {} |", row.method.label());
        for (i, cell) in row.cells.iter().enumerate() {
            match cell {
                Some(c) => {
                    for (m, v) in [c.mse, c.mape].into_iter().enumerate() {
                        if best[i][m] == Some(r) {
                            let _ = write!(out, " **{v:.2}** |");
                        } else {
                            let _ = write!(out, " {v:.2} |");
                        }
                    }
                }
                None => out.push_str(" -- | -- |"),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    target: &'a str,
    horizons: &'a [usize],
    seeds: &'a [u64],
    n_runs: usize,
    rows: Vec<JsonRow<'a>>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    method: String,
    label: String,
    cells: Vec<JsonCell<'a>>,
}

#[derive(Serialize)]
struct JsonCell<'a> {
    horizon: usize,
    generated: bool,
    #[serde(flatten)]
    values: Option<JsonValues<'a>>,
}

#[derive(Serialize)]
struct JsonValues<'a> {
    mse: f64,
    mape: f64,
    mse_std: f64,
    mape_std: f64,
    mse_per_seed: &'a [f64],
    mape_per_seed: &'a [f64],
    mape_excluded: usize,
    n_predictions: usize,
}

impl<'a> From<&'a Cell> for JsonValues<'a> {
    fn from(c: &'a Cell) -> Self {
        Self {
            mse: c.mse,
            mape: c.mape,
            mse_std: c.mse_std,
            mape_std: c.mape_std,
            mse_per_seed: &c.mse_per_seed,
            mape_per_seed: &c.mape_per_seed,
            mape_excluded: c.mape_excluded,
            n_predictions: c.n_predictions,
        }
    }
}

fn emit_json(report: &MetricsReport) -> String {
    let doc = JsonReport {
        target: report.target.name(),
        horizons: &report.horizons,
        seeds: &report.seeds,
        n_runs: report.n_runs(),
        rows: report
            .rows
            .iter()
            .map(|row| JsonRow {
                method: row.method.name(),
                label: row.method.label(),
                cells: report
                    .horizons
                    .iter()
                    .zip(&row.cells)
                    .map(|(&horizon, cell)| JsonCell {
                        horizon,
                        generated: cell.is_none(),
                        values: cell.as_ref().map(JsonValues::from),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use vitalcast_core::data::Vital;
    use vitalcast_core::evaluation::{Method, ReportRow};

    fn cell(mse: f64, mape: f64) -> Cell {
        Cell {
            mse,
            mape,
            mse_std: 0.0,
            mape_std: 0.0,
            mse_per_seed: vec![mse],
            mape_per_seed: vec![mape],
            mape_excluded: 0,
            n_predictions: 10,
        }
    }

    fn two_rows() -> MetricsReport {
        MetricsReport {
            target: Vital::HeartRate,
            horizons: vec![1, 2],
            seeds: vec![0],
            rows: vec![
                ReportRow { method: Method::LstmDirect, cells: vec![Some(cell(46.91, 6.69)), Some(cell(51.37, 7.52))] },
                ReportRow { method: Method::Glstm { depth: 1, mi: false }, cells: vec![None, Some(cell(47.31, 7.02))] },
            ],
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = MetricsReport::empty(Vital::HeartRate, vec![1]);
        assert_eq!(emit_report(&r, ReportFormat::Csv), b"method,horizon,mse,mape,n_runs\n");
        let md = String::from_utf8(emit_report(&r, ReportFormat::Markdown)).unwrap();
        assert!(md.ends_with("| Method | t+1 MSE | t+1 MAPE |\n|:---|---:|---:|\n"));
    }

    #[test]
    fn single_cell_report() {
        let r = MetricsReport {
            target: Vital::HeartRate,
            horizons: vec![1],
            seeds: vec![3],
            rows: vec![ReportRow { method: Method::Arima, cells: vec![Some(cell(2.5, 1.25))] }],
        };
        let csv = emit_report(&r, ReportFormat::Csv);
        assert_eq!(csv, b"method,horizon,mse,mape,n_runs\narima,1,2.5,1.25,1\n");
        assert_eq!(csv, emit_report(&r, ReportFormat::Csv));
    }

    #[test]
    fn best_cells_are_bold_and_generated_cells_blank() {
        let md = String::from_utf8(emit_report(&two_rows(), ReportFormat::Markdown)).unwrap();
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[4], "| LSTM | **46.91** | **6.69** | 51.37 | 7.52 |");
        assert_eq!(lines[5], "| GLSTM-G1 | -- | -- | **47.31** | **7.02** |");
    }

    #[test]
    fn csv_leaves_generated_cells_empty() {
        let csv = String::from_utf8(emit_report(&two_rows(), ReportFormat::Csv)).unwrap();
        assert!(csv.contains("glstm-g1,1,,,1\n"));
        assert!(csv.contains("glstm-g1,2,47.31,7.02,1\n"));
    }

    #[test]
    fn json_carries_per_seed_values() {
        let v: serde_json::Value = serde_json::from_slice(&emit_report(&two_rows(), ReportFormat::Json)).unwrap();
        assert_eq!(v["rows"][0]["cells"][0]["mse_per_seed"][0], 46.91);
        assert_eq!(v["rows"][1]["cells"][0]["generated"], true);
        assert!(v["rows"][1]["cells"][0].get("mse").is_none());
        assert_eq!(v["rows"][1]["label"], "GLSTM-G1");
    }

    #[test]
    fn krr_is_labelled_as_a_substitute() {
        let r = MetricsReport {
            target: Vital::Sbp,
            horizons: vec![1],
            seeds: vec![0],
            rows: vec![ReportRow { method: Method::Krr, cells: vec![Some(cell(1.0, 1.0))] }],
        };
        let md = String::from_utf8(emit_report(&r, ReportFormat::Markdown)).unwrap();
        assert!(md.contains("| KRR (SVR substitute) |"));
    }

    #[test]
    fn unknown_format_is_an_error() {
        assert!(emit_report_named(&two_rows(), "xlsx").is_err());
        assert_eq!("md".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
    }
}
