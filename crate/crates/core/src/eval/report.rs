use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::score::MetricsReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Table2,
    Table3,
    ParseFig,
}

impl FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "table2" => Ok(Layout::Table2),
            "table3" => Ok(Layout::Table3),
            "parse_fig" | "parse" => Ok(Layout::ParseFig),
            _ => Err(format!("unknown layout {s:?} (table2, table3, parse_fig)")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("no reports given")]
    NoReports,
    #[error("report for {0:?} has no scored tasks")]
    NoTasks(String),
}

#[derive(Debug, Clone, Copy)]
enum Metric {
    Accuracy,
    Mae,
}

struct Column {
    title: &'static str,
    category: &'static str,
    metric: Metric,
}

const TABLE2: [Column; 5] = [
    Column { title: "Expression Acc", category: "expression", metric: Metric::Accuracy },
    Column { title: "Attribute Acc", category: "attribute", metric: Metric::Accuracy },
    Column { title: "AU Acc", category: "au", metric: Metric::Accuracy },
    Column { title: "Gender Acc", category: "gender", metric: Metric::Accuracy },
    Column { title: "Age MAE", category: "age", metric: Metric::Mae },
];

pub const ZERO_SHOT_CATEGORIES: [&str; 4] = ["eyelid_type", "eye_shape", "nose_shape", "lip_shape"];

const TABLE3: [Column; 4] = [
    Column { title: "Eyelid", category: "eyelid_type", metric: Metric::Accuracy },
    Column { title: "Eye", category: "eye_shape", metric: Metric::Accuracy },
    Column { title: "Nose", category: "nose_shape", metric: Metric::Accuracy },
    Column { title: "Lip", category: "lip_shape", metric: Metric::Accuracy },
];

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    pub table: String,
    pub summary: Value,
}

fn value(report: &MetricsReport, col: &Column) -> Option<f64> {
    let t = report.task(col.category)?;
    match col.metric {
        Metric::Accuracy => Some(t.accuracy),
        Metric::Mae => t.mae,
    }
}

fn cell(v: Option<f64>, metric: Metric) -> String {
    match (v, metric) {
        (None, _) => "-".to_string(),
        (Some(x), Metric::Accuracy) => format!("{:.1}", x * 100.0),
        (Some(x), Metric::Mae) => format!("{x:.2}"),
    }
}

/// Mean of the four zero-shot accuracies, when all are present.
pub fn zero_shot_mean(report: &MetricsReport) -> Option<f64> {
    let accs: Option<Vec<f64>> = ZERO_SHOT_CATEGORIES
        .iter()
        .map(|c| report.task(c).map(|t| t.accuracy))
        .collect();
    accs.map(|a| a.iter().sum::<f64>() / a.len() as f64)
}

fn markdown(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "| {} |", padded.join(" | "));
    };
    line(header.to_vec(), &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "|-{}-|", rule.join("-|-"));
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

/// One row per report in the requested layout, plus a JSON summary.
pub fn emit_report(reports: &[MetricsReport], layout: Layout) -> Result<RenderedReport, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::NoReports);
    }
    if let Some(r) = reports.iter().find(|r| r.tasks.is_empty()) {
        return Err(ReportError::NoTasks(r.endpoint_id.clone()));
    }
    let (header, rows, summary_rows): (Vec<&str>, Vec<Vec<String>>, Vec<Value>) = match layout {
        Layout::Table2 | Layout::Table3 => {
            let cols: &[Column] = if layout == Layout::Table2 { &TABLE2 } else { &TABLE3 };
            let mut header = vec!["Model"];
            header.extend(cols.iter().map(|c| c.title));
            if layout == Layout::Table3 {
                header.push("Mean Acc");
            }
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for r in reports {
                let mut row = vec![r.endpoint_id.clone()];
                let mut values = serde_json::Map::new();
                for c in cols {
                    let v = value(r, c);
                    row.push(cell(v, c.metric));
                    values.insert(c.category.to_string(), json!(v));
                }
                if layout == Layout::Table3 {
                    let m = zero_shot_mean(r);
                    row.push(cell(m, Metric::Accuracy));
                    values.insert("mean".to_string(), json!(m));
                }
                rows.push(row);
                summary.push(json!({ "model": r.endpoint_id, "benchmark": r.benchmark, "values": values }));
            }
            (header, rows, summary)
        }
        Layout::ParseFig => {
            let mut sorted: Vec<&MetricsReport> = reports.iter().collect();
            sorted.sort_by(|a, b| {
                a.overall
                    .parse_rate
                    .total_cmp(&b.overall.parse_rate)
                    .then_with(|| a.endpoint_id.cmp(&b.endpoint_id))
            });
            let rows = sorted
                .iter()
                .map(|r| vec![r.endpoint_id.clone(), cell(Some(r.overall.parse_rate), Metric::Accuracy)])
                .collect();
            let summary = sorted
                .iter()
                .map(|r| json!({ "model": r.endpoint_id, "benchmark": r.benchmark, "parse_rate": r.overall.parse_rate }))
                .collect();
            (vec!["Model", "Parse %"], rows, summary)
        }
    };
    Ok(RenderedReport {
        table: markdown(&header, &rows),
        summary: json!({ "layout": layout, "columns": header, "rows": summary_rows }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::score::{Overall, TaskStats};

    fn stats(category: &str, accuracy: f64, mae: Option<f64>) -> TaskStats {
        TaskStats {
            category: category.into(),
            n: 1000,
            n_parsed: 1000,
            n_correct: (accuracy * 1000.0).round() as u64,
            accuracy,
            parse_rate: 1.0,
            mae,
            mae_n: 1000,
            mae_excluded: 0,
            f1: None,
            confusion: None,
        }
    }

    fn report(id: &str, tasks: Vec<TaskStats>, parse_rate: f64) -> MetricsReport {
        MetricsReport {
            benchmark: "b".into(),
            endpoint_id: id.into(),
            seed: None,
            timestamp: None,
            tasks,
            overall: Overall { n: 1, n_parsed: 1, n_correct: 1, accuracy: 1.0, parse_rate },
            n_unscored: 0,
        }
    }

    #[test]
    fn missing_age_renders_dash() {
        let r = report("m", vec![stats("expression", 0.912, None), stats("gender", 0.985, None)], 1.0);
        let out = emit_report(&[r], Layout::Table2).unwrap();
        let row = out.table.lines().nth(2).unwrap();
        assert!(row.contains("91.2") && row.contains("98.5"));
        assert!(row.trim_end().ends_with("| -              |") || row.contains("| - "));
        assert_eq!(out.summary["rows"][0]["values"]["age"], Value::Null);
    }

    #[test]
    fn zero_shot_mean_column() {
        let tasks = [("eyelid_type", 0.593), ("eye_shape", 0.539), ("nose_shape", 0.653), ("lip_shape", 0.500)]
            .iter()
            .map(|(c, a)| stats(c, *a, None))
            .collect();
        let out = emit_report(&[report("m", tasks, 1.0)], Layout::Table3).unwrap();
        assert!(out.table.contains("57.1"));
        let mean = out.summary["rows"][0]["values"]["mean"].as_f64().unwrap();
        assert!((mean - 0.57125).abs() < 1e-12);
    }

    #[test]
    fn parse_fig_sorted_ascending() {
        let rs = [report("b", vec![stats("au", 0.5, None)], 0.9), report("a", vec![stats("au", 0.5, None)], 0.3)];
        let out = emit_report(&rs, Layout::ParseFig).unwrap();
        let lines: Vec<_> = out.table.lines().skip(2).collect();
        assert!(lines[0].contains("| a ") && lines[0].contains("30.0"));
        assert!(lines[1].contains("90.0"));
    }

    #[test]
    fn empty_reports_rejected() {
        assert_eq!(emit_report(&[], Layout::Table2).unwrap_err(), ReportError::NoReports);
        assert!(matches!(emit_report(&[report("m", vec![], 1.0)], Layout::Table3), Err(ReportError::NoTasks(_))));
    }
}
