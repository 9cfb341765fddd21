//! Report rendering: fixed-width text tables and RFC 4180 CSV exports for
//! the curve families and the confusion matrix, plus a machine-readable
//! summary document.

use serde::Serialize;

use super::{
    BestF1Point, ClassMetrics, ConfidenceCurve, ConfusionMatrix, EvalResult, OverallMetrics,
    PRCurve,
};
use crate::dataset::ClassMap;

fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt3).unwrap_or_else(|| "n/a".into())
}

/// Per-class table: one row per class with precision, recall, and the two
/// AP columns, values rounded to 3 decimals, undefined AP rendered "n/a".
pub fn render_per_class_table(per_class: &[ClassMetrics], class_map: &ClassMap) -> String {
    let mut rows: Vec<[String; 5]> = vec![[
        "Class".into(),
        "Precision".into(),
        "Recall".into(),
        "mAP@0.5".into(),
        "mAP@0.5-0.95".into(),
    ]];
    for m in per_class {
        rows.push([
            class_map.name(m.class_id).unwrap_or("?").to_string(),
            fmt3(m.precision),
            fmt3(m.recall),
            fmt_opt(m.ap50),
            fmt_opt(m.ap50_95),
        ]);
    }
    layout(&rows)
}

/// Overall table: metric name / value pairs.
pub fn render_overall_table(overall: &OverallMetrics) -> String {
    let rows: Vec<[String; 2]> = vec![
        ["Metric".into(), "Value".into()],
        ["Precision (P)".into(), fmt3(overall.precision)],
        ["Recall (R)".into(), fmt3(overall.recall)],
        ["mAP@0.5".into(), fmt3(overall.map50)],
        ["mAP@0.5-0.95".into(), fmt3(overall.map50_95)],
    ];
    layout(&rows)
}

fn layout<const N: usize>(rows: &[[String; N]]) -> String {
    let mut widths = [0usize; N];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if i == 0 {
                out.push_str(&format!("{cell:<width$}", width = widths[i]));
            } else {
                out.push_str(&format!("  {cell:>width$}", width = widths[i]));
            }
        }
        out.push('\n');
    }
    out
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    let escaped: Vec<String> = fields.iter().map(|f| csv_escape(f)).collect();
    format!("{}\r\n", escaped.join(","))
}

/// One confidence-swept curve family as CSV: an `x` column, one column per
/// class, then the pooled all-class column. Row count equals the grid
/// length.
pub fn confidence_curve_csv(curve: &ConfidenceCurve, class_map: &ClassMap) -> String {
    let mut header = vec!["confidence".to_string()];
    header.extend(class_map.names().iter().cloned());
    header.push("all_classes".into());
    let mut out = csv_row(&header);
    for (i, &(x, all)) in curve.all_classes.iter().enumerate() {
        let mut row = vec![x.to_string()];
        for series in &curve.per_class {
            row.push(series[i].1.to_string());
        }
        row.push(all.to_string());
        out.push_str(&csv_row(&row));
    }
    out
}

/// PR curves sampled on the 101-point recall grid via the monotone
/// precision envelope. Classes with no points render empty cells; the
/// all-class column is the mean over classes that have one.
pub fn pr_curves_csv(pr_curves: &[PRCurve], class_map: &ClassMap) -> String {
    let sampled: Vec<Option<Vec<f64>>> = pr_curves
        .iter()
        .map(|c| {
            if c.points.is_empty() {
                None
            } else {
                Some(super::ap::sample_envelope_101(&c.points))
            }
        })
        .collect();

    let mut header = vec!["recall".to_string()];
    header.extend(class_map.names().iter().cloned());
    header.push("all_classes".into());
    let mut out = csv_row(&header);
    for i in 0..=100usize {
        let r = i as f64 / 100.0;
        let mut row = vec![r.to_string()];
        let mut sum = 0.0;
        let mut n = 0usize;
        for s in &sampled {
            match s {
                Some(vals) => {
                    row.push(vals[i].to_string());
                    sum += vals[i];
                    n += 1;
                }
                None => row.push(String::new()),
            }
        }
        row.push(if n == 0 { String::new() } else { (sum / n as f64).to_string() });
        out.push_str(&csv_row(&row));
    }
    out
}

/// Confusion matrix as CSV: rows are predicted classes plus background,
/// columns are true classes plus background.
pub fn confusion_csv(matrix: &ConfusionMatrix, class_map: &ClassMap) -> String {
    let mut labels: Vec<String> = class_map.names().to_vec();
    labels.push("background".into());
    let mut header = vec!["predicted".to_string()];
    header.extend(labels.iter().cloned());
    let mut out = csv_row(&header);
    for (row_idx, label) in labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        for col_idx in 0..labels.len() {
            row.push(matrix.counts[row_idx][col_idx].to_string());
        }
        out.push_str(&csv_row(&row));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct SummaryRow {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub ap50: Option<f64>,
    pub ap50_95: Option<f64>,
    pub gt_count: usize,
}

#[derive(Debug, Serialize)]
pub struct ConfusionSummary {
    pub conf_threshold: f64,
    pub iou_threshold: f64,
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

/// Machine-readable companion to the text tables.
#[derive(Debug, Serialize)]
pub struct EvalSummary {
    pub classes: Vec<String>,
    pub per_class: Vec<SummaryRow>,
    pub overall: OverallMetrics,
    pub best_f1: BestF1Point,
    pub confusion: ConfusionSummary,
}

pub fn build_summary(
    result: &EvalResult,
    confusion: &ConfusionMatrix,
    class_map: &ClassMap,
) -> EvalSummary {
    let mut labels: Vec<String> = class_map.names().to_vec();
    labels.push("background".into());
    EvalSummary {
        classes: class_map.names().to_vec(),
        per_class: result
            .per_class
            .iter()
            .map(|m| SummaryRow {
                class: class_map.name(m.class_id).unwrap_or("?").to_string(),
                precision: m.precision,
                recall: m.recall,
                ap50: m.ap50,
                ap50_95: m.ap50_95,
                gt_count: result.gt_counts[m.class_id],
            })
            .collect(),
        overall: result.overall.clone(),
        best_f1: result.sweep.best_f1,
        confusion: ConfusionSummary {
            conf_threshold: confusion.conf_threshold,
            iou_threshold: confusion.iou_threshold,
            labels,
            counts: confusion.counts.clone(),
        },
    }
}
