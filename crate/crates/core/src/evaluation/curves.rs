//! Confidence-swept precision, recall, and F1 series.

use serde::{Deserialize, Serialize};

use super::{EvalError, MatchedDetection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Precision,
    Recall,
    F1,
}

/// One curve family: a series per class plus the pooled all-class series,
/// each sampled on the shared confidence grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceCurve {
    pub kind: CurveKind,
    pub per_class: Vec<Vec<(f64, f64)>>,
    pub all_classes: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestF1Point {
    pub confidence: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub precision: ConfidenceCurve,
    pub recall: ConfidenceCurve,
    pub f1: ConfidenceCurve,
    pub best_f1: BestF1Point,
}

/// Sweep the confidence cutoff across `grid`. At each cutoff `c` the
/// detections with confidence >= `c` are counted as TP or FP according to
/// their base-threshold match flag.
///
/// Conventions: precision is 1.0 when nothing is selected, recall is
/// TP / n_gt (0 for classes without ground truths), F1 is 2PR/(P+R) with 0
/// where P+R = 0. The best-F1 point is the argmax of the pooled all-class
/// F1 series, taking the smallest confidence on ties.
pub fn confidence_sweep(
    matched: &[MatchedDetection],
    gt_counts: &[usize],
    grid: &[f64],
) -> Result<SweepResult, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::InvalidConfidenceGrid("empty".into()));
    }
    for w in grid.windows(2) {
        if w[0] >= w[1] {
            return Err(EvalError::InvalidConfidenceGrid(format!(
                "not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
    }
    if grid.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
        return Err(EvalError::InvalidConfidenceGrid("values must lie in [0, 1]".into()));
    }

    let num_classes = gt_counts.len();
    let mut per_class_scored: Vec<Vec<(f64, bool)>> = vec![Vec::new(); num_classes];
    let mut pooled: Vec<(f64, bool)> = Vec::with_capacity(matched.len());
    for m in matched {
        let entry = (m.detection.confidence, m.tp_flags[0]);
        per_class_scored[m.detection.class_id].push(entry);
        pooled.push(entry);
    }
    let total_gt: usize = gt_counts.iter().sum();

    let mut precision = ConfidenceCurve {
        kind: CurveKind::Precision,
        per_class: Vec::with_capacity(num_classes),
        all_classes: Vec::new(),
    };
    let mut recall = ConfidenceCurve {
        kind: CurveKind::Recall,
        per_class: Vec::with_capacity(num_classes),
        all_classes: Vec::new(),
    };
    let mut f1 = ConfidenceCurve {
        kind: CurveKind::F1,
        per_class: Vec::with_capacity(num_classes),
        all_classes: Vec::new(),
    };

    for (class_id, scored) in per_class_scored.iter().enumerate() {
        let (p, r, f) = sweep_series(scored, gt_counts[class_id], grid);
        precision.per_class.push(p);
        recall.per_class.push(r);
        f1.per_class.push(f);
    }
    let (p_all, r_all, f_all) = sweep_series(&pooled, total_gt, grid);

    let mut best = BestF1Point { confidence: grid[0], f1: f64::MIN };
    for &(c, v) in &f_all {
        if v > best.f1 {
            best = BestF1Point { confidence: c, f1: v };
        }
    }
    precision.all_classes = p_all;
    recall.all_classes = r_all;
    f1.all_classes = f_all;

    Ok(SweepResult { precision, recall, f1, best_f1: best })
}

type Series = Vec<(f64, f64)>;

fn sweep_series(scored: &[(f64, bool)], n_gt: usize, grid: &[f64]) -> (Series, Series, Series) {
    // confidence descending, cumulative TP counts alongside
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let confs: Vec<f64> = sorted.iter().map(|s| s.0).collect();
    let mut cum_tp = Vec::with_capacity(sorted.len());
    let mut acc = 0u64;
    for &(_, is_tp) in &sorted {
        acc += is_tp as u64;
        cum_tp.push(acc);
    }

    let mut p_series = Vec::with_capacity(grid.len());
    let mut r_series = Vec::with_capacity(grid.len());
    let mut f_series = Vec::with_capacity(grid.len());
    for &c in grid {
        let k = confs.partition_point(|&x| x >= c);
        let tp = if k == 0 { 0 } else { cum_tp[k - 1] } as f64;
        let fp = k as f64 - tp;
        let p = if tp + fp == 0.0 { 1.0 } else { tp / (tp + fp) };
        let r = if n_gt == 0 { 0.0 } else { tp / n_gt as f64 };
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        p_series.push((c, p));
        r_series.push((c, r));
        f_series.push((c, f));
    }
    (p_series, r_series, f_series)
}
