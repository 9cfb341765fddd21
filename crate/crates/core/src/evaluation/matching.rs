//! Greedy prediction/ground-truth matching for one image.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::geometry::{iou, BoundingBox, Detection};

/// A detection annotated with its match outcome. `tp_flags[k]` says whether
/// the detection counts as a true positive at `iou_grid[k]`; the flags are
/// monotone non-increasing along the (ascending) grid by construction,
/// because they all derive from the IoU of a single matched pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedDetection {
    pub detection: Detection,
    pub image_id: String,
    pub tp_flags: Vec<bool>,
    /// Index into the image's ground-truth list, when matched at the base
    /// (lowest) grid threshold.
    pub matched_gt_index: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MatchOutcome {
    /// Matched detections ranked by confidence descending.
    pub matched: Vec<MatchedDetection>,
    /// Ground-truth instance count per class id.
    pub gt_counts: Vec<usize>,
}

/// Match one image's predictions against its ground truths.
///
/// Predictions are taken in confidence-descending order (stable on ties).
/// Each prediction claims the unmatched same-class ground truth with the
/// highest IoU, provided that IoU reaches the base grid threshold; each
/// ground truth is claimed at most once. Flags for the higher thresholds
/// compare the matched pair's IoU against each grid value, which keeps the
/// TP flags monotone across the grid. Unmatched predictions are false
/// positives; unclaimed ground truths are false negatives.
pub fn match_detections(
    image_id: &str,
    preds: &[Detection],
    gts: &[(usize, BoundingBox)],
    iou_grid: &[f64],
    num_classes: usize,
) -> Result<MatchOutcome, EvalError> {
    if iou_grid.is_empty() {
        return Err(EvalError::InvalidGrid("empty".into()));
    }
    for w in iou_grid.windows(2) {
        if w[0] >= w[1] {
            return Err(EvalError::InvalidGrid(format!(
                "not strictly ascending at {} >= {}",
                w[0], w[1]
            )));
        }
    }
    if iou_grid.iter().any(|&t| t <= 0.0 || t > 1.0) {
        return Err(EvalError::InvalidGrid("thresholds must lie in (0, 1]".into()));
    }

    let mut gt_counts = vec![0usize; num_classes];
    for (class_id, _) in gts {
        if *class_id >= num_classes {
            return Err(EvalError::UnknownClass { class_id: *class_id, num_classes });
        }
        gt_counts[*class_id] += 1;
    }

    let base = iou_grid[0];
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        preds[b].confidence.partial_cmp(&preds[a].confidence).unwrap().then(a.cmp(&b))
    });

    let mut gt_taken = vec![false; gts.len()];
    let mut matched = Vec::with_capacity(preds.len());
    for idx in order {
        let pred = &preds[idx];
        if pred.class_id >= num_classes {
            return Err(EvalError::UnknownClass { class_id: pred.class_id, num_classes });
        }
        let mut best: Option<(usize, f64)> = None;
        for (gi, (gt_class, gt_box)) in gts.iter().enumerate() {
            if gt_taken[gi] || *gt_class != pred.class_id {
                continue;
            }
            let v = iou(&pred.bbox, gt_box);
            if v < base {
                continue;
            }
            // strict > keeps the smallest index on IoU ties
            if best.map_or(true, |(_, bv)| v > bv) {
                best = Some((gi, v));
            }
        }
        let (matched_gt_index, matched_iou) = match best {
            Some((gi, v)) => {
                gt_taken[gi] = true;
                (Some(gi), v)
            }
            None => (None, 0.0),
        };
        let tp_flags = iou_grid
            .iter()
            .map(|&t| matched_gt_index.is_some() && matched_iou >= t)
            .collect();
        matched.push(MatchedDetection {
            detection: *pred,
            image_id: image_id.to_string(),
            tp_flags,
            matched_gt_index,
        });
    }
    Ok(MatchOutcome { matched, gt_counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    fn grid() -> Vec<f64> {
        (50..=95).step_by(5).map(|p| p as f64 / 100.0).collect()
    }

    #[test]
    fn exact_cover_is_tp_at_every_threshold() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let preds = [Detection::new(b, 1, 0.9).unwrap()];
        let outcome = match_detections("img", &preds, &[(1, b)], &grid(), 4).unwrap();
        assert!(outcome.matched[0].tp_flags.iter().all(|&f| f));
        assert_eq!(outcome.matched[0].matched_gt_index, Some(0));
        assert_eq!(outcome.gt_counts, vec![0, 1, 0, 0]);
    }

    #[test]
    fn higher_confidence_wins_contested_gt() {
        // both predictions overlap the single GT with IoU 10/15 ≈ 0.67
        let gt_box = bx(0.0, 0.0, 12.5, 1.0);
        let shifted_hi = bx(2.5, 0.0, 15.0, 1.0);
        let shifted_lo = bx(2.5, 0.0, 15.0, 1.0);
        let preds = [
            Detection::new(shifted_lo, 0, 0.8).unwrap(),
            Detection::new(shifted_hi, 0, 0.9).unwrap(),
        ];
        let outcome = match_detections("img", &preds, &[(0, gt_box)], &grid(), 1).unwrap();
        // ranked by confidence: 0.9 first
        assert_eq!(outcome.matched[0].detection.confidence, 0.9);
        assert!(outcome.matched[0].tp_flags[0]);
        assert!(!outcome.matched[1].tp_flags[0]);
    }

    #[test]
    fn class_mismatch_is_fp_even_with_perfect_overlap() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        let preds = [Detection::new(b, 0, 0.9).unwrap()];
        let outcome = match_detections("img", &preds, &[(1, b)], &grid(), 2).unwrap();
        assert!(outcome.matched[0].tp_flags.iter().all(|&f| !f));
        assert_eq!(outcome.matched[0].matched_gt_index, None);
        assert_eq!(outcome.gt_counts, vec![0, 1]);
    }

    #[test]
    fn prediction_takes_highest_iou_gt() {
        let pred_box = bx(0.0, 0.0, 10.0, 10.0);
        let close = bx(1.0, 0.0, 11.0, 10.0);
        let far = bx(4.0, 0.0, 14.0, 10.0);
        let preds = [Detection::new(pred_box, 0, 0.9).unwrap()];
        let outcome =
            match_detections("img", &preds, &[(0, far), (0, close)], &grid(), 1).unwrap();
        assert_eq!(outcome.matched[0].matched_gt_index, Some(1));
    }

    #[test]
    fn flags_are_monotone_non_increasing() {
        // IoU ≈ 0.67: TP at 0.50..0.65, FP above
        let gt_box = bx(0.0, 0.0, 12.5, 1.0);
        let pred_box = bx(2.5, 0.0, 15.0, 1.0);
        let preds = [Detection::new(pred_box, 0, 0.9).unwrap()];
        let outcome = match_detections("img", &preds, &[(0, gt_box)], &grid(), 1).unwrap();
        let flags = &outcome.matched[0].tp_flags;
        assert!(flags.windows(2).all(|w| w[0] >= w[1]), "{flags:?}");
        assert!(flags[0] && !flags[9]);
    }

    #[test]
    fn rejects_unsorted_grid() {
        let preds: [Detection; 0] = [];
        assert!(match_detections("img", &preds, &[], &[0.9, 0.5], 1).is_err());
        assert!(match_detections("img", &preds, &[], &[], 1).is_err());
    }
}
