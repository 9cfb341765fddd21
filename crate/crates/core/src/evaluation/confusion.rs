//! Detection confusion matrix with a background class, built from
//! class-agnostic spatial matching.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EvalError, GroundTruth, ImageDetection};
use crate::dataset::ClassMap;
use crate::geometry::iou;

/// `counts[pred][truth]` over class ids, with index `num_classes` standing
/// for background on both axes. Rows are predicted classes, columns true
/// classes; the (background, background) cell is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub conf_threshold: f64,
    pub iou_threshold: f64,
    pub num_classes: usize,
}

impl ConfusionMatrix {
    pub fn background_index(&self) -> usize {
        self.num_classes
    }

    pub fn count(&self, predicted: usize, truth: usize) -> u64 {
        self.counts[predicted][truth]
    }

    /// Sum of each true-class column; equals the ground-truth instance
    /// count per class.
    pub fn true_class_totals(&self) -> Vec<u64> {
        (0..self.num_classes)
            .map(|c| self.counts.iter().map(|row| row[c]).sum())
            .collect()
    }
}

/// Build the confusion matrix. Predictions below `conf_threshold` are
/// dropped; within each image the remaining predictions are matched to
/// ground truths ignoring class, highest IoU first (ties broken by higher
/// prediction confidence, then prediction order, then ground-truth order),
/// each side used at most once, requiring IoU >= `iou_threshold`. A matched
/// pair increments (predicted class, true class); leftovers go to the
/// background row or column.
pub fn confusion_matrix(
    detections: &[ImageDetection],
    ground_truths: &[GroundTruth],
    class_map: &ClassMap,
    conf_threshold: f64,
    iou_threshold: f64,
) -> Result<ConfusionMatrix, EvalError> {
    for (name, t) in [("confidence", conf_threshold), ("iou", iou_threshold)] {
        if !(t > 0.0 && t <= 1.0) {
            return Err(EvalError::InvalidGrid(format!(
                "confusion {name} threshold must lie in (0, 1], got {t}"
            )));
        }
    }
    let num_classes = class_map.len();
    let mut counts = vec![vec![0u64; num_classes + 1]; num_classes + 1];

    let mut by_image: BTreeMap<&str, (Vec<&ImageDetection>, Vec<&GroundTruth>)> = BTreeMap::new();
    for d in detections {
        if !class_map.contains_id(d.detection.class_id) {
            return Err(EvalError::UnknownClass { class_id: d.detection.class_id, num_classes });
        }
        if d.detection.confidence >= conf_threshold {
            by_image.entry(d.image_id.as_str()).or_default().0.push(d);
        }
    }
    for g in ground_truths {
        if !class_map.contains_id(g.class_id) {
            return Err(EvalError::UnknownClass { class_id: g.class_id, num_classes });
        }
        by_image.entry(g.image_id.as_str()).or_default().1.push(g);
    }

    for (_, (preds, gts)) in by_image {
        let mut pairs = Vec::new();
        for (pi, p) in preds.iter().enumerate() {
            for (gi, g) in gts.iter().enumerate() {
                let v = iou(&p.detection.bbox, &g.bbox);
                if v >= iou_threshold {
                    pairs.push((pi, gi, v));
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.2.partial_cmp(&a.2)
                .unwrap()
                .then_with(|| {
                    preds[b.0]
                        .detection
                        .confidence
                        .partial_cmp(&preds[a.0].detection.confidence)
                        .unwrap()
                })
                .then(a.0.cmp(&b.0))
                .then(a.1.cmp(&b.1))
        });
        let mut pred_used = vec![false; preds.len()];
        let mut gt_used = vec![false; gts.len()];
        for (pi, gi, _) in pairs {
            if pred_used[pi] || gt_used[gi] {
                continue;
            }
            pred_used[pi] = true;
            gt_used[gi] = true;
            counts[preds[pi].detection.class_id][gts[gi].class_id] += 1;
        }
        for (pi, p) in preds.iter().enumerate() {
            if !pred_used[pi] {
                counts[p.detection.class_id][num_classes] += 1;
            }
        }
        for (gi, g) in gts.iter().enumerate() {
            if !gt_used[gi] {
                counts[num_classes][g.class_id] += 1;
            }
        }
    }

    Ok(ConfusionMatrix { counts, conf_threshold, iou_threshold, num_classes })
}
