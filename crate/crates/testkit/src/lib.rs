//! Brute-force reference implementations used as oracles by the unit,
//! property, and acceptance suites. Everything in this crate recomputes
//! results from first principles with the dumbest correct algorithm
//! available, deliberately sharing no code with the production paths it
//! checks.

use coopwatch_core::geometry::{BoundingBox, Detection};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub mod schema;
pub mod window;

/// IoU recomputed directly from corner arithmetic.
pub fn iou_of(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    let union = (a.x_max - a.x_min) * (a.y_max - a.y_min)
        + (b.x_max - b.x_min) * (b.y_max - b.y_min)
        - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// IoU estimated by rasterizing both boxes on an `n x n` cell grid spanning
/// their joint extent and counting cell centers. Converges to the analytic
/// value as `n` grows; used to validate the closed-form computation.
pub fn rasterized_iou(a: &BoundingBox, b: &BoundingBox, n: usize) -> f64 {
    let x0 = a.x_min.min(b.x_min);
    let y0 = a.y_min.min(b.y_min);
    let x1 = a.x_max.max(b.x_max);
    let y1 = a.y_max.max(b.y_max);
    if x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let dx = (x1 - x0) / n as f64;
    let dy = (y1 - y0) / n as f64;
    let inside = |bx: &BoundingBox, x: f64, y: f64| {
        x >= bx.x_min && x <= bx.x_max && y >= bx.y_min && y <= bx.y_max
    };
    let (mut in_a, mut in_b, mut in_both) = (0u64, 0u64, 0u64);
    for i in 0..n {
        let x = x0 + (i as f64 + 0.5) * dx;
        for j in 0..n {
            let y = y0 + (j as f64 + 0.5) * dy;
            let ia = inside(a, x, y);
            let ib = inside(b, x, y);
            in_a += ia as u64;
            in_b += ib as u64;
            in_both += (ia && ib) as u64;
        }
    }
    let union = in_a + in_b - in_both;
    if union == 0 {
        0.0
    } else {
        in_both as f64 / union as f64
    }
}

/// O(n^2) per-class suppression with an explicit suppressed-flag table.
/// Same ranking contract as the production path (confidence descending,
/// then class id, then input order); everything else is recomputed here.
pub fn reference_nms(detections: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .confidence
            .partial_cmp(&detections[a].confidence)
            .unwrap()
            .then(detections[a].class_id.cmp(&detections[b].class_id))
            .then(a.cmp(&b))
    });
    let mut suppressed = vec![false; order.len()];
    let mut out = Vec::new();
    for i in 0..order.len() {
        if suppressed[i] {
            continue;
        }
        let keep = &detections[order[i]];
        out.push(*keep);
        for j in (i + 1)..order.len() {
            if suppressed[j] {
                continue;
            }
            let other = &detections[order[j]];
            if other.class_id == keep.class_id && iou_of(&keep.bbox, &other.bbox) >= iou_threshold
            {
                suppressed[j] = true;
            }
        }
    }
    out
}

/// Exact area under the precision envelope for a ranked TP/FP sequence,
/// computed by a reverse scan that carries the running precision maximum.
///
/// `None` when the value is undefined (no ground truths and no detections).
pub fn exact_envelope_ap(ranked_tp: &[bool], n_gt: usize) -> Option<f64> {
    if n_gt == 0 {
        return if ranked_tp.is_empty() { None } else { Some(0.0) };
    }
    if ranked_tp.is_empty() {
        return Some(0.0);
    }
    let mut points = Vec::with_capacity(ranked_tp.len());
    let (mut tp, mut fp) = (0u64, 0u64);
    for &is_tp in ranked_tp {
        if is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        points.push((tp as f64 / n_gt as f64, tp as f64 / (tp + fp) as f64));
    }
    let mut ap = 0.0;
    let mut max_prec = 0.0;
    let mut recall_above = points.last().unwrap().0;
    for &(recall, precision) in points.iter().rev() {
        max_prec = f64::max(max_prec, precision);
        if recall < recall_above {
            ap += (recall_above - recall) * max_prec;
            recall_above = recall;
        }
    }
    // segment from recall 0 up to the first achieved recall
    ap += recall_above * max_prec;
    Some(ap)
}

/// Same quantity as [`exact_envelope_ap`] but assembled rectangle by
/// rectangle: for every distinct recall level the envelope height is found
/// with a full O(n^2) scan over all points at equal-or-higher recall.
pub fn rectangle_sum_ap(ranked_tp: &[bool], n_gt: usize) -> Option<f64> {
    if n_gt == 0 {
        return if ranked_tp.is_empty() { None } else { Some(0.0) };
    }
    if ranked_tp.is_empty() {
        return Some(0.0);
    }
    let mut points = Vec::with_capacity(ranked_tp.len());
    let (mut tp, mut fp) = (0u64, 0u64);
    for &is_tp in ranked_tp {
        if is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        points.push((tp as f64 / n_gt as f64, tp as f64 / (tp + fp) as f64));
    }
    let mut recalls: Vec<f64> = points.iter().map(|p| p.0).collect();
    recalls.sort_by(|a, b| a.partial_cmp(b).unwrap());
    recalls.dedup();
    let mut sum = 0.0;
    let mut prev = 0.0;
    for &r in &recalls {
        let height = points
            .iter()
            .filter(|p| p.0 >= r)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        sum += (r - prev) * height;
        prev = r;
    }
    Some(sum)
}

/// One precision/recall/F1 triple obtained by rescanning the whole
/// detection list at a single confidence cutoff.
pub fn sweep_point(dets: &[(f64, bool)], n_gt: usize, cutoff: f64) -> (f64, f64, f64) {
    let tp = dets.iter().filter(|(c, t)| *c >= cutoff && *t).count() as f64;
    let fp = dets.iter().filter(|(c, t)| *c >= cutoff && !*t).count() as f64;
    let precision = if tp + fp == 0.0 { 1.0 } else { tp / (tp + fp) };
    let recall = if n_gt == 0 { 0.0 } else { tp / n_gt as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

/// Brute-force confidence sweep: best (confidence, F1) over the grid,
/// preferring the smallest confidence on ties.
pub fn brute_force_best_f1(dets: &[(f64, bool)], n_gt: usize, grid: &[f64]) -> (f64, f64) {
    let mut best = (0.0, f64::MIN);
    for &c in grid {
        let (_, _, f1) = sweep_point(dets, n_gt, c);
        if f1 > best.1 {
            best = (c, f1);
        }
    }
    (best.0, best.1)
}

/// Class-agnostic confusion matrix built by repeatedly extracting the
/// globally best remaining (prediction, ground-truth) pair. Rows are
/// predicted classes, columns true classes, index `k` is background.
pub fn brute_force_confusion(
    preds: &[(usize, f64, BoundingBox)],
    gts: &[(usize, BoundingBox)],
    num_classes: usize,
    conf_threshold: f64,
    iou_threshold: f64,
) -> Vec<Vec<u64>> {
    let kept: Vec<&(usize, f64, BoundingBox)> =
        preds.iter().filter(|p| p.1 >= conf_threshold).collect();
    let mut matrix = vec![vec![0u64; num_classes + 1]; num_classes + 1];
    let mut pred_used = vec![false; kept.len()];
    let mut gt_used = vec![false; gts.len()];
    loop {
        // global best pair by IoU, ties by confidence then indices
        let mut best: Option<(usize, usize, f64)> = None;
        for (pi, p) in kept.iter().enumerate() {
            if pred_used[pi] {
                continue;
            }
            for (gi, g) in gts.iter().enumerate() {
                if gt_used[gi] {
                    continue;
                }
                let v = iou_of(&p.2, &g.1);
                if v < iou_threshold {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bpi, _, bv)) => {
                        v > bv || (v == bv && kept[pi].1 > kept[bpi].1)
                    }
                };
                if better {
                    best = Some((pi, gi, v));
                }
            }
        }
        match best {
            Some((pi, gi, _)) => {
                pred_used[pi] = true;
                gt_used[gi] = true;
                matrix[kept[pi].0][gts[gi].0] += 1;
            }
            None => break,
        }
    }
    for (pi, p) in kept.iter().enumerate() {
        if !pred_used[pi] {
            matrix[p.0][num_classes] += 1;
        }
    }
    for (gi, g) in gts.iter().enumerate() {
        if !gt_used[gi] {
            matrix[num_classes][g.0] += 1;
        }
    }
    matrix
}

/// Seeded generator for random test instances.
pub struct InstanceGen {
    rng: ChaCha8Rng,
}

impl InstanceGen {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn bbox(&mut self, extent: f64) -> BoundingBox {
        let x0 = self.rng.random_range(0.0..extent);
        let y0 = self.rng.random_range(0.0..extent);
        let w = self.rng.random_range(0.5..extent / 2.0);
        let h = self.rng.random_range(0.5..extent / 2.0);
        BoundingBox::new(x0, y0, x0 + w, y0 + h).unwrap()
    }

    pub fn detection(&mut self, extent: f64, num_classes: usize) -> Detection {
        let bbox = self.bbox(extent);
        let class_id = self.rng.random_range(0..num_classes);
        let confidence = self.rng.random_range(0.0..=1.0);
        Detection::new(bbox, class_id, confidence).unwrap()
    }

    pub fn detections(&mut self, n: usize, extent: f64, num_classes: usize) -> Vec<Detection> {
        (0..n).map(|_| self.detection(extent, num_classes)).collect()
    }
}
