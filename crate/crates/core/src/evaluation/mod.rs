//! Detection evaluation: greedy matching against ground truth, average
//! precision with 101-point interpolation, confidence-swept
//! precision/recall/F1 curves, class-agnostic confusion matrices, and the
//! per-class / macro-averaged report tables.

mod ap;
mod confusion;
mod curves;
mod matching;
pub mod report;

pub use ap::{average_precision, RankedDetection};
pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use curves::{confidence_sweep, BestF1Point, ConfidenceCurve, CurveKind, SweepResult};
pub use matching::{match_detections, MatchOutcome, MatchedDetection};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ClassMap, LabeledImage};
use crate::geometry::{norm_to_pixel, BoundingBox, Detection, GeometryError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("nothing to evaluate: every class has an empty ground-truth set")]
    NothingToEvaluate,
    #[error("ranked input is not sorted by (confidence desc, image_id, x_min) at rank {0}")]
    UnsortedInput(usize),
    #[error("invalid iou grid: {0}")]
    InvalidGrid(String),
    #[error("invalid confidence grid: {0}")]
    InvalidConfidenceGrid(String),
    #[error("unknown class id {class_id} (class map has {num_classes} classes)")]
    UnknownClass { class_id: usize, num_classes: usize },
    #[error("{path} line {line}: {message}")]
    DetectionParse { path: String, line: usize, message: String },
    #[error("io error for {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// An annotated truth box in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub image_id: String,
    pub class_id: usize,
    pub bbox: BoundingBox,
}

/// A detection tied to the image it was produced for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageDetection {
    pub image_id: String,
    #[serde(flatten)]
    pub detection: Detection,
}

/// Wire format for the detections input file: JSON Lines, one object per
/// detection, boxes as `[x_min, y_min, x_max, y_max]` in pixels.
#[derive(Debug, Serialize, Deserialize)]
struct DetectionRecord {
    image_id: String,
    class_id: usize,
    confidence: f64,
    #[serde(rename = "box")]
    bbox: [f64; 4],
}

/// Evaluation settings. The defaults follow the common detector
/// conventions: IoU grid 0.50..=0.95 in steps of 0.05, a 1001-point
/// confidence grid, and a 0.25 reporting threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub iou_grid: Vec<f64>,
    pub confidence_grid: Vec<f64>,
    pub reporting_confidence: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_grid: (50..=95).step_by(5).map(|p| p as f64 / 100.0).collect(),
            confidence_grid: (0..=1000).map(|i| i as f64 / 1000.0).collect(),
            reporting_confidence: 0.25,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.iou_grid.is_empty() {
            return Err(EvalError::InvalidGrid("empty".into()));
        }
        for w in self.iou_grid.windows(2) {
            if w[0] >= w[1] {
                return Err(EvalError::InvalidGrid(format!(
                    "not strictly ascending at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        if self.iou_grid.iter().any(|&t| t <= 0.0 || t > 1.0) {
            return Err(EvalError::InvalidGrid("thresholds must lie in (0, 1]".into()));
        }
        if self.confidence_grid.is_empty() {
            return Err(EvalError::InvalidConfidenceGrid("empty".into()));
        }
        for w in self.confidence_grid.windows(2) {
            if w[0] >= w[1] {
                return Err(EvalError::InvalidConfidenceGrid(format!(
                    "not strictly increasing at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        if self.confidence_grid.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(EvalError::InvalidConfidenceGrid("values must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Per-class report row: precision and recall at the reporting confidence
/// threshold, AP at the base IoU threshold, and the grid-averaged AP.
/// `None` AP means the class had neither ground truths nor detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class_id: usize,
    pub precision: f64,
    pub recall: f64,
    pub ap50: Option<f64>,
    pub ap50_95: Option<f64>,
}

/// Macro averages over classes with defined AP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallMetrics {
    pub precision: f64,
    pub recall: f64,
    pub map50: f64,
    pub map50_95: f64,
}

impl OverallMetrics {
    /// Unweighted arithmetic mean of every per-class column, skipping
    /// classes whose AP is undefined.
    pub fn macro_average(per_class: &[ClassMetrics]) -> OverallMetrics {
        let included: Vec<&ClassMetrics> =
            per_class.iter().filter(|c| c.ap50.is_some()).collect();
        let n = included.len() as f64;
        if included.is_empty() {
            return OverallMetrics { precision: 0.0, recall: 0.0, map50: 0.0, map50_95: 0.0 };
        }
        OverallMetrics {
            precision: included.iter().map(|c| c.precision).sum::<f64>() / n,
            recall: included.iter().map(|c| c.recall).sum::<f64>() / n,
            map50: included.iter().map(|c| c.ap50.unwrap()).sum::<f64>() / n,
            map50_95: included.iter().map(|c| c.ap50_95.unwrap()).sum::<f64>() / n,
        }
    }
}

/// Raw precision-recall curve for one class at one IoU threshold: the
/// cumulative (recall, precision) points of the ranked detection list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRCurve {
    pub class_id: usize,
    pub iou_threshold: f64,
    pub points: Vec<(f64, f64)>,
}

/// Everything `evaluate` produces.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub per_class: Vec<ClassMetrics>,
    pub overall: OverallMetrics,
    pub pr_curves: Vec<PRCurve>,
    pub sweep: SweepResult,
    pub gt_counts: Vec<usize>,
}

/// Run the full evaluation over dataset-wide detections and ground truths.
pub fn evaluate(
    detections: &[ImageDetection],
    ground_truths: &[GroundTruth],
    class_map: &ClassMap,
    config: &EvalConfig,
) -> Result<EvalResult, EvalError> {
    config.validate()?;
    let num_classes = class_map.len();
    for d in detections {
        if !class_map.contains_id(d.detection.class_id) {
            return Err(EvalError::UnknownClass {
                class_id: d.detection.class_id,
                num_classes,
            });
        }
    }
    for g in ground_truths {
        if !class_map.contains_id(g.class_id) {
            return Err(EvalError::UnknownClass { class_id: g.class_id, num_classes });
        }
    }
    if ground_truths.is_empty() {
        return Err(EvalError::NothingToEvaluate);
    }

    // per-image greedy matching
    let mut by_image: BTreeMap<&str, (Vec<Detection>, Vec<(usize, BoundingBox)>)> =
        BTreeMap::new();
    for d in detections {
        by_image.entry(d.image_id.as_str()).or_default().0.push(d.detection);
    }
    for g in ground_truths {
        by_image.entry(g.image_id.as_str()).or_default().1.push((g.class_id, g.bbox));
    }

    let mut matched: Vec<MatchedDetection> = Vec::new();
    let mut gt_counts = vec![0usize; num_classes];
    for (image_id, (preds, gts)) in &by_image {
        let outcome = match_detections(image_id, preds, gts, &config.iou_grid, num_classes)?;
        matched.extend(outcome.matched);
        for (c, n) in outcome.gt_counts.iter().enumerate() {
            gt_counts[c] += n;
        }
    }

    // dataset-wide ranking: confidence desc, image_id asc, x_min asc
    matched.sort_by(|a, b| {
        b.detection
            .confidence
            .partial_cmp(&a.detection.confidence)
            .unwrap()
            .then_with(|| a.image_id.cmp(&b.image_id))
            .then_with(|| a.detection.bbox.x_min.partial_cmp(&b.detection.bbox.x_min).unwrap())
    });

    let base_idx = 0; // grid is sorted ascending; index 0 is the base threshold
    let mut per_class = Vec::with_capacity(num_classes);
    let mut pr_curves = Vec::with_capacity(num_classes);
    for class_id in 0..num_classes {
        let ranked: Vec<&MatchedDetection> =
            matched.iter().filter(|m| m.detection.class_id == class_id).collect();
        let n_gt = gt_counts[class_id];

        let mut ap_per_threshold: Vec<Option<f64>> = Vec::with_capacity(config.iou_grid.len());
        for k in 0..config.iou_grid.len() {
            let entries: Vec<RankedDetection> = ranked
                .iter()
                .map(|m| RankedDetection {
                    confidence: m.detection.confidence,
                    image_id: m.image_id.clone(),
                    x_min: m.detection.bbox.x_min,
                    is_tp: m.tp_flags[k],
                })
                .collect();
            ap_per_threshold.push(average_precision(&entries, n_gt)?);
        }
        let ap50 = ap_per_threshold[base_idx];
        let ap50_95 = if ap_per_threshold.iter().all(Option::is_some) {
            Some(
                ap_per_threshold.iter().map(|a| a.unwrap()).sum::<f64>()
                    / ap_per_threshold.len() as f64,
            )
        } else {
            None
        };

        // P/R at the reporting confidence, base-threshold matching
        let tp = ranked
            .iter()
            .filter(|m| m.detection.confidence >= config.reporting_confidence && m.tp_flags[base_idx])
            .count() as f64;
        let fp = ranked
            .iter()
            .filter(|m| m.detection.confidence >= config.reporting_confidence && !m.tp_flags[base_idx])
            .count() as f64;
        let precision = if tp + fp == 0.0 { 1.0 } else { tp / (tp + fp) };
        let recall = if n_gt == 0 { 0.0 } else { tp / n_gt as f64 };

        per_class.push(ClassMetrics { class_id, precision, recall, ap50, ap50_95 });

        let mut points = Vec::with_capacity(ranked.len());
        let (mut cum_tp, mut cum_fp) = (0u64, 0u64);
        for m in &ranked {
            if m.tp_flags[base_idx] {
                cum_tp += 1;
            } else {
                cum_fp += 1;
            }
            if n_gt > 0 {
                points.push((
                    cum_tp as f64 / n_gt as f64,
                    cum_tp as f64 / (cum_tp + cum_fp) as f64,
                ));
            }
        }
        pr_curves.push(PRCurve {
            class_id,
            iou_threshold: config.iou_grid[base_idx],
            points,
        });
    }

    let overall = OverallMetrics::macro_average(&per_class);
    let sweep = confidence_sweep(&matched, &gt_counts, &config.confidence_grid)?;

    Ok(EvalResult { per_class, overall, pr_curves, sweep, gt_counts })
}

/// Convert normalized dataset annotations into pixel-space ground truths.
pub fn ground_truths_from_images(
    images: &[LabeledImage],
) -> Result<Vec<GroundTruth>, EvalError> {
    let mut out = Vec::new();
    for img in images {
        for nb in &img.annotations {
            let bbox = norm_to_pixel(nb, img.width as f64, img.height as f64)?;
            out.push(GroundTruth {
                image_id: img.image_id.clone(),
                class_id: nb.class_id,
                bbox,
            });
        }
    }
    Ok(out)
}

/// Read a detections JSON Lines file, validating every record against the
/// class map and the geometry invariants. Errors carry the line number.
pub fn load_detections_jsonl(
    path: &Path,
    class_map: &ClassMap,
) -> Result<Vec<ImageDetection>, EvalError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| EvalError::Io { path: path.display().to_string(), source: e })?;
    parse_detections_jsonl(&text, class_map, &path.display().to_string())
}

pub fn parse_detections_jsonl(
    text: &str,
    class_map: &ClassMap,
    origin: &str,
) -> Result<Vec<ImageDetection>, EvalError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: DetectionRecord =
            serde_json::from_str(line).map_err(|e| EvalError::DetectionParse {
                path: origin.to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        if !class_map.contains_id(record.class_id) {
            return Err(EvalError::DetectionParse {
                path: origin.to_string(),
                line: idx + 1,
                message: format!(
                    "class id {} out of range for {} classes",
                    record.class_id,
                    class_map.len()
                ),
            });
        }
        let [x0, y0, x1, y1] = record.bbox;
        let bbox = BoundingBox::new(x0, y0, x1, y1).map_err(|e| EvalError::DetectionParse {
            path: origin.to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        let detection = Detection::new(bbox, record.class_id, record.confidence).map_err(|e| {
            EvalError::DetectionParse {
                path: origin.to_string(),
                line: idx + 1,
                message: e.to_string(),
            }
        })?;
        out.push(ImageDetection { image_id: record.image_id, detection });
    }
    Ok(out)
}

/// Serialize detections in the evaluation wire format.
pub fn detections_to_jsonl(detections: &[ImageDetection]) -> String {
    let mut out = String::new();
    for d in detections {
        let record = DetectionRecord {
            image_id: d.image_id.clone(),
            class_id: d.detection.class_id,
            confidence: d.detection.confidence,
            bbox: [
                d.detection.bbox.x_min,
                d.detection.bbox.y_min,
                d.detection.bbox.x_max,
                d.detection.bbox.y_max,
            ],
        };
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    out
}
