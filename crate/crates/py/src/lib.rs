//! Python extension module exposing the core geometry, dataset, and
//! evaluation operations. Boxes cross the boundary as plain tuples:
//! pixel boxes as (x_min, y_min, x_max, y_max), detections as
//! (class_id, confidence, box), normalized boxes as (cx, cy, w, h).

use std::collections::BTreeMap;
use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use coopwatch_core::dataset as ds;
use coopwatch_core::evaluation as ev;
use coopwatch_core::geometry as geo;
use coopwatch_core::inference as inf;

type PyBox = (f64, f64, f64, f64);
type PyDetection = (usize, f64, PyBox);

fn to_bbox(b: PyBox) -> PyResult<geo::BoundingBox> {
    geo::BoundingBox::new(b.0, b.1, b.2, b.3).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_detection(d: PyDetection) -> PyResult<geo::Detection> {
    geo::Detection::new(to_bbox(d.2)?, d.0, d.1).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn from_detection(d: &geo::Detection) -> PyDetection {
    (d.class_id, d.confidence, (d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max))
}

/// Intersection over union of two pixel boxes.
#[pyfunction]
fn iou(a: PyBox, b: PyBox) -> PyResult<f64> {
    Ok(geo::iou(&to_bbox(a)?, &to_bbox(b)?))
}

/// Greedy per-class non-maximum suppression over (class_id, confidence,
/// box) detections; returns the survivors ranked by confidence.
#[pyfunction]
fn nms(detections: Vec<PyDetection>, iou_threshold: f64) -> PyResult<Vec<PyDetection>> {
    let dets: Vec<geo::Detection> =
        detections.into_iter().map(to_detection).collect::<PyResult<_>>()?;
    let kept = geo::nms(&dets, iou_threshold).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(kept.iter().map(from_detection).collect())
}

/// Convert a normalized (cx, cy, w, h) box to pixel corners, clipped to the
/// image bounds.
#[pyfunction]
fn norm_to_pixel(nbox: (f64, f64, f64, f64), img_w: f64, img_h: f64) -> PyResult<PyBox> {
    let n = geo::NormalizedBox::new(0, nbox.0, nbox.1, nbox.2, nbox.3)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let b = geo::norm_to_pixel(&n, img_w, img_h).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((b.x_min, b.y_min, b.x_max, b.y_max))
}

/// Convert pixel corners back to a normalized (cx, cy, w, h) box.
#[pyfunction]
fn pixel_to_norm(bbox: PyBox, img_w: f64, img_h: f64) -> PyResult<(f64, f64, f64, f64)> {
    let n = geo::pixel_to_norm(&to_bbox(bbox)?, img_w, img_h, 0)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((n.cx, n.cy, n.w, n.h))
}

/// Parse a YOLO label file body into (class_id, cx, cy, w, h) rows.
#[pyfunction]
fn parse_label_file(
    text: &str,
    class_names: Vec<String>,
) -> PyResult<Vec<(usize, f64, f64, f64, f64)>> {
    let class_map = ds::ClassMap::new(class_names).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let boxes = ds::parse_label_file(text, &class_map)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(boxes.iter().map(|b| (b.class_id, b.cx, b.cy, b.w, b.h)).collect())
}

/// Serialize (class_id, cx, cy, w, h) rows in the YOLO label format.
#[pyfunction]
fn serialize_label_file(boxes: Vec<(usize, f64, f64, f64, f64)>) -> PyResult<String> {
    let nboxes: Vec<geo::NormalizedBox> = boxes
        .into_iter()
        .map(|(c, cx, cy, w, h)| {
            geo::NormalizedBox::new(c, cx, cy, w, h)
                .map_err(|e| PyValueError::new_err(e.to_string()))
        })
        .collect::<PyResult<_>>()?;
    Ok(ds::serialize_label_file(&nboxes))
}

/// Deterministic train/test/val split: image id -> "train" | "test" | "val".
#[pyfunction]
fn split_dataset(
    ids: Vec<String>,
    ratios: (f64, f64, f64),
    seed: u64,
) -> PyResult<BTreeMap<String, String>> {
    let manifest =
        ds::split_ids(ids, ratios, seed).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(manifest
        .assignment
        .into_iter()
        .map(|(id, set)| (id, set.to_string()))
        .collect())
}

/// Confidence filter, per-class NMS, and detection cap.
#[pyfunction]
#[pyo3(signature = (candidates, conf_threshold=0.25, nms_iou_threshold=0.45, max_detections=300))]
fn postprocess(
    candidates: Vec<PyDetection>,
    conf_threshold: f64,
    nms_iou_threshold: f64,
    max_detections: usize,
) -> PyResult<Vec<PyDetection>> {
    let dets: Vec<geo::Detection> =
        candidates.into_iter().map(to_detection).collect::<PyResult<_>>()?;
    let raw = inf::RawInference {
        image_id: String::new(),
        candidates: dets,
        model_tag: String::new(),
    };
    let cfg = inf::PostprocessConfig { conf_threshold, nms_iou_threshold, max_detections };
    let kept = inf::postprocess(&raw, &cfg).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(kept.iter().map(from_detection).collect())
}

/// Average precision (101-point interpolation) for a ranked
/// (confidence, is_true_positive) list; None when undefined.
#[pyfunction]
fn average_precision(ranked: Vec<(f64, bool)>, n_gt: usize) -> PyResult<Option<f64>> {
    let entries: Vec<ev::RankedDetection> = ranked
        .into_iter()
        .enumerate()
        .map(|(i, (confidence, is_tp))| ev::RankedDetection {
            confidence,
            image_id: String::new(),
            x_min: i as f64,
            is_tp,
        })
        .collect();
    ev::average_precision(&entries, n_gt).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None().into_bound(py),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

/// Evaluate a detections JSON Lines file against a labeled dataset root.
/// Returns the report summary as nested dicts: per-class metrics, macro
/// averages, the best-F1 operating point, and the confusion matrix.
#[pyfunction]
#[pyo3(signature = (gt_root, dets_path, classes_path=None, reporting_confidence=0.25, confusion_conf=0.25, confusion_iou=0.45))]
fn evaluate_files(
    py: Python<'_>,
    gt_root: &str,
    dets_path: &str,
    classes_path: Option<&str>,
    reporting_confidence: f64,
    confusion_conf: f64,
    confusion_iou: f64,
) -> PyResult<Py<PyAny>> {
    let err = |e: String| PyValueError::new_err(e);
    let root = Path::new(gt_root);
    let class_map = match classes_path {
        Some(p) => ds::ClassMap::from_file(Path::new(p)),
        None => ds::ClassMap::from_file(&root.join("classes.txt")),
    }
    .map_err(|e| err(e.to_string()))?;

    let images = ds::load_labeled_images(root, &class_map).map_err(|e| err(e.to_string()))?;
    let ground_truths =
        ev::ground_truths_from_images(&images).map_err(|e| err(e.to_string()))?;
    let detections = ev::load_detections_jsonl(Path::new(dets_path), &class_map)
        .map_err(|e| err(e.to_string()))?;

    let config = ev::EvalConfig { reporting_confidence, ..Default::default() };
    let result = ev::evaluate(&detections, &ground_truths, &class_map, &config)
        .map_err(|e| err(e.to_string()))?;
    let matrix = ev::confusion_matrix(
        &detections,
        &ground_truths,
        &class_map,
        confusion_conf,
        confusion_iou,
    )
    .map_err(|e| err(e.to_string()))?;

    let summary = ev::report::build_summary(&result, &matrix, &class_map);
    let value = serde_json::to_value(&summary).map_err(|e| err(e.to_string()))?;
    Ok(json_to_py(py, &value)?.unbind())
}

#[pymodule]
fn coopwatch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(iou, m)?)?;
    m.add_function(wrap_pyfunction!(nms, m)?)?;
    m.add_function(wrap_pyfunction!(norm_to_pixel, m)?)?;
    m.add_function(wrap_pyfunction!(pixel_to_norm, m)?)?;
    m.add_function(wrap_pyfunction!(parse_label_file, m)?)?;
    m.add_function(wrap_pyfunction!(serialize_label_file, m)?)?;
    m.add_function(wrap_pyfunction!(split_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(postprocess, m)?)?;
    m.add_function(wrap_pyfunction!(average_precision, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_files, m)?)?;
    m.add("DEFAULT_CLASSES", vec!["Fowl Pox", "Healthy", "Infectious Coryza", "Newcastle Disease"])?;
    Ok(())
}
