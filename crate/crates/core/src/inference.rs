//! Pluggable detector backend plus the standard post-processing chain
//! (confidence filter, per-class NMS, detection cap). The deterministic
//! replay backend is the reference implementation; a neural runner can
//! implement [`DetectorBackend`] without touching evaluation or service
//! code.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::buffer::RgbBuffer;
use crate::geometry::{nms, BoundingBox, Detection, GeometryError};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("no fixture for image {0:?}")]
    NoFixture(String),
    #[error("request carries no image id")]
    MissingImageId,
    #[error("bad image: {0}")]
    BadImage(String),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("invalid postprocess config: {0}")]
    InvalidConfig(String),
    #[error("{path} line {line}: {message}")]
    FixtureParse { path: String, line: usize, message: String },
    #[error("duplicate fixture entry for image {0:?}")]
    DuplicateImage(String),
    #[error("io error for {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Post-processing settings with the detector family's conventional
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PostprocessConfig {
    pub conf_threshold: f64,
    pub nms_iou_threshold: f64,
    pub max_detections: usize,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        Self { conf_threshold: 0.25, nms_iou_threshold: 0.45, max_detections: 300 }
    }
}

impl PostprocessConfig {
    pub fn validate(&self) -> Result<(), InferenceError> {
        for (name, t) in [
            ("conf_threshold", self.conf_threshold),
            ("nms_iou_threshold", self.nms_iou_threshold),
        ] {
            if !(0.0..=1.0).contains(&t) || !t.is_finite() {
                return Err(InferenceError::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {t}"
                )));
            }
        }
        if self.max_detections == 0 {
            return Err(InferenceError::InvalidConfig("max_detections must be >= 1".into()));
        }
        Ok(())
    }
}

/// Raw candidate detections for one image, before post-processing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInference {
    pub image_id: String,
    pub candidates: Vec<Detection>,
    pub model_tag: String,
}

/// What a backend gets to look at. The replay backend needs only the id;
/// a neural backend would consume the pixels (letterboxed upstream).
#[derive(Debug, Clone, Default)]
pub struct InferenceRequest {
    pub image_id: Option<String>,
    pub pixels: Option<RgbBuffer>,
}

impl InferenceRequest {
    pub fn by_id(image_id: impl Into<String>) -> Self {
        Self { image_id: Some(image_id.into()), pixels: None }
    }
}

/// The single required capability of a detector. Implementations must be
/// safe to call from concurrent workers.
pub trait DetectorBackend: Send + Sync {
    fn infer(&self, request: &InferenceRequest) -> Result<RawInference, InferenceError>;
    fn model_tag(&self) -> &str;
    /// False when the backend cannot currently serve requests.
    fn healthy(&self) -> bool {
        true
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CandidateRecord {
    class_id: usize,
    confidence: f64,
    #[serde(rename = "box")]
    bbox: [f64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
struct FixtureRecord {
    image_id: String,
    detections: Vec<CandidateRecord>,
}

/// Immutable map from image id to recorded candidate detections.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayStore {
    entries: BTreeMap<String, Vec<Detection>>,
}

impl ReplayStore {
    pub fn load(path: &Path) -> Result<Self, InferenceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InferenceError::Io { path: path.display().to_string(), source: e })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parse the JSON Lines fixture format: one object per image,
    /// `{"image_id": ..., "detections": [{"class_id", "confidence", "box"}]}`.
    pub fn parse(text: &str, origin: &str) -> Result<Self, InferenceError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: FixtureRecord =
                serde_json::from_str(line).map_err(|e| InferenceError::FixtureParse {
                    path: origin.to_string(),
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            let mut candidates = Vec::with_capacity(record.detections.len());
            for c in record.detections {
                let [x0, y0, x1, y1] = c.bbox;
                let bbox = BoundingBox::new(x0, y0, x1, y1).map_err(|e| {
                    InferenceError::FixtureParse {
                        path: origin.to_string(),
                        line: idx + 1,
                        message: e.to_string(),
                    }
                })?;
                let det = Detection::new(bbox, c.class_id, c.confidence).map_err(|e| {
                    InferenceError::FixtureParse {
                        path: origin.to_string(),
                        line: idx + 1,
                        message: e.to_string(),
                    }
                })?;
                candidates.push(det);
            }
            if entries.insert(record.image_id.clone(), candidates).is_some() {
                return Err(InferenceError::DuplicateImage(record.image_id));
            }
        }
        Ok(Self { entries })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (image_id, dets) in &self.entries {
            let record = FixtureRecord {
                image_id: image_id.clone(),
                detections: dets
                    .iter()
                    .map(|d| CandidateRecord {
                        class_id: d.class_id,
                        confidence: d.confidence,
                        bbox: [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max],
                    })
                    .collect(),
            };
            out.push_str(&serde_json::to_string(&record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn get(&self, image_id: &str) -> Option<&[Detection]> {
        self.entries.get(image_id).map(Vec::as_slice)
    }

    pub fn image_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, image_id: String, detections: Vec<Detection>) {
        self.entries.insert(image_id, detections);
    }
}

/// Deterministic test double for a trained model: returns the stored
/// candidates for the requested image id, verbatim.
pub struct ReplayBackend {
    store: ReplayStore,
    model_tag: String,
}

impl ReplayBackend {
    pub fn new(store: ReplayStore, model_tag: impl Into<String>) -> Self {
        Self { store, model_tag: model_tag.into() }
    }

    pub fn from_fixture(path: &Path) -> Result<Self, InferenceError> {
        Ok(Self::new(ReplayStore::load(path)?, "replay"))
    }

    pub fn store(&self) -> &ReplayStore {
        &self.store
    }
}

impl DetectorBackend for ReplayBackend {
    fn infer(&self, request: &InferenceRequest) -> Result<RawInference, InferenceError> {
        let image_id = request.image_id.as_deref().ok_or(InferenceError::MissingImageId)?;
        let candidates = self
            .store
            .get(image_id)
            .ok_or_else(|| InferenceError::NoFixture(image_id.to_string()))?;
        Ok(RawInference {
            image_id: image_id.to_string(),
            candidates: candidates.to_vec(),
            model_tag: self.model_tag.clone(),
        })
    }

    fn model_tag(&self) -> &str {
        &self.model_tag
    }
}

/// Confidence filter, per-class NMS, then cap at the highest-confidence
/// `max_detections` survivors; output stays sorted by confidence
/// descending.
pub fn postprocess(
    raw: &RawInference,
    cfg: &PostprocessConfig,
) -> Result<Vec<Detection>, InferenceError> {
    cfg.validate()?;
    let kept: Vec<Detection> = raw
        .candidates
        .iter()
        .filter(|d| d.confidence >= cfg.conf_threshold)
        .copied()
        .collect();
    let mut survivors = nms(&kept, cfg.nms_iou_threshold)?;
    survivors.truncate(cfg.max_detections);
    Ok(survivors)
}
