//! Wire types for the prediction endpoints.

use coopwatch_core::dataset::ClassMap;
use coopwatch_core::geometry::Detection;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Healthy,
    DiseaseSuspected,
    NoBirds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseDetection {
    pub class_name: String,
    pub class_id: usize,
    pub confidence: f64,
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
}

/// JSON payload returned for every analyzed frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResponse {
    pub image_id: String,
    pub model_tag: String,
    pub detections: Vec<ResponseDetection>,
    pub verdict: Verdict,
    /// UTC, RFC 3339.
    pub timestamp: String,
}

impl PredictionResponse {
    /// Build a response from post-processed detections. The verdict is
    /// "no_birds" for an empty detection list, "disease_suspected" when any
    /// non-healthy detection reaches `alert_confidence`, otherwise
    /// "healthy".
    pub fn build(
        image_id: String,
        model_tag: String,
        detections: &[Detection],
        class_map: &ClassMap,
        healthy_class: Option<usize>,
        alert_confidence: f64,
        timestamp: String,
    ) -> Self {
        let verdict = if detections.is_empty() {
            Verdict::NoBirds
        } else if detections.iter().any(|d| {
            Some(d.class_id) != healthy_class && d.confidence >= alert_confidence
        }) {
            Verdict::DiseaseSuspected
        } else {
            Verdict::Healthy
        };
        Self {
            image_id,
            model_tag,
            detections: detections
                .iter()
                .map(|d| ResponseDetection {
                    class_name: class_map.name(d.class_id).unwrap_or("?").to_string(),
                    class_id: d.class_id,
                    confidence: d.confidence,
                    bbox: [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max],
                })
                .collect(),
            verdict,
            timestamp,
        }
    }
}

/// One line of the append-only detection log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionLogRecord {
    pub stream_id: String,
    pub image_id: String,
    pub response: PredictionResponse,
    pub sequence: u64,
}

/// Response body of the frame-ingest endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameIngestResponse {
    pub prediction: PredictionResponse,
    pub alerts: Vec<super::alerts::AlertEvent>,
}

/// Health endpoint document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub backend: String,
    pub uptime_s: u64,
}

/// Error body used by every non-2xx response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
}
