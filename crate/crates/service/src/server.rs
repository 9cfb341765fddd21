//! Axum HTTP server: prediction, stream ingestion, alert listing, health.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path as AxumPath, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Deserialize;

use crate::alerts::{
    monitored_classes, qualifying_classes, AlertEvent, AlertLogRecord, AlertRule,
    replay_alert_log, StreamWindow,
};
use crate::config::ServiceConfig;
use crate::logs::{read_all_records, LogWriter};
use crate::types::{
    DetectionLogRecord, ErrorResponse, FrameIngestResponse, HealthResponse, PredictionResponse,
};
use crate::ServiceError;
use coopwatch_core::codec;
use coopwatch_core::dataset::ClassMap;
use coopwatch_core::inference::{
    postprocess, DetectorBackend, InferenceError, InferenceRequest, PostprocessConfig,
    ReplayBackend,
};

pub struct AppState {
    backend: Box<dyn DetectorBackend>,
    class_map: ClassMap,
    postprocess_cfg: PostprocessConfig,
    alert_rule: AlertRule,
    healthy_class: Option<usize>,
    monitored: Vec<String>,
    streams: Mutex<HashMap<String, Arc<Mutex<StreamWindow>>>>,
    detection_log: LogWriter,
    alert_log: LogWriter,
    alert_events: Mutex<Vec<AlertEvent>>,
    started: Instant,
}

impl AppState {
    pub fn new(
        config: &ServiceConfig,
        backend: Box<dyn DetectorBackend>,
    ) -> Result<Arc<Self>, ServiceError> {
        config.validate()?;
        let class_map = ClassMap::from_file(&config.class_map_path)?;
        let healthy_class = class_map.id_of("Healthy");
        let monitored = monitored_classes(&class_map, &config.alert_rule);

        let detection_log =
            LogWriter::open(&config.log_dir.join("detections.jsonl"), config.log_rotate_bytes)?;
        let alert_log =
            LogWriter::open(&config.log_dir.join("alerts.jsonl"), config.log_rotate_bytes)?;

        // restore alert state from the log: the event history feeds
        // /v1/alerts and still-open alerts stay deduplicated across restarts
        let alert_path = alert_log.path();
        let records: Vec<AlertLogRecord> = if alert_path.exists() {
            read_all_records(&alert_path)?
        } else {
            Vec::new()
        };
        let (events, open) = replay_alert_log(&records);
        let mut streams: HashMap<String, Arc<Mutex<StreamWindow>>> = HashMap::new();
        for ((stream_id, class_name), is_open) in &open {
            if !is_open {
                continue;
            }
            if let Some(class_idx) = monitored.iter().position(|c| c == class_name) {
                let window = streams
                    .entry(stream_id.clone())
                    .or_insert_with(|| Arc::new(Mutex::new(StreamWindow::new(monitored.len()))));
                window.lock().expect("stream lock").force_open(class_idx);
            }
        }

        Ok(Arc::new(Self {
            backend,
            class_map,
            postprocess_cfg: config.postprocess,
            alert_rule: config.alert_rule.clone(),
            healthy_class,
            monitored,
            streams: Mutex::new(streams),
            detection_log,
            alert_log,
            alert_events: Mutex::new(events),
            started: Instant::now(),
        }))
    }

    fn stream_window(&self, stream_id: &str) -> Arc<Mutex<StreamWindow>> {
        let mut streams = self.streams.lock().expect("streams lock");
        streams
            .entry(stream_id.to_string())
            .or_insert_with(|| Arc::new(Mutex::new(StreamWindow::new(self.monitored.len()))))
            .clone()
    }
}

struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorResponse { error: self.message })).into_response()
    }
}

impl From<InferenceError> for ApiError {
    fn from(e: InferenceError) -> Self {
        let status = match e {
            InferenceError::NoFixture(_)
            | InferenceError::MissingImageId
            | InferenceError::BadImage(_) => StatusCode::BAD_REQUEST,
            InferenceError::BackendUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError { status, message: e.to_string() }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: e.to_string() }
    }
}

fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn process_frame(
    state: &AppState,
    headers: &HeaderMap,
    body: &Bytes,
    stream_id: Option<&str>,
) -> Result<(PredictionResponse, Vec<AlertEvent>), ApiError> {
    let content_type = headers
        .get(axum::http::header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("");
    if !matches!(content_type, "image/jpeg" | "image/png") {
        return Err(ApiError::bad_request(format!(
            "content-type must be image/jpeg or image/png, got {content_type:?}"
        )));
    }
    let pixels = codec::decode(body)
        .map_err(|e| ApiError::bad_request(format!("bad image: {e}")))?;
    let image_id = headers
        .get("x-image-id")
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);

    let request = InferenceRequest { image_id, pixels: Some(pixels) };
    let raw = state.backend.infer(&request)?;
    let detections = postprocess(&raw, &state.postprocess_cfg)?;
    let timestamp = now_rfc3339();
    let response = PredictionResponse::build(
        raw.image_id.clone(),
        raw.model_tag.clone(),
        &detections,
        &state.class_map,
        state.healthy_class,
        state.alert_rule.confidence_floor,
        timestamp.clone(),
    );

    let log_stream = stream_id.unwrap_or("adhoc").to_string();
    let record_response = response.clone();
    state.detection_log.append_numbered(move |sequence| {
        serde_json::to_string(&DetectionLogRecord {
            stream_id: log_stream,
            image_id: record_response.image_id.clone(),
            response: record_response,
            sequence,
        })
        .expect("record serializes")
    })?;

    let mut emitted = Vec::new();
    if let Some(stream_id) = stream_id {
        let qualifying =
            qualifying_classes(&response.detections, &state.monitored, &state.alert_rule);
        let window = state.stream_window(stream_id);
        let outcome = {
            let mut window = window.lock().expect("stream lock");
            window.observe(response.image_id.clone(), qualifying, &state.alert_rule)
        };
        for (class_idx, frame_ids) in outcome.opened {
            let event = AlertEvent {
                stream_id: stream_id.to_string(),
                class_name: state.monitored[class_idx].clone(),
                window_frame_ids: frame_ids,
                triggered_at: timestamp.clone(),
                rule: state.alert_rule.clone(),
            };
            let line = serde_json::to_string(&AlertLogRecord::Opened { event: event.clone() })
                .expect("record serializes");
            state.alert_log.append_line(&line)?;
            state.alert_events.lock().expect("alert events lock").push(event.clone());
            emitted.push(event);
        }
    }
    Ok((response, emitted))
}

async fn predict(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<PredictionResponse>, ApiError> {
    let (response, _) = process_frame(&state, &headers, &body, None)?;
    Ok(Json(response))
}

async fn ingest_frame(
    State(state): State<Arc<AppState>>,
    AxumPath(stream_id): AxumPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<FrameIngestResponse>, ApiError> {
    let (prediction, alerts) = process_frame(&state, &headers, &body, Some(&stream_id))?;
    Ok(Json(FrameIngestResponse { prediction, alerts }))
}

#[derive(Debug, Deserialize)]
struct AlertsQuery {
    stream: Option<String>,
    since: Option<String>,
}

async fn list_alerts(
    State(state): State<Arc<AppState>>,
    Query(query): Query<AlertsQuery>,
) -> Result<Json<Vec<AlertEvent>>, ApiError> {
    let since: Option<DateTime<chrono::FixedOffset>> = match &query.since {
        Some(raw) => Some(
            DateTime::parse_from_rfc3339(raw)
                .map_err(|e| ApiError::bad_request(format!("malformed since timestamp: {e}")))?,
        ),
        None => None,
    };
    let events = state.alert_events.lock().expect("alert events lock");
    let filtered: Vec<AlertEvent> = events
        .iter()
        .filter(|e| query.stream.as_deref().is_none_or(|s| e.stream_id == s))
        .filter(|e| match since {
            None => true,
            Some(bound) => DateTime::parse_from_rfc3339(&e.triggered_at)
                .map(|t| t >= bound)
                .unwrap_or(false),
        })
        .cloned()
        .collect();
    Ok(Json(filtered))
}

async fn healthz(State(state): State<Arc<AppState>>) -> Json<HealthResponse> {
    let status = if state.backend.healthy() { "ok" } else { "degraded" };
    Json(HealthResponse {
        status: status.into(),
        backend: state.backend.model_tag().to_string(),
        uptime_s: state.started.elapsed().as_secs(),
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/predict", post(predict))
        .route("/v1/streams/{stream_id}/frames", post(ingest_frame))
        .route("/v1/alerts", get(list_alerts))
        .route("/v1/healthz", get(healthz))
        .with_state(state)
}

/// A running server. Dropping the handle shuts it down.
pub struct ServiceHandle {
    pub addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl ServiceHandle {
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    /// Block until the server exits on its own (it normally never does).
    pub fn wait(mut self) {
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }

    fn stop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Start the service with an injected backend. Binds the configured listen
/// address (use port 0 for an ephemeral port) and serves on a dedicated
/// runtime thread until the handle is dropped.
pub fn start(
    config: &ServiceConfig,
    backend: Box<dyn DetectorBackend>,
) -> Result<ServiceHandle, ServiceError> {
    let state = AppState::new(config, backend)?;
    let app = router(state);

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(4)
        .enable_all()
        .build()
        .map_err(|e| ServiceError::Io { path: "tokio runtime".into(), source: e })?;
    let listener = runtime
        .block_on(tokio::net::TcpListener::bind(&config.listen_addr))
        .map_err(|e| ServiceError::Io { path: config.listen_addr.clone(), source: e })?;
    let addr = listener
        .local_addr()
        .map_err(|e| ServiceError::Io { path: config.listen_addr.clone(), source: e })?;

    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let server = axum::serve(listener, app).with_graceful_shutdown(async {
                let _ = rx.await;
            });
            if let Err(e) = server.await {
                eprintln!("server error: {e}");
            }
        });
    });

    Ok(ServiceHandle { addr, shutdown: Some(tx), thread: Some(thread) })
}

/// Start with the replay backend named by the config.
pub fn start_replay(config: &ServiceConfig) -> Result<ServiceHandle, ServiceError> {
    let backend = ReplayBackend::from_fixture(&config.replay_fixture_path)?;
    start(config, Box::new(backend))
}
