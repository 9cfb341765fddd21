//! Shared fixtures for the HTTP contract tests: a temp service layout with
//! a small replay corpus and PNG frames, plus a ureq agent that surfaces
//! error bodies.

use std::path::{Path, PathBuf};

use coopwatch_core::buffer::RgbBuffer;
use coopwatch_core::codec;
use coopwatch_service::ServiceConfig;

pub struct TestDeployment {
    /// Keeps the temp tree alive for the deployment's lifetime.
    pub _dir: tempfile::TempDir,
    pub config: ServiceConfig,
    pub png: Vec<u8>,
}

pub fn schemas_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas")
}

/// A corpus with one image per verdict case:
/// - `frame_healthy`: single Healthy detection at 0.9
/// - `frame_sick`: Fowl Pox at 0.8 (over the default 0.497 floor)
/// - `frame_empty`: no detections
/// - `frame_quiet`: Newcastle Disease at 0.3 (under the floor)
pub fn deploy() -> TestDeployment {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("classes.txt"),
        "Fowl Pox\nHealthy\nInfectious Coryza\nNewcastle Disease\n",
    )
    .unwrap();
    let fixture = concat!(
        "{\"image_id\":\"frame_healthy\",\"detections\":[{\"class_id\":1,\"confidence\":0.9,\"box\":[10,10,60,60]}]}\n",
        "{\"image_id\":\"frame_sick\",\"detections\":[{\"class_id\":0,\"confidence\":0.8,\"box\":[10,10,60,60]}]}\n",
        "{\"image_id\":\"frame_empty\",\"detections\":[]}\n",
        "{\"image_id\":\"frame_quiet\",\"detections\":[{\"class_id\":3,\"confidence\":0.3,\"box\":[10,10,60,60]}]}\n",
    );
    std::fs::write(dir.path().join("replay.jsonl"), fixture).unwrap();

    let config = ServiceConfig {
        class_map_path: dir.path().join("classes.txt"),
        replay_fixture_path: dir.path().join("replay.jsonl"),
        postprocess: Default::default(),
        alert_rule: Default::default(),
        log_dir: dir.path().join("logs"),
        listen_addr: "127.0.0.1:0".into(),
        log_rotate_bytes: 10 * 1024 * 1024,
    };

    let png = codec::encode_png(&RgbBuffer::filled(64, 64, 128).unwrap()).unwrap();
    TestDeployment { _dir: dir, config, png }
}

/// Agent that returns 4xx/5xx responses instead of treating them as errors.
pub fn agent() -> ureq::Agent {
    ureq::Agent::new_with_config(
        ureq::config::Config::builder().http_status_as_error(false).build(),
    )
}

pub fn get_json(agent: &ureq::Agent, url: &str) -> (u16, serde_json::Value) {
    let mut res = agent.get(url).call().unwrap();
    let status = res.status().as_u16();
    let body = res.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&body).unwrap())
}

pub fn post_frame(
    agent: &ureq::Agent,
    url: &str,
    png: &[u8],
    image_id: Option<&str>,
    content_type: &str,
) -> (u16, serde_json::Value) {
    let mut req = agent.post(url).header("content-type", content_type);
    if let Some(id) = image_id {
        req = req.header("x-image-id", id);
    }
    let mut res = req.send(png).unwrap();
    let status = res.status().as_u16();
    let body = res.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&body).unwrap())
}
