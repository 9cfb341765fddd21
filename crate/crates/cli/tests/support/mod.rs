//! Helpers shared by the CLI behavior and acceptance suites.
#![allow(dead_code)] // each test target uses its own subset

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coopwatch_core::geometry::BoundingBox;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/replay_corpus")
}

pub fn schemas_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../service/schemas")
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopwatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

pub fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Ground truths parsed straight from the label files with a local parser,
/// independent of the production loaders: image id -> (class, pixel box).
pub fn parse_fixture_ground_truths(
    root: &Path,
    img_w: f64,
    img_h: f64,
) -> BTreeMap<String, Vec<(usize, BoundingBox)>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(root.join("labels")).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_str().unwrap().to_string();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut list = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let tok: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
            let (c, cx, cy, w, h) = (tok[0] as usize, tok[1], tok[2], tok[3], tok[4]);
            list.push((
                c,
                BoundingBox::new(
                    (cx - w / 2.0) * img_w,
                    (cy - h / 2.0) * img_h,
                    (cx + w / 2.0) * img_w,
                    (cy + h / 2.0) * img_h,
                )
                .unwrap(),
            ));
        }
        out.insert(stem, list);
    }
    out
}

/// Detections parsed straight from the JSON Lines file:
/// image id -> (class, confidence, pixel box).
pub fn parse_fixture_detections(
    path: &Path,
) -> BTreeMap<String, Vec<(usize, f64, BoundingBox)>> {
    let mut out: BTreeMap<String, Vec<(usize, f64, BoundingBox)>> = BTreeMap::new();
    let text = std::fs::read_to_string(path).unwrap();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let b = v["box"].as_array().unwrap();
        out.entry(v["image_id"].as_str().unwrap().to_string()).or_default().push((
            v["class_id"].as_u64().unwrap() as usize,
            v["confidence"].as_f64().unwrap(),
            BoundingBox::new(
                b[0].as_f64().unwrap(),
                b[1].as_f64().unwrap(),
                b[2].as_f64().unwrap(),
                b[3].as_f64().unwrap(),
            )
            .unwrap(),
        ));
    }
    out
}

/// Greedy class-aware matching at IoU 0.5 (confidence order, best IoU),
/// reimplemented here so the acceptance oracle does not touch the
/// production matcher. Returns (confidence, is_tp) pairs over all images.
pub fn oracle_match_at_half(
    dets_by_image: &BTreeMap<String, Vec<(usize, f64, BoundingBox)>>,
    gts_by_image: &BTreeMap<String, Vec<(usize, BoundingBox)>>,
) -> Vec<(f64, bool)> {
    let mut scored = Vec::new();
    for (id, dets) in dets_by_image {
        let empty = Vec::new();
        let gts = gts_by_image.get(id).unwrap_or(&empty);
        let mut order: Vec<usize> = (0..dets.len()).collect();
        order.sort_by(|&a, &b| dets[b].1.partial_cmp(&dets[a].1).unwrap());
        let mut taken = vec![false; gts.len()];
        for di in order {
            let (class_id, conf, bbox) = &dets[di];
            let mut best: Option<(usize, f64)> = None;
            for (gi, (gc, gb)) in gts.iter().enumerate() {
                if taken[gi] || gc != class_id {
                    continue;
                }
                let v = coopwatch_testkit::iou_of(bbox, gb);
                if v >= 0.5 && best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((gi, v));
                }
            }
            if let Some((gi, _)) = best {
                taken[gi] = true;
                scored.push((*conf, true));
            } else {
                scored.push((*conf, false));
            }
        }
    }
    scored
}
