//! Core library for the coopwatch poultry health monitoring toolkit:
//! detection geometry, YOLO-format dataset preparation, the evaluation
//! suite (PR/AP/mAP, confidence sweeps, confusion matrices), and the
//! pluggable inference backend with its deterministic replay
//! implementation.

pub mod buffer;
pub mod codec;
pub mod dataset;
pub mod evaluation;
pub mod geometry;
pub mod inference;

pub use geometry::{BoundingBox, Detection, NormalizedBox};
