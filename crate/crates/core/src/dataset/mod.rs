//! YOLO-format dataset ingestion, validation, deterministic splitting, and
//! augmentation.
//!
//! On-disk layout: `root/images/*.{jpg,png}`, `root/labels/*.txt` with
//! matching stems, `root/classes.txt` (one class name per line, id = line
//! index), and `root/split.json` for the persisted split manifest.

mod augment;
mod labels;
mod split;
mod validate;

pub use augment::apply_augmentations;
pub use labels::{parse_label_file, serialize_label_file};
pub use split::{split_dataset, split_ids};
pub use validate::{validate_dataset, ValidationReport, Violation};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, CodecError};
use crate::geometry::{GeometryError, NormalizedBox};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed label, line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("class_id out of range, line {line}: {class_id} with {num_classes} classes")]
    ClassOutOfRange { line: usize, class_id: usize, num_classes: usize },
    #[error("coordinate out of range, line {line}: {message}")]
    CoordinateOutOfRange { line: usize, message: String },
    #[error("invalid class map: {0}")]
    InvalidClassMap(String),
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid augmentation spec: {0}")]
    InvalidSpec(String),
    #[error("image buffer is {got_w}x{got_h} but the labeled image says {want_w}x{want_h}")]
    BufferMismatch { got_w: u32, got_h: u32, want_w: u32, want_h: u32 },
    #[error("unreadable dataset root {path}: {message}")]
    UnreadableRoot { path: PathBuf, message: String },
    #[error("io error for {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Ordered class names; ids are the positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMap {
    names: Vec<String>,
}

impl ClassMap {
    pub fn new(names: Vec<String>) -> Result<Self, DatasetError> {
        if names.is_empty() {
            return Err(DatasetError::InvalidClassMap("no classes".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.trim().is_empty() {
                return Err(DatasetError::InvalidClassMap(format!("class {i} has an empty name")));
            }
            if names[..i].contains(n) {
                return Err(DatasetError::InvalidClassMap(format!("duplicate class name {n:?}")));
            }
        }
        Ok(Self { names })
    }

    /// The four poultry monitoring classes in their canonical order.
    pub fn poultry_default() -> Self {
        Self {
            names: ["Fowl Pox", "Healthy", "Infectious Coryza", "Newcastle Disease"]
                .map(String::from)
                .to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains_id(&self, class_id: usize) -> bool {
        class_id < self.names.len()
    }

    pub fn name(&self, class_id: usize) -> Option<&str> {
        self.names.get(class_id).map(String::as_str)
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Parse a `classes.txt` body: one class name per line, id = line index.
    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        let names: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        Self::new(names)
    }

    pub fn from_file(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DatasetError::Io { path: path.to_path_buf(), source: e })?;
        Self::parse(&text)
    }
}

/// One image's annotations, in normalized YOLO coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledImage {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub annotations: Vec<NormalizedBox>,
}

impl LabeledImage {
    pub fn validate(&self, class_map: &ClassMap) -> Result<(), DatasetError> {
        if self.width == 0 || self.height == 0 {
            return Err(DatasetError::InvalidSpec(format!(
                "image {} has zero dimension",
                self.image_id
            )));
        }
        for a in &self.annotations {
            a.validate()?;
            if !class_map.contains_id(a.class_id) {
                return Err(DatasetError::ClassOutOfRange {
                    line: 0,
                    class_id: a.class_id,
                    num_classes: class_map.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitSet {
    Train,
    Test,
    Val,
}

impl fmt::Display for SplitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitSet::Train => "train",
            SplitSet::Test => "test",
            SplitSet::Val => "val",
        })
    }
}

/// Deterministic train/test/val partition of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    /// (train, test, val), summing to 1.
    pub ratios: (f64, f64, f64),
    pub assignment: BTreeMap<String, SplitSet>,
}

impl SplitManifest {
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for set in self.assignment.values() {
            match set {
                SplitSet::Train => c.0 += 1,
                SplitSet::Test => c.1 += 1,
                SplitSet::Val => c.2 += 1,
            }
        }
        c
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One augmentation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Transform {
    HorizontalFlip,
    Letterbox { target_w: u32, target_h: u32, pad_value: u8 },
    RandomCrop { min_scale: f64, max_scale: f64, min_box_visibility: f64 },
}

/// Ordered transform list plus the seed every random choice derives from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub transforms: Vec<Transform>,
    pub rng_seed: u64,
}

impl AugmentationSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        for t in &self.transforms {
            match t {
                Transform::HorizontalFlip => {}
                Transform::Letterbox { target_w, target_h, .. } => {
                    if *target_w == 0 || *target_h == 0 {
                        return Err(DatasetError::InvalidSpec(
                            "letterbox target dimensions must be positive".into(),
                        ));
                    }
                }
                Transform::RandomCrop { min_scale, max_scale, min_box_visibility } => {
                    if !(*min_scale > 0.0 && min_scale <= max_scale && *max_scale <= 1.0) {
                        return Err(DatasetError::InvalidSpec(format!(
                            "crop scales must satisfy 0 < min <= max <= 1, got {min_scale}..{max_scale}"
                        )));
                    }
                    if !(0.0..=1.0).contains(min_box_visibility) {
                        return Err(DatasetError::InvalidSpec(format!(
                            "min_box_visibility must be in [0, 1], got {min_box_visibility}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        let spec: AugmentationSpec = serde_json::from_str(text)
            .map_err(|e| DatasetError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Load every labeled image under `root`, strictly: label parse errors
/// propagate, image dimensions are read from the image headers, and images
/// without a label file get an empty annotation list.
pub fn load_labeled_images(
    root: &Path,
    class_map: &ClassMap,
) -> Result<Vec<LabeledImage>, DatasetError> {
    let images_dir = root.join("images");
    let labels_dir = root.join("labels");
    let mut out = Vec::new();
    for (stem, path) in list_images(&images_dir)? {
        let (width, height) = codec::read_dimensions(&path)?;
        let label_path = labels_dir.join(format!("{stem}.txt"));
        let annotations = if label_path.exists() {
            let text = std::fs::read_to_string(&label_path)
                .map_err(|e| DatasetError::Io { path: label_path.clone(), source: e })?;
            parse_label_file(&text, class_map)?
        } else {
            Vec::new()
        };
        out.push(LabeledImage { image_id: stem, width, height, annotations });
    }
    out.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    Ok(out)
}

/// Image stems and paths under a dataset's `images/` directory, sorted.
pub fn list_images(images_dir: &Path) -> Result<Vec<(String, PathBuf)>, DatasetError> {
    let entries = std::fs::read_dir(images_dir).map_err(|e| DatasetError::UnreadableRoot {
        path: images_dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| DatasetError::Io {
            path: images_dir.to_path_buf(),
            source: e,
        })?;
        let path = entry.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        if matches!(ext.as_str(), "jpg" | "jpeg" | "png") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub(crate) fn list_label_files(labels_dir: &Path) -> Result<Vec<(String, PathBuf)>, DatasetError> {
    let entries = std::fs::read_dir(labels_dir).map_err(|e| DatasetError::UnreadableRoot {
        path: labels_dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| DatasetError::Io {
            path: labels_dir.to_path_buf(),
            source: e,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}
