//! Corpus validation: pairing of images and labels, per-class instance
//! counts, and invariant violations, reported in deterministic order.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use super::{labels, list_images, list_label_files, ClassMap, DatasetError};
use crate::codec;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub image_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// True iff there are no violations (and, in strict mode, no warnings).
    pub ok: bool,
    pub strict: bool,
    pub images_checked: usize,
    /// Image stems that have no label file.
    pub images_without_labels: Vec<String>,
    /// Label stems that have no image file.
    pub labels_without_images: Vec<String>,
    /// Instance count per class id.
    pub class_counts: Vec<u64>,
    pub violations: Vec<Violation>,
}

/// Walk `root/images` and `root/labels`, check every pair, and count class
/// instances. Missing counterparts are warnings; parse and invariant
/// failures are violations. `strict` makes warnings fail the report too.
pub fn validate_dataset(
    root: &Path,
    class_map: &ClassMap,
    strict: bool,
) -> Result<ValidationReport, DatasetError> {
    let images = list_images(&root.join("images"))?;
    let label_files = list_label_files(&root.join("labels"))?;

    let image_stems: BTreeSet<&str> = images.iter().map(|(s, _)| s.as_str()).collect();
    let label_stems: BTreeSet<&str> = label_files.iter().map(|(s, _)| s.as_str()).collect();

    let images_without_labels: Vec<String> = image_stems
        .difference(&label_stems)
        .map(|s| s.to_string())
        .collect();
    let labels_without_images: Vec<String> = label_stems
        .difference(&image_stems)
        .map(|s| s.to_string())
        .collect();

    let mut class_counts = vec![0u64; class_map.len()];
    let mut violations = Vec::new();

    for (stem, path) in &images {
        if let Err(e) = codec::read_dimensions(path) {
            violations.push(Violation { image_id: stem.clone(), message: e.to_string() });
        }
    }
    for (stem, path) in &label_files {
        if !image_stems.contains(stem.as_str()) {
            continue;
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| DatasetError::Io { path: path.clone(), source: e })?;
        match labels::parse_label_file(&text, class_map) {
            Ok(boxes) => {
                for b in boxes {
                    class_counts[b.class_id] += 1;
                }
            }
            Err(e) => {
                violations.push(Violation { image_id: stem.clone(), message: e.to_string() })
            }
        }
    }
    violations.sort_by(|a, b| a.image_id.cmp(&b.image_id));

    let warnings = !images_without_labels.is_empty() || !labels_without_images.is_empty();
    let ok = violations.is_empty() && !(strict && warnings);
    Ok(ValidationReport {
        ok,
        strict,
        images_checked: images.len(),
        images_without_labels,
        labels_without_images,
        class_counts,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::RgbBuffer;

    fn write_corpus(dir: &Path, entries: &[(&str, Option<&str>)]) {
        std::fs::create_dir_all(dir.join("images")).unwrap();
        std::fs::create_dir_all(dir.join("labels")).unwrap();
        let img = RgbBuffer::filled(8, 8, 128).unwrap();
        for (stem, label) in entries {
            codec::save_png(&img, &dir.join("images").join(format!("{stem}.png"))).unwrap();
            if let Some(text) = label {
                std::fs::write(dir.join("labels").join(format!("{stem}.txt")), text).unwrap();
            }
        }
    }

    #[test]
    fn valid_corpus_counts_classes() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(
            dir.path(),
            &[
                ("a", Some("0 0.5 0.5 0.2 0.2\n1 0.25 0.25 0.1 0.1\n")),
                ("b", Some("1 0.5 0.5 0.4 0.4\n")),
            ],
        );
        let report = validate_dataset(dir.path(), &ClassMap::poultry_default(), false).unwrap();
        assert!(report.ok);
        assert_eq!(report.class_counts, vec![1, 2, 0, 0]);
        assert_eq!(report.images_checked, 2);
    }

    #[test]
    fn missing_label_is_warning_unless_strict() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[("a", Some("0 0.5 0.5 0.2 0.2\n")), ("b", None)]);
        let lenient = validate_dataset(dir.path(), &ClassMap::poultry_default(), false).unwrap();
        assert!(lenient.ok);
        assert_eq!(lenient.images_without_labels, vec!["b".to_string()]);
        let strict = validate_dataset(dir.path(), &ClassMap::poultry_default(), true).unwrap();
        assert!(!strict.ok);
    }

    #[test]
    fn zero_width_box_is_violation() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[("a", Some("0 0.5 0.5 0.0 0.2\n"))]);
        let report = validate_dataset(dir.path(), &ClassMap::poultry_default(), false).unwrap();
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].image_id, "a");
    }

    #[test]
    fn unreadable_root_errors() {
        let dir = tempfile::tempdir().unwrap();
        let err = validate_dataset(dir.path(), &ClassMap::poultry_default(), false).unwrap_err();
        assert!(matches!(err, DatasetError::UnreadableRoot { .. }));
    }
}
