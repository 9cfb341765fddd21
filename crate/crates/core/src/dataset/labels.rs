//! YOLO label text format: one box per line, `class_id cx cy w h`,
//! whitespace-separated decimals.

use super::{ClassMap, DatasetError};
use crate::geometry::NormalizedBox;

/// Parse a label file body. Blank lines are ignored; order is preserved;
/// every error carries its 1-based line number.
pub fn parse_label_file(
    text: &str,
    class_map: &ClassMap,
) -> Result<Vec<NormalizedBox>, DatasetError> {
    let mut boxes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(DatasetError::MalformedLine {
                line,
                message: format!("expected 5 fields, got {}", tokens.len()),
            });
        }
        let class_id: usize = tokens[0].parse().map_err(|_| DatasetError::MalformedLine {
            line,
            message: format!("class id {:?} is not a non-negative integer", tokens[0]),
        })?;
        let mut coords = [0.0f64; 4];
        for (i, tok) in tokens[1..].iter().enumerate() {
            coords[i] = tok.parse().map_err(|_| DatasetError::MalformedLine {
                line,
                message: format!("field {:?} is not a number", tok),
            })?;
        }
        if !class_map.contains_id(class_id) {
            return Err(DatasetError::ClassOutOfRange {
                line,
                class_id,
                num_classes: class_map.len(),
            });
        }
        let nbox = NormalizedBox::new(class_id, coords[0], coords[1], coords[2], coords[3])
            .map_err(|e| DatasetError::CoordinateOutOfRange { line, message: e.to_string() })?;
        boxes.push(nbox);
    }
    Ok(boxes)
}

/// Serialize boxes in the same format, 6 decimal places per coordinate.
pub fn serialize_label_file(boxes: &[NormalizedBox]) -> String {
    let mut out = String::new();
    for b in boxes {
        out.push_str(&format!(
            "{} {:.6} {:.6} {:.6} {:.6}\n",
            b.class_id, b.cx, b.cy, b.w, b.h
        ));
    }
    out
}
