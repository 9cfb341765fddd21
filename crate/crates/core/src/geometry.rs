//! Box representations, coordinate conversions, IoU, and non-maximum
//! suppression. Everything here is a pure function over immutable values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),
    #[error("invalid normalized box: {0}")]
    InvalidNormalizedBox(String),
    #[error("invalid detection: {0}")]
    InvalidDetection(String),
    #[error("image dimensions must be positive, got {width}x{height}")]
    NonPositiveImage { width: f64, height: f64 },
    #[error("box {0:?} does not fit inside a {1}x{2} image")]
    BoxOutsideImage(BoundingBox, f64, f64),
    #[error("zero-area box cannot be expressed in normalized form")]
    DegenerateBox,
    #[error("iou threshold must be in [0, 1], got {0}")]
    InvalidThreshold(f64),
}

/// Axis-aligned box in pixel coordinates, origin at the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        let b = Self { x_min, y_min, x_max, y_max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for v in [self.x_min, self.y_min, self.x_max, self.y_max] {
            if !v.is_finite() {
                return Err(GeometryError::InvalidBox(format!(
                    "non-finite coordinate {v}"
                )));
            }
        }
        if self.x_min > self.x_max || self.y_min > self.y_max {
            return Err(GeometryError::InvalidBox(format!(
                "min corner exceeds max corner: ({}, {}) vs ({}, {})",
                self.x_min, self.y_min, self.x_max, self.y_max
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Intersection area with another box; zero when they do not overlap.
    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = (self.x_max.min(other.x_max) - self.x_min.max(other.x_min)).max(0.0);
        let h = (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0);
        w * h
    }
}

/// YOLO-convention box: center and size normalized to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub class_id: usize,
}

impl NormalizedBox {
    pub fn new(class_id: usize, cx: f64, cy: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        let b = Self { cx, cy, w, h, class_id };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for v in [self.cx, self.cy, self.w, self.h] {
            if !v.is_finite() {
                return Err(GeometryError::InvalidNormalizedBox(format!(
                    "non-finite field {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.cx) || !(0.0..=1.0).contains(&self.cy) {
            return Err(GeometryError::InvalidNormalizedBox(format!(
                "center ({}, {}) outside [0, 1]",
                self.cx, self.cy
            )));
        }
        if self.w <= 0.0 || self.w > 1.0 || self.h <= 0.0 || self.h > 1.0 {
            return Err(GeometryError::InvalidNormalizedBox(format!(
                "size ({}, {}) outside (0, 1]",
                self.w, self.h
            )));
        }
        Ok(())
    }
}

/// A scored, class-labeled box produced by a detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub class_id: usize,
    pub confidence: f64,
}

impl Detection {
    pub fn new(bbox: BoundingBox, class_id: usize, confidence: f64) -> Result<Self, GeometryError> {
        bbox.validate()?;
        if !confidence.is_finite() || !(0.0..=1.0).contains(&confidence) {
            return Err(GeometryError::InvalidDetection(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(Self { bbox, class_id, confidence })
    }
}

/// Intersection over union. Two degenerate zero-area boxes have IoU 0
/// rather than raising an error; clipped augmentation output can produce
/// them legitimately.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Convert a normalized center/size box to pixel corners, clipped to the
/// image bounds.
pub fn norm_to_pixel(
    n: &NormalizedBox,
    img_w: f64,
    img_h: f64,
) -> Result<BoundingBox, GeometryError> {
    if img_w <= 0.0 || img_h <= 0.0 {
        return Err(GeometryError::NonPositiveImage { width: img_w, height: img_h });
    }
    n.validate()?;
    let x_min = ((n.cx - n.w / 2.0) * img_w).clamp(0.0, img_w);
    let x_max = ((n.cx + n.w / 2.0) * img_w).clamp(0.0, img_w);
    let y_min = ((n.cy - n.h / 2.0) * img_h).clamp(0.0, img_h);
    let y_max = ((n.cy + n.h / 2.0) * img_h).clamp(0.0, img_h);
    BoundingBox::new(x_min, y_min, x_max, y_max)
}

/// Inverse of [`norm_to_pixel`] for boxes that lie fully inside the image.
/// The class id must be supplied because pixel boxes do not carry one.
pub fn pixel_to_norm(
    b: &BoundingBox,
    img_w: f64,
    img_h: f64,
    class_id: usize,
) -> Result<NormalizedBox, GeometryError> {
    if img_w <= 0.0 || img_h <= 0.0 {
        return Err(GeometryError::NonPositiveImage { width: img_w, height: img_h });
    }
    b.validate()?;
    if b.x_min < 0.0 || b.y_min < 0.0 || b.x_max > img_w || b.y_max > img_h {
        return Err(GeometryError::BoxOutsideImage(*b, img_w, img_h));
    }
    if b.area() <= 0.0 {
        return Err(GeometryError::DegenerateBox);
    }
    NormalizedBox::new(
        class_id,
        (b.x_min + b.x_max) / 2.0 / img_w,
        (b.y_min + b.y_max) / 2.0 / img_h,
        b.width() / img_w,
        b.height() / img_h,
    )
}

/// Greedy per-class non-maximum suppression.
///
/// Detections are ranked by confidence descending, ties broken by smaller
/// class id and then input order, so the result is reproducible across
/// runs. A detection is kept iff its IoU with every already-kept detection
/// of the same class stays below `iou_threshold`. Output preserves the
/// ranked order.
pub fn nms(detections: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>, GeometryError> {
    if !(0.0..=1.0).contains(&iou_threshold) {
        return Err(GeometryError::InvalidThreshold(iou_threshold));
    }
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .confidence
            .partial_cmp(&detections[a].confidence)
            .unwrap()
            .then(detections[a].class_id.cmp(&detections[b].class_id))
            .then(a.cmp(&b))
    });

    let mut kept: Vec<Detection> = Vec::new();
    for idx in order {
        let candidate = &detections[idx];
        let suppressed = kept.iter().any(|k| {
            k.class_id == candidate.class_id && iou(&k.bbox, &candidate.bbox) >= iou_threshold
        });
        if !suppressed {
            kept.push(*candidate);
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn iou_identity() {
        let b = bx(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&b, &b), 1.0);
    }

    #[test]
    fn iou_disjoint() {
        assert_eq!(iou(&bx(0.0, 0.0, 1.0, 1.0), &bx(5.0, 5.0, 6.0, 6.0)), 0.0);
    }

    #[test]
    fn iou_partial_overlap() {
        // inter = 2, union = 6; cross-checked against the rasterization
        // oracle in tests/properties.rs
        let v = iou(&bx(0.0, 0.0, 2.0, 2.0), &bx(1.0, 0.0, 3.0, 2.0));
        assert!((v - 1.0 / 3.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn iou_degenerate_boxes_yield_zero() {
        let point = bx(3.0, 3.0, 3.0, 3.0);
        assert_eq!(iou(&point, &point), 0.0);
    }

    #[test]
    fn norm_to_pixel_full_image() {
        let n = NormalizedBox::new(0, 0.5, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(norm_to_pixel(&n, 100.0, 100.0).unwrap(), bx(0.0, 0.0, 100.0, 100.0));
    }

    #[test]
    fn norm_to_pixel_quarter() {
        let n = NormalizedBox::new(2, 0.25, 0.25, 0.5, 0.5).unwrap();
        assert_eq!(norm_to_pixel(&n, 200.0, 100.0).unwrap(), bx(0.0, 0.0, 100.0, 50.0));
    }

    #[test]
    fn norm_to_pixel_rejects_bad_dims() {
        let n = NormalizedBox::new(0, 0.5, 0.5, 0.5, 0.5).unwrap();
        assert!(norm_to_pixel(&n, 0.0, 100.0).is_err());
        assert!(norm_to_pixel(&n, 100.0, -1.0).is_err());
    }

    #[test]
    fn pixel_to_norm_examples() {
        let n = pixel_to_norm(&bx(0.0, 0.0, 100.0, 100.0), 100.0, 100.0, 0).unwrap();
        assert_eq!((n.cx, n.cy, n.w, n.h), (0.5, 0.5, 1.0, 1.0));
        let n = pixel_to_norm(&bx(0.0, 0.0, 100.0, 50.0), 200.0, 100.0, 0).unwrap();
        assert_eq!((n.cx, n.cy, n.w, n.h), (0.25, 0.25, 0.5, 0.5));
    }

    #[test]
    fn pixel_to_norm_rejects_outside_and_degenerate() {
        assert!(matches!(
            pixel_to_norm(&bx(-1.0, 0.0, 5.0, 5.0), 10.0, 10.0, 0),
            Err(GeometryError::BoxOutsideImage(..))
        ));
        assert!(matches!(
            pixel_to_norm(&bx(2.0, 2.0, 2.0, 5.0), 10.0, 10.0, 0),
            Err(GeometryError::DegenerateBox)
        ));
    }

    #[test]
    fn nms_single_detection_is_identity() {
        let d = Detection::new(bx(0.0, 0.0, 10.0, 10.0), 1, 0.7).unwrap();
        assert_eq!(nms(&[d], 0.5).unwrap(), vec![d]);
    }

    #[test]
    fn nms_suppresses_same_class_overlap() {
        // IoU of the two boxes is 8/12 ≈ 0.67 ≥ 0.5
        let hi = Detection::new(bx(0.0, 0.0, 10.0, 1.0), 0, 0.9).unwrap();
        let lo = Detection::new(bx(2.0, 0.0, 12.0, 1.0), 0, 0.8).unwrap();
        assert_eq!(nms(&[lo, hi], 0.5).unwrap(), vec![hi]);
    }

    #[test]
    fn nms_suppresses_at_exact_iou_point_eight() {
        // inter 8, union 10: IoU exactly 0.8 >= 0.5
        let hi = Detection::new(bx(0.0, 0.0, 9.0, 1.0), 2, 0.9).unwrap();
        let lo = Detection::new(bx(1.0, 0.0, 10.0, 1.0), 2, 0.8).unwrap();
        assert_eq!(iou(&hi.bbox, &lo.bbox), 0.8);
        assert_eq!(nms(&[lo, hi], 0.5).unwrap(), vec![hi]);
    }

    #[test]
    fn nms_keeps_overlap_across_classes() {
        let a = Detection::new(bx(0.0, 0.0, 10.0, 1.0), 0, 0.9).unwrap();
        let b = Detection::new(bx(2.0, 0.0, 12.0, 1.0), 1, 0.8).unwrap();
        assert_eq!(nms(&[b, a], 0.5).unwrap(), vec![a, b]);
    }

    #[test]
    fn nms_empty_input() {
        assert!(nms(&[], 0.5).unwrap().is_empty());
    }

    #[test]
    fn nms_rejects_bad_threshold() {
        assert!(nms(&[], 1.5).is_err());
    }
}
