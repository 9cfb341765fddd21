//! Pixel and annotation transforms. Every random choice derives from the
//! spec seed and the image id, so a corpus regenerates bit-identically no
//! matter how work is scheduled across workers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AugmentationSpec, DatasetError, LabeledImage, Transform};
use crate::buffer::RgbBuffer;
use crate::geometry::NormalizedBox;

/// Apply the spec's transforms in order. Returns the transformed pixels and
/// a matching `LabeledImage` whose boxes have been remapped; boxes that
/// fall below the crop visibility threshold are dropped.
pub fn apply_augmentations(
    img: &LabeledImage,
    pixels: &RgbBuffer,
    spec: &AugmentationSpec,
) -> Result<(RgbBuffer, LabeledImage), DatasetError> {
    spec.validate()?;
    if pixels.width() != img.width || pixels.height() != img.height {
        return Err(DatasetError::BufferMismatch {
            got_w: pixels.width(),
            got_h: pixels.height(),
            want_w: img.width,
            want_h: img.height,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed ^ fnv1a64(img.image_id.as_bytes()));
    let mut buffer = pixels.clone();
    let mut boxes = img.annotations.clone();
    for t in &spec.transforms {
        let (next_buffer, next_boxes) = match t {
            Transform::HorizontalFlip => horizontal_flip(&buffer, &boxes),
            Transform::Letterbox { target_w, target_h, pad_value } => {
                letterbox(&buffer, &boxes, *target_w, *target_h, *pad_value)
            }
            Transform::RandomCrop { min_scale, max_scale, min_box_visibility } => {
                random_crop(&mut rng, &buffer, &boxes, *min_scale, *max_scale, *min_box_visibility)
            }
        };
        buffer = next_buffer;
        boxes = next_boxes;
    }
    let out = LabeledImage {
        image_id: img.image_id.clone(),
        width: buffer.width(),
        height: buffer.height(),
        annotations: boxes,
    };
    Ok((buffer, out))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn horizontal_flip(buffer: &RgbBuffer, boxes: &[NormalizedBox]) -> (RgbBuffer, Vec<NormalizedBox>) {
    let (w, h) = (buffer.width(), buffer.height());
    let mut out = RgbBuffer::filled(w, h, 0).expect("positive dims");
    for y in 0..h {
        for x in 0..w {
            out.set_pixel(x, y, buffer.pixel(w - 1 - x, y));
        }
    }
    let flipped = boxes
        .iter()
        .map(|b| NormalizedBox { cx: 1.0 - b.cx, ..*b })
        .collect();
    (out, flipped)
}

fn letterbox(
    buffer: &RgbBuffer,
    boxes: &[NormalizedBox],
    target_w: u32,
    target_h: u32,
    pad_value: u8,
) -> (RgbBuffer, Vec<NormalizedBox>) {
    let (w, h) = (buffer.width() as f64, buffer.height() as f64);
    let scale = (target_w as f64 / w).min(target_h as f64 / h);
    let content_w = ((w * scale).round() as u32).clamp(1, target_w);
    let content_h = ((h * scale).round() as u32).clamp(1, target_h);
    let pad_left = (target_w - content_w) / 2;
    let pad_top = (target_h - content_h) / 2;

    let mut out = RgbBuffer::filled(target_w, target_h, pad_value).expect("positive dims");
    // nearest-neighbor resize into the content region
    for y in 0..content_h {
        let src_y = (((y as f64 + 0.5) * h / content_h as f64) as u32).min(buffer.height() - 1);
        for x in 0..content_w {
            let src_x = (((x as f64 + 0.5) * w / content_w as f64) as u32).min(buffer.width() - 1);
            out.set_pixel(pad_left + x, pad_top + y, buffer.pixel(src_x, src_y));
        }
    }

    let (cw, ch) = (content_w as f64, content_h as f64);
    let (tw, th) = (target_w as f64, target_h as f64);
    let remapped = boxes
        .iter()
        .filter_map(|b| {
            NormalizedBox::new(
                b.class_id,
                (pad_left as f64 + b.cx * cw) / tw,
                (pad_top as f64 + b.cy * ch) / th,
                b.w * cw / tw,
                b.h * ch / th,
            )
            .ok()
        })
        .collect();
    (out, remapped)
}

fn random_crop(
    rng: &mut ChaCha8Rng,
    buffer: &RgbBuffer,
    boxes: &[NormalizedBox],
    min_scale: f64,
    max_scale: f64,
    min_box_visibility: f64,
) -> (RgbBuffer, Vec<NormalizedBox>) {
    let (w, h) = (buffer.width(), buffer.height());
    // up to 10 attempts at a non-degenerate window, then identity
    for _ in 0..10 {
        let area_scale = rng.random_range(min_scale..=max_scale);
        let side = area_scale.sqrt();
        let crop_w = (w as f64 * side).round() as u32;
        let crop_h = (h as f64 * side).round() as u32;
        if crop_w == 0 || crop_h == 0 || crop_w > w || crop_h > h {
            continue;
        }
        let x0 = rng.random_range(0..=(w - crop_w));
        let y0 = rng.random_range(0..=(h - crop_h));

        let mut out = RgbBuffer::filled(crop_w, crop_h, 0).expect("positive dims");
        for y in 0..crop_h {
            for x in 0..crop_w {
                out.set_pixel(x, y, buffer.pixel(x0 + x, y0 + y));
            }
        }

        let (wf, hf) = (w as f64, h as f64);
        let window = (x0 as f64, y0 as f64, (x0 + crop_w) as f64, (y0 + crop_h) as f64);
        let remapped = boxes
            .iter()
            .filter_map(|b| {
                let bx0 = (b.cx - b.w / 2.0) * wf;
                let bx1 = (b.cx + b.w / 2.0) * wf;
                let by0 = (b.cy - b.h / 2.0) * hf;
                let by1 = (b.cy + b.h / 2.0) * hf;
                let cx0 = bx0.max(window.0);
                let cx1 = bx1.min(window.2);
                let cy0 = by0.max(window.1);
                let cy1 = by1.min(window.3);
                if cx1 <= cx0 || cy1 <= cy0 {
                    return None;
                }
                let visible = (cx1 - cx0) * (cy1 - cy0);
                let original = (bx1 - bx0) * (by1 - by0);
                if original <= 0.0 || visible / original < min_box_visibility {
                    return None;
                }
                let (cw, ch) = (crop_w as f64, crop_h as f64);
                NormalizedBox::new(
                    b.class_id,
                    (((cx0 + cx1) / 2.0 - window.0) / cw).clamp(0.0, 1.0),
                    (((cy0 + cy1) / 2.0 - window.1) / ch).clamp(0.0, 1.0),
                    ((cx1 - cx0) / cw).min(1.0),
                    ((cy1 - cy0) / ch).min(1.0),
                )
                .ok()
            })
            .collect();
        return (out, remapped);
    }
    (buffer.clone(), boxes.to_vec())
}
