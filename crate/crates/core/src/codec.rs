//! Codec boundary: the only place that touches JPEG/PNG bytes. Everything
//! else works on [`RgbBuffer`] values.

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, ImageReader, RgbImage};
use thiserror::Error;

use crate::buffer::RgbBuffer;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("bad image: {0}")]
    BadImage(String),
    #[error("io error for {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Decode JPEG or PNG bytes into an RGB buffer.
pub fn decode(bytes: &[u8]) -> Result<RgbBuffer, CodecError> {
    let img = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| CodecError::BadImage(e.to_string()))?
        .decode()
        .map_err(|e| CodecError::BadImage(e.to_string()))?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    RgbBuffer::new(w, h, rgb.into_raw()).map_err(|e| CodecError::BadImage(e.to_string()))
}

/// Read only the dimensions of an image file without decoding pixel data.
pub fn read_dimensions(path: &Path) -> Result<(u32, u32), CodecError> {
    ImageReader::open(path)
        .map_err(|e| CodecError::Io { path: path.display().to_string(), source: e })?
        .into_dimensions()
        .map_err(|e| CodecError::BadImage(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<RgbBuffer, CodecError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CodecError::Io { path: path.display().to_string(), source: e })?;
    decode(&bytes)
}

pub fn save_png(buffer: &RgbBuffer, path: &Path) -> Result<(), CodecError> {
    let img = RgbImage::from_raw(buffer.width(), buffer.height(), buffer.data().to_vec())
        .expect("buffer invariant guarantees matching length");
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| CodecError::BadImage(format!("{}: {e}", path.display())))
}

pub fn encode_png(buffer: &RgbBuffer) -> Result<Vec<u8>, CodecError> {
    let img = RgbImage::from_raw(buffer.width(), buffer.height(), buffer.data().to_vec())
        .expect("buffer invariant guarantees matching length");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| CodecError::BadImage(e.to_string()))?;
    Ok(out.into_inner())
}
