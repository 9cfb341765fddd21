//! Minimal 8-bit RGB pixel buffer. Augmentation math operates on this type
//! directly; JPEG/PNG encoding and decoding live behind [`crate::codec`].

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BufferError {
    #[error("buffer dimensions must be positive, got {0}x{1}")]
    ZeroDimension(u32, u32),
    #[error("pixel data length {got} does not match {width}x{height}x3")]
    LengthMismatch { width: u32, height: u32, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RgbBuffer {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbBuffer {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, BufferError> {
        if width == 0 || height == 0 {
            return Err(BufferError::ZeroDimension(width, height));
        }
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(BufferError::LengthMismatch { width, height, got: data.len() });
        }
        Ok(Self { width, height, data })
    }

    /// Buffer filled with a uniform gray value.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self, BufferError> {
        if width == 0 || height == 0 {
            return Err(BufferError::ZeroDimension(width, height));
        }
        Ok(Self {
            width,
            height,
            data: vec![value; width as usize * height as usize * 3],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, px: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&px);
    }
}
