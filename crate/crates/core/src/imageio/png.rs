use std::path::Path;

use super::GrayImage;
use crate::error::{Error, Result};

/// Loads any PNG and converts it to 8-bit luma.
pub fn load_png(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format("png", other.to_string()),
    })?;
    let luma = img.into_luma8();
    let (w, h) = luma.dimensions();
    GrayImage::new(w as usize, h as usize, luma.into_raw())
}
