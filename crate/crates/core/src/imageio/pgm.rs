//! Netpbm graymap (P2 ASCII / P5 binary) with maxval up to 255.

use std::path::Path;

use super::GrayImage;
use crate::error::{Error, Result};

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

/// Writes a binary (P5) graymap with maxval 255.
pub fn save_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.data().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(image.data());
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments that run to end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, field: &'static str) -> Result<u64> {
        let tok = self
            .token()
            .ok_or_else(|| Error::format(field, "unexpected end of file"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| {
                Error::format(
                    field,
                    format!(
                        "expected an unsigned integer, got {:?}",
                        String::from_utf8_lossy(tok)
                    ),
                )
            })
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(Error::format("magic", "expected P2 or P5")),
    };
    cur.pos = 2;
    if !cur
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(Error::format("magic", "expected P2 or P5"));
    }

    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 {
        return Err(Error::format("width", "must be positive"));
    }
    if height == 0 {
        return Err(Error::format("height", "must be positive"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::format("maxval", format!("{maxval} not in 1..=255")));
    }
    let n = (width as usize)
        .checked_mul(height as usize)
        .ok_or_else(|| Error::format("width", "image too large"))?;

    let data = if binary {
        // exactly one whitespace byte separates maxval from the raster
        let start = cur.pos + 1;
        let raster = bytes.get(start..).filter(|r| r.len() >= n).ok_or_else(|| {
            Error::format(
                "raster",
                format!(
                    "truncated: expected {n} bytes, found {}",
                    bytes.len().saturating_sub(start)
                ),
            )
        })?;
        raster[..n].to_vec()
    } else {
        let mut data = Vec::with_capacity(n);
        for i in 0..n {
            let v = cur.number("raster").map_err(|_| {
                Error::format(
                    "raster",
                    format!("truncated or invalid sample at index {i}"),
                )
            })?;
            data.push(v as u8);
            if v > maxval {
                return Err(Error::format(
                    "raster",
                    format!("sample {v} exceeds maxval {maxval}"),
                ));
            }
        }
        data
    };

    if binary {
        if let Some(v) = data.iter().find(|&&v| u64::from(v) > maxval) {
            return Err(Error::format(
                "raster",
                format!("sample {v} exceeds maxval {maxval}"),
            ));
        }
    }

    GrayImage::new(width as usize, height as usize, data)
}
