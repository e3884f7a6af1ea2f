use super::GrayImage;
use crate::error::{Error, Result};

/// Smallest side length a pyramid level may have.
///
/// Leaves room for the 7x7 ring window plus the NMS neighbourhood.
pub const MIN_LEVEL_SIZE: usize = 16;

/// Fractional bits of the per-axis interpolation weights.
const WEIGHT_BITS: u32 = 11;
const WEIGHT_ONE: u32 = 1 << WEIGHT_BITS;

/// Scale-space pyramid; level `n` is the source shrunk by `scale_factor^n`.
#[derive(Clone, Debug)]
pub struct Pyramid {
    levels: Vec<GrayImage>,
    scale_factor: f64,
    level_scales: Vec<f64>,
}

impl Pyramid {
    pub fn levels(&self) -> &[GrayImage] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &GrayImage {
        &self.levels[n]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    pub fn level_scales(&self) -> &[f64] {
        &self.level_scales
    }

    /// Maps a level-`n` pixel-center coordinate onto the base image.
    #[inline]
    pub fn to_base(&self, level: usize, x: f64, y: f64) -> (f64, f64) {
        let s = self.level_scales[level];
        ((x + 0.5) * s - 0.5, (y + 0.5) * s - 0.5)
    }

    /// Inverse of [`Pyramid::to_base`].
    #[inline]
    pub fn from_base(&self, level: usize, x: f64, y: f64) -> (f64, f64) {
        let s = self.level_scales[level];
        ((x + 0.5) / s - 0.5, (y + 0.5) / s - 0.5)
    }
}

#[inline]
fn scaled_size(size: usize, factor: f64) -> usize {
    // f64::round rounds half away from zero, which is half-up for positive sizes
    (size as f64 / factor).round() as usize
}

/// Source taps and the weight of the far tap for every output coordinate along one axis.
fn axis_taps(out_len: usize, in_len: usize, factor: f64) -> Vec<(usize, usize, u32)> {
    (0..out_len)
        .map(|o| {
            let src = ((o as f64 + 0.5) * factor - 0.5).clamp(0.0, (in_len - 1) as f64);
            let i0 = src.floor() as usize;
            let i1 = (i0 + 1).min(in_len - 1);
            let w1 = ((src - i0 as f64) * WEIGHT_ONE as f64).round() as u32;
            (i0, i1, w1)
        })
        .collect()
}

/// Shrinks `image` by `factor` with bilinear interpolation at pixel centers.
///
/// Output sample `(ox, oy)` reads the source at `((ox + 0.5) * factor - 0.5, ...)`,
/// clamped to the image, and rounds half-up. Interpolation runs in fixed point so
/// that adding a constant to every input pixel adds exactly that constant to the
/// output.
pub fn downsample(image: &GrayImage, factor: f64) -> Result<GrayImage> {
    if !factor.is_finite() || factor <= 1.0 {
        return Err(Error::param(
            "scale_factor",
            format!("must be a finite ratio > 1, got {factor}"),
        ));
    }
    let out_w = scaled_size(image.width(), factor);
    let out_h = scaled_size(image.height(), factor);
    if out_w == 0 || out_h == 0 {
        return Err(Error::param(
            "scale_factor",
            format!(
                "{}x{} shrinks to nothing by {factor}",
                image.width(),
                image.height()
            ),
        ));
    }

    let xs = axis_taps(out_w, image.width(), factor);
    let ys = axis_taps(out_h, image.height(), factor);
    let half = 1u32 << (2 * WEIGHT_BITS - 1);

    let mut data = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, wy1) in &ys {
        let wy0 = WEIGHT_ONE - wy1;
        let r0 = image.row(y0);
        let r1 = image.row(y1);
        data.extend(xs.iter().map(|&(x0, x1, wx1)| {
            let wx0 = WEIGHT_ONE - wx1;
            let top = wx0 * u32::from(r0[x0]) + wx1 * u32::from(r0[x1]);
            let bottom = wx0 * u32::from(r1[x0]) + wx1 * u32::from(r1[x1]);
            ((wy0 * top + wy1 * bottom + half) >> (2 * WEIGHT_BITS)) as u8
        }));
    }
    GrayImage::new(out_w, out_h, data)
}

/// Builds up to `n_levels` levels, stopping before any level whose shorter side
/// would drop below [`MIN_LEVEL_SIZE`]. Level 0 is always the unmodified source.
pub fn build_pyramid(image: &GrayImage, n_levels: usize, factor: f64) -> Result<Pyramid> {
    if n_levels == 0 {
        return Err(Error::param("n_levels", "must be at least 1"));
    }
    if !factor.is_finite() || factor <= 1.0 {
        return Err(Error::param(
            "scale_factor",
            format!("must be a finite ratio > 1, got {factor}"),
        ));
    }

    let mut levels = vec![image.clone()];
    while levels.len() < n_levels {
        let prev = levels.last().expect("level 0 present");
        let w = scaled_size(prev.width(), factor);
        let h = scaled_size(prev.height(), factor);
        if w.min(h) < MIN_LEVEL_SIZE {
            break;
        }
        let next = downsample(prev, factor)?;
        levels.push(next);
    }
    let level_scales = (0..levels.len()).map(|n| factor.powi(n as i32)).collect();
    Ok(Pyramid {
        levels,
        scale_factor: factor,
        level_scales,
    })
}
