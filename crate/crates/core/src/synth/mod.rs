//! Synthetic images with analytically known saddle points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Homography;
use crate::imageio::GrayImage;

/// Ground-truth projections closer than this to a border are dropped.
pub const GROUND_TRUTH_MARGIN: f64 = 8.0;

/// Chessboard with `square`-pixel cells; the cell containing the origin is white.
pub fn chessboard(width: usize, height: usize, square: usize) -> Result<GrayImage> {
    if square < 4 {
        return Err(Error::param(
            "square",
            format!("must be at least 4, got {square}"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::param("size", "image must be at least 1x1"));
    }
    Ok(GrayImage::from_fn(width, height, |x, y| {
        if (x / square + y / square).is_multiple_of(2) {
            255
        } else {
            0
        }
    }))
}

/// Interior chessboard corners in pixel-center coordinates.
///
/// Cell edges fall between pixels `k*square - 1` and `k*square`, so each corner
/// sits at `(i*square - 0.5, j*square - 0.5)`. Corners within `margin` px of the
/// border are skipped.
pub fn chessboard_corners(
    width: usize,
    height: usize,
    square: usize,
    margin: f64,
) -> Vec<(f64, f64)> {
    let mut corners = Vec::new();
    for j in 1..=height / square {
        for i in 1..=width / square {
            let (x, y) = ((i * square) as f64 - 0.5, (j * square) as f64 - 0.5);
            if x >= margin
                && y >= margin
                && x <= width as f64 - 1.0 - margin
                && y <= height as f64 - 1.0 - margin
            {
                corners.push((x, y));
            }
        }
    }
    corners
}

/// Normalized, 3-sigma truncated sampled Gaussian.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

/// Separable Gaussian blur with edge replication; `sigma == 0` returns a copy.
pub fn gaussian_blur(image: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::param(
            "sigma",
            format!("must be finite and >= 0, got {sigma}"),
        ));
    }
    if sigma == 0.0 {
        return Ok(image.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let (w, h) = (image.width() as i64, image.height() as i64);
    let clamp = |v: i64, n: i64| v.clamp(0, n - 1) as usize;

    let mut horizontal = vec![0.0f64; (w * h) as usize];
    for y in 0..h {
        let row = image.row(y as usize);
        for x in 0..w {
            horizontal[(y * w + x) as usize] = kernel
                .iter()
                .zip(-radius..)
                .map(|(k, d)| k * f64::from(row[clamp(x + d, w)]))
                .sum();
        }
    }
    Ok(GrayImage::from_fn(w as usize, h as usize, |x, y| {
        let v: f64 = kernel
            .iter()
            .zip(-radius..)
            .map(|(k, d)| k * horizontal[clamp(y as i64 + d, h) * w as usize + x])
            .sum();
        (v + 0.5).floor().clamp(0.0, 255.0) as u8
    }))
}

/// Perspective view of the plane pattern `sin(2 pi u / wavelength) * sin(2 pi v / wavelength)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSpec {
    pub width: usize,
    pub height: usize,
    /// Period of each sine factor on the plane, in plane units (pixels under the identity).
    pub wavelength: f64,
    /// Maps plane coordinates `(u, v)` to image coordinates `(x, y)`.
    pub homography: Homography,
    /// Amplitude scale in `[0, 1]`.
    pub contrast: f64,
}

/// An analytic saddle on the plane and its image projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSaddle {
    pub u: f64,
    pub v: f64,
    pub x: f64,
    pub y: f64,
}

impl SinusoidSpec {
    pub fn new(width: usize, height: usize, wavelength: f64) -> Self {
        Self {
            width,
            height,
            wavelength,
            homography: Homography::identity(),
            contrast: 1.0,
        }
    }

    /// A gentle perspective tilt about the image center: the bottom of the view
    /// recedes by roughly 15% across a 256 px tall image, with a small shear.
    pub fn mild_perspective(width: usize, height: usize) -> Homography {
        let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
        let tilt = Homography::new([[1.0, 0.06, 0.0], [0.02, 1.0, 0.0], [1e-4, 6e-4, 1.0]])
            .expect("constant matrix is invertible");
        Homography::translation(cx, cy)
            .compose(&tilt)
            .compose(&Homography::translation(-cx, -cy))
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("size", "image must be at least 1x1"));
        }
        if !self.wavelength.is_finite() || self.wavelength < 8.0 {
            return Err(Error::param(
                "wavelength",
                format!("must be at least 8 px, got {}", self.wavelength),
            ));
        }
        if !(0.0..=1.0).contains(&self.contrast) {
            return Err(Error::param(
                "contrast",
                format!("must lie in [0, 1], got {}", self.contrast),
            ));
        }
        Ok(())
    }

    /// Continuous intensity on the plane before quantization.
    #[inline]
    pub fn plane_intensity(&self, u: f64, v: f64) -> f64 {
        let k = 2.0 * PI / self.wavelength;
        127.5 + 127.5 * self.contrast * (k * u).sin() * (k * v).sin()
    }

    /// Continuous intensity at image position `(x, y)`.
    pub fn intensity(&self, inverse: &Homography, x: f64, y: f64) -> Result<f64> {
        let (u, v) = inverse.project(x, y)?;
        Ok(self.plane_intensity(u, v))
    }

    /// Renders the pattern and lists every projected saddle at least
    /// [`GROUND_TRUTH_MARGIN`] px inside the image.
    pub fn render(&self) -> Result<(GrayImage, Vec<GroundTruthSaddle>)> {
        sinusoid(self)
    }
}

/// Renders a [`SinusoidSpec`] and its saddle ground truth.
///
/// The saddles of `sin(ku) sin(kv)` are the points where both sines vanish, i.e.
/// the lattice `(j * wavelength / 2, k * wavelength / 2)`; there the mixed
/// derivative is `+-k^2` while both pure second derivatives are zero.
pub fn sinusoid(spec: &SinusoidSpec) -> Result<(GrayImage, Vec<GroundTruthSaddle>)> {
    spec.validate()?;
    let h = spec.homography;
    let inverse = h.inverse();

    // The whole image must stay on one side of the vanishing line.
    let (w, ht) = (spec.width as f64 - 1.0, spec.height as f64 - 1.0);
    let corners = [(0.0, 0.0), (w, 0.0), (0.0, ht), (w, ht)];
    let signs: Vec<f64> = corners.iter().map(|&(x, y)| inverse.w(x, y)).collect();
    if signs.iter().any(|s| s.abs() < 1e-9)
        || !(signs.iter().all(|&s| s > 0.0) || signs.iter().all(|&s| s < 0.0))
    {
        return Err(Error::param(
            "homography",
            "image contains points mapping to infinity on the pattern plane",
        ));
    }

    let mut data = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let value = spec.intensity(&inverse, x as f64, y as f64)?;
            data.push((value + 0.5).floor().clamp(0.0, 255.0) as u8);
        }
    }
    let image = GrayImage::new(spec.width, spec.height, data)?;

    if spec.contrast == 0.0 {
        return Ok((image, Vec::new()));
    }

    let plane: Vec<(f64, f64)> = corners
        .iter()
        .map(|&(x, y)| inverse.project(x, y))
        .collect::<Result<_>>()?;
    let step = spec.wavelength / 2.0;
    let lo_u = plane.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi_u = plane.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let lo_v = plane.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi_v = plane.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);

    let mut saddles = Vec::new();
    for k in (lo_v / step).floor() as i64..=(hi_v / step).ceil() as i64 {
        for j in (lo_u / step).floor() as i64..=(hi_u / step).ceil() as i64 {
            let (u, v) = (j as f64 * step, k as f64 * step);
            let Ok((x, y)) = h.project(u, v) else {
                continue;
            };
            if x >= GROUND_TRUTH_MARGIN
                && y >= GROUND_TRUTH_MARGIN
                && x <= w - GROUND_TRUTH_MARGIN
                && y <= ht - GROUND_TRUTH_MARGIN
            {
                saddles.push(GroundTruthSaddle { u, v, x, y });
            }
        }
    }
    Ok((image, saddles))
}

/// Resamples `image` under `h` (source to destination) with bilinear interpolation.
///
/// Destination pixels whose preimage falls outside the source take the nearest edge value.
pub fn warp(image: &GrayImage, h: &Homography, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::param("size", "image must be at least 1x1"));
    }
    let inverse = h.inverse();
    let (sw, sh) = (image.width() as f64 - 1.0, image.height() as f64 - 1.0);
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (u, v) = inverse.project(x as f64, y as f64)?;
            let (u, v) = (u.clamp(0.0, sw), v.clamp(0.0, sh));
            let (x0, y0) = (u.floor() as usize, v.floor() as usize);
            let (x1, y1) = (
                (x0 + 1).min(image.width() - 1),
                (y0 + 1).min(image.height() - 1),
            );
            let (fx, fy) = (u - x0 as f64, v - y0 as f64);
            let p = |x, y| f64::from(image.get(x, y));
            let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
            let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
            let value = top * (1.0 - fy) + bottom * fy;
            data.push((value + 0.5).floor().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(width, height, data)
}

/// `u,v,x,y` CSV of ground-truth points.
pub fn ground_truth_to_csv(points: &[GroundTruthSaddle]) -> String {
    let mut out = String::from("u,v,x,y\n");
    for p in points {
        out.push_str(&format!("{:.3},{:.3},{:.3},{:.3}\n", p.u, p.v, p.x, p.y));
    }
    out
}
