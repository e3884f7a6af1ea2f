//! Saddle keypoint detection over a scale pyramid.
//!
//! Every pyramid level is scanned independently: the inner ring test rejects
//! most pixels, survivors get a central intensity `rho` and must show the
//! alternating l/d arc pattern on the outer ring. Passing pixels carry a
//! response used for 3x3 non-maximum suppression and for the response-weighted
//! sub-pixel refinement. Level coordinates are then mapped to the base image.

mod keypoints;
mod ring;

pub use keypoints::{keypoints_from_csv, keypoints_to_csv, keypoints_to_json, Keypoint};
pub use ring::{
    inner_test, label_outer_ring, outer_test, response, InnerResult, Label, RingGeometry,
    RingLabels, Shapes, INNER_CROSS, INNER_PLUS, OUTER, RING_RADIUS,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::{build_pyramid, GrayImage, Pyramid, MIN_LEVEL_SIZE};

/// Detector configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Half-width of the intensity band around `rho` whose pixels are labelled similar.
    pub epsilon: f32,
    pub n_levels: usize,
    /// Ratio between the sizes of consecutive pyramid levels.
    pub scale_factor: f64,
    /// Keep only this many strongest keypoints (over all levels).
    pub max_features: Option<usize>,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            n_levels: 6,
            scale_factor: 1.3,
            max_features: None,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=127.0).contains(&self.epsilon) {
            return Err(Error::param(
                "epsilon",
                format!("must lie in [0, 127], got {}", self.epsilon),
            ));
        }
        if self.n_levels == 0 {
            return Err(Error::param("n_levels", "must be at least 1"));
        }
        if !self.scale_factor.is_finite() || self.scale_factor <= 1.0 {
            return Err(Error::param(
                "scale_factor",
                format!("must be a finite ratio > 1, got {}", self.scale_factor),
            ));
        }
        Ok(())
    }
}

/// Dense per-pixel responses of one level; zero where a test failed.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl ResponseMap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f32) {
        self.data[y * self.width + x] = value;
    }
}

/// Pixel counts through the two ring tests.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LevelStats {
    /// Pixels at least [`RING_RADIUS`] px from every border.
    pub tested: usize,
    pub inner_passed: usize,
    pub outer_passed: usize,
}

impl LevelStats {
    /// Fraction of tested pixels rejected by the inner ring test.
    pub fn inner_rejection_rate(&self) -> f64 {
        if self.tested == 0 {
            return 0.0;
        }
        1.0 - self.inner_passed as f64 / self.tested as f64
    }
}

/// Result of scanning one level.
#[derive(Clone, Debug)]
pub struct LevelResponse {
    pub map: ResponseMap,
    /// Pixels that passed both tests, in raster order.
    pub candidates: Vec<(usize, usize)>,
    pub stats: LevelStats,
}

struct RowScan {
    candidates: Vec<usize>,
    inner_passed: usize,
}

/// Runs both ring tests on one row, writing responses into `out`.
#[inline]
#[allow(clippy::needless_range_loop)]
fn scan_row(data: &[u8], width: usize, y: usize, epsilon: f32, out: &mut [f32]) -> RowScan {
    let mut candidates = Vec::new();
    let mut inner_passed = 0;
    let base = y * width;
    for x in RING_RADIUS..width - RING_RADIUS {
        let idx = base + x;
        let Some((_, rho)) = ring::inner_at(data, idx, width) else {
            continue;
        };
        inner_passed += 1;

        let mut values = [0u8; 16];
        for (v, &(dx, dy)) in values.iter_mut().zip(OUTER.iter()) {
            *v = data[(idx as isize + dy as isize * width as isize + dx as isize) as usize];
        }
        let mut labels = [Label::Similar; 16];
        for (l, &v) in labels.iter_mut().zip(values.iter()) {
            *l = Label::classify(v, rho, epsilon);
        }
        if !ring::outer_test_raw(&labels) {
            continue;
        }
        out[x] = values.iter().map(|&v| (f32::from(v) - rho).abs()).sum();
        candidates.push(x);
    }
    RowScan {
        candidates,
        inner_passed,
    }
}

/// Scans every pixel at least 3 px from the border of `image`.
///
/// Rows are processed in parallel on the current rayon pool; the output does
/// not depend on the number of threads.
pub fn detect_level(image: &GrayImage, params: &DetectorParams) -> Result<LevelResponse> {
    let (w, h) = (image.width(), image.height());
    if w.min(h) < MIN_LEVEL_SIZE {
        return Err(Error::param(
            "image",
            format!("{w}x{h} is smaller than {MIN_LEVEL_SIZE}x{MIN_LEVEL_SIZE}"),
        ));
    }
    let mut map = ResponseMap::zeros(w, h);
    let data = image.data();
    let epsilon = params.epsilon;

    let rows: Vec<RowScan> = map
        .data
        .par_chunks_mut(w)
        .enumerate()
        .skip(RING_RADIUS)
        .take(h - 2 * RING_RADIUS)
        .map(|(y, out)| scan_row(data, w, y, epsilon, out))
        .collect();

    let mut candidates = Vec::new();
    let mut stats = LevelStats {
        tested: (w - 2 * RING_RADIUS) * (h - 2 * RING_RADIUS),
        ..LevelStats::default()
    };
    for (row, y) in rows.into_iter().zip(RING_RADIUS..) {
        stats.inner_passed += row.inner_passed;
        stats.outer_passed += row.candidates.len();
        candidates.extend(row.candidates.into_iter().map(|x| (x, y)));
    }
    Ok(LevelResponse {
        map,
        candidates,
        stats,
    })
}

/// 3x3 non-maximum suppression within one level.
///
/// A candidate survives if its response is at least that of every neighbour
/// preceding it in raster order and strictly greater than every neighbour
/// following it, so of two equal neighbours only the raster-later one is kept.
/// Candidates on the outermost row or column of the map are compared only with
/// the neighbours that exist.
pub fn nms(map: &ResponseMap, candidates: &[(usize, usize)]) -> Vec<(usize, usize)> {
    candidates
        .iter()
        .copied()
        .filter(|&(x, y)| {
            let r = map.at(x, y);
            if r <= 0.0 {
                return false;
            }
            for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx as i64, y as i64 + dy as i64);
                    if nx < 0 || ny < 0 || nx >= map.width as i64 || ny >= map.height as i64 {
                        continue;
                    }
                    let q = map.at(nx as usize, ny as usize);
                    let precedes = dy < 0 || (dy == 0 && dx < 0);
                    if (precedes && r < q) || (!precedes && r <= q) {
                        return false;
                    }
                }
            }
            true
        })
        .collect()
}

/// Response-weighted mean position over the 3x3 neighbourhood of `p`.
pub fn refine(map: &ResponseMap, p: (usize, usize)) -> (f64, f64) {
    let (px, py) = p;
    let (mut sw, mut sx, mut sy) = (0.0f64, 0.0f64, 0.0f64);
    for y in py.saturating_sub(1)..=(py + 1).min(map.height - 1) {
        for x in px.saturating_sub(1)..=(px + 1).min(map.width - 1) {
            let w = f64::from(map.at(x, y));
            sw += w;
            sx += w * x as f64;
            sy += w * y as f64;
        }
    }
    if sw > 0.0 {
        (sx / sw, sy / sw)
    } else {
        (px as f64, py as f64)
    }
}

/// Maximum of one level before mapping to base coordinates.
#[derive(Clone, Copy, Debug)]
struct LevelMaximum {
    level: usize,
    px: usize,
    py: usize,
    x: f64,
    y: f64,
    response: f32,
}

fn level_maxima(
    image: &GrayImage,
    level: usize,
    params: &DetectorParams,
) -> Result<Vec<LevelMaximum>> {
    let scan = detect_level(image, params)?;
    Ok(nms(&scan.map, &scan.candidates)
        .into_iter()
        .map(|p| {
            let (x, y) = refine(&scan.map, p);
            LevelMaximum {
                level,
                px: p.0,
                py: p.1,
                x,
                y,
                response: scan.map.at(p.0, p.1),
            }
        })
        .collect())
}

/// Detects saddle keypoints on a pre-built pyramid.
///
/// Output is sorted by descending response; equal responses are ordered by
/// level, then by raster position within the level.
pub fn detect_pyramid(pyramid: &Pyramid, params: &DetectorParams) -> Result<Vec<Keypoint>> {
    params.validate()?;
    let per_level: Vec<Vec<LevelMaximum>> = pyramid
        .levels()
        .par_iter()
        .enumerate()
        .map(|(level, image)| level_maxima(image, level, params))
        .collect::<Result<_>>()?;

    let mut maxima: Vec<LevelMaximum> = per_level.into_iter().flatten().collect();
    maxima.sort_by(|a, b| {
        b.response
            .total_cmp(&a.response)
            .then(a.level.cmp(&b.level))
            .then(a.py.cmp(&b.py))
            .then(a.px.cmp(&b.px))
    });
    if let Some(k) = params.max_features {
        maxima.truncate(k);
    }

    Ok(maxima
        .into_iter()
        .map(|m| {
            let (x, y) = pyramid.to_base(m.level, m.x, m.y);
            Keypoint {
                x,
                y,
                level: m.level,
                scale: pyramid.level_scales()[m.level],
                response: m.response,
            }
        })
        .collect())
}

/// Builds the pyramid for `image` and detects saddle keypoints on all levels.
pub fn detect(image: &GrayImage, params: &DetectorParams) -> Result<Vec<Keypoint>> {
    params.validate()?;
    if image.width().min(image.height()) < MIN_LEVEL_SIZE {
        return Err(Error::param(
            "image",
            format!(
                "{}x{} is smaller than {MIN_LEVEL_SIZE}x{MIN_LEVEL_SIZE}",
                image.width(),
                image.height()
            ),
        ));
    }
    let pyramid = build_pyramid(image, params.n_levels, params.scale_factor)?;
    detect_pyramid(&pyramid, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_with(w: usize, h: usize, values: &[((usize, usize), f32)]) -> ResponseMap {
        let mut m = ResponseMap::zeros(w, h);
        for &((x, y), r) in values {
            m.set(x, y, r);
        }
        m
    }

    #[test]
    fn params_validation() {
        assert!(DetectorParams::default().validate().is_ok());
        for bad in [
            DetectorParams {
                epsilon: -1.0,
                ..Default::default()
            },
            DetectorParams {
                epsilon: 128.0,
                ..Default::default()
            },
            DetectorParams {
                n_levels: 0,
                ..Default::default()
            },
            DetectorParams {
                scale_factor: 1.0,
                ..Default::default()
            },
        ] {
            assert!(
                matches!(bad.validate(), Err(Error::Param { .. })),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn nms_isolated_maximum_kept() {
        let m = map_with(10, 10, &[((5, 5), 7.0)]);
        assert_eq!(nms(&m, &[(5, 5)]), vec![(5, 5)]);
    }

    #[test]
    fn nms_strict_dominance() {
        let m = map_with(10, 10, &[((5, 5), 10.0), ((6, 5), 12.0)]);
        assert_eq!(nms(&m, &[(5, 5), (6, 5)]), vec![(6, 5)]);
        let m = map_with(10, 10, &[((5, 5), 12.0), ((4, 6), 10.0)]);
        assert_eq!(nms(&m, &[(5, 5), (4, 6)]), vec![(5, 5)]);
    }

    #[test]
    fn nms_tie_keeps_raster_later() {
        let m = map_with(10, 10, &[((5, 5), 10.0), ((6, 5), 10.0)]);
        assert_eq!(nms(&m, &[(5, 5), (6, 5)]), vec![(6, 5)]);
        let m = map_with(10, 10, &[((5, 5), 10.0), ((5, 6), 10.0)]);
        assert_eq!(nms(&m, &[(5, 5), (5, 6)]), vec![(5, 6)]);
        // 2x2 plateau
        let cells = [(5, 5), (6, 5), (5, 6), (6, 6)];
        let vals: Vec<_> = cells.iter().map(|&c| (c, 3.0)).collect();
        assert_eq!(nms(&map_with(10, 10, &vals), &cells), vec![(6, 6)]);
    }

    #[test]
    fn refine_examples() {
        let m = map_with(10, 10, &[((5, 5), 10.0)]);
        assert_eq!(refine(&m, (5, 5)), (5.0, 5.0));
        let m = map_with(10, 10, &[((5, 5), 10.0), ((6, 5), 10.0)]);
        assert_eq!(refine(&m, (5, 5)), (5.5, 5.0));
        let m = map_with(10, 10, &[((5, 5), 30.0), ((4, 5), 10.0)]);
        assert_eq!(refine(&m, (5, 5)), (4.75, 5.0));
    }

    #[test]
    fn refine_stays_within_one_pixel() {
        let m = map_with(
            10,
            10,
            &[
                ((5, 5), 9.0),
                ((4, 4), 8.0),
                ((6, 6), 1.0),
                ((4, 6), 5.0),
                ((6, 4), 2.0),
            ],
        );
        let (x, y) = refine(&m, (5, 5));
        assert!((x - 5.0).abs() <= 1.0 && (y - 5.0).abs() <= 1.0);
    }

    #[test]
    fn constant_image_has_no_candidates() {
        let scan =
            detect_level(&GrayImage::filled(32, 32, 90), &DetectorParams::default()).unwrap();
        assert!(scan.candidates.is_empty());
        assert_eq!(scan.stats.inner_passed, 0);
        assert_eq!(scan.stats.tested, 26 * 26);
    }

    #[test]
    fn ramp_has_no_candidates() {
        let img = GrayImage::from_fn(40, 40, |x, y| (20 + 3 * x + 2 * y) as u8);
        let scan = detect_level(&img, &DetectorParams::default()).unwrap();
        assert!(scan.candidates.is_empty());
    }

    #[test]
    fn ideal_chessboard_corner() {
        // four 12px blocks meeting between pixels 11 and 12
        let img = GrayImage::from_fn(24, 24, |x, y| if (x < 12) == (y < 12) { 255 } else { 0 });
        let scan = detect_level(&img, &DetectorParams::default()).unwrap();
        let near = |x: f64, y: f64| (x - 11.5).abs() <= 1.0 && (y - 11.5).abs() <= 1.0;
        assert!(scan
            .candidates
            .iter()
            .any(|&(x, y)| near(x as f64, y as f64)));
        let kept = nms(&scan.map, &scan.candidates);
        assert_eq!(kept.len(), 1);
        let (x, y) = refine(&scan.map, kept[0]);
        assert!(near(x, y), "refined to ({x}, {y})");
    }

    #[test]
    fn too_small_image_is_rejected() {
        let err = detect(&GrayImage::filled(15, 40, 0), &DetectorParams::default()).unwrap_err();
        assert!(matches!(err, Error::Param { .. }));
    }

    #[test]
    fn constant_image_detects_nothing() {
        assert!(detect(
            &GrayImage::filled(256, 256, 200),
            &DetectorParams::default()
        )
        .unwrap()
        .is_empty());
    }
}
