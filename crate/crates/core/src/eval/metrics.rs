use serde::{Deserialize, Serialize};

use super::homography::Homography;
use super::matching::Match;
use crate::detector::Keypoint;
use crate::error::{Error, Result};
use crate::imageio::GrayImage;

pub const DEFAULT_TOLERANCE: f64 = 3.0;
pub const DEFAULT_DISK_RADIUS: f64 = 25.0;
/// Inliers needed for a pair to count as matched.
pub const MATCHED_PAIR_MIN_INLIERS: usize = 15;

/// A tentative match with its reprojection error in the reference image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifiedMatch {
    #[serde(flatten)]
    pub m: Match,
    pub error: f64,
    pub inlier: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub tolerance: f64,
    pub matches: Vec<VerifiedMatch>,
}

impl Verification {
    pub fn inliers(&self) -> impl Iterator<Item = &VerifiedMatch> {
        self.matches.iter().filter(|m| m.inlier)
    }

    pub fn inlier_count(&self) -> usize {
        self.inliers().count()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.matches.iter().map(|m| m.error).collect()
    }

    /// Reference-image positions of the inliers.
    pub fn inlier_points(&self, kps_a: &[Keypoint]) -> Vec<(f64, f64)> {
        self.inliers()
            .map(|m| (kps_a[m.m.a].x, kps_a[m.m.a].y))
            .collect()
    }
}

fn check_non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be finite and >= 0, got {v}"),
        ))
    }
}

/// Scores each match by the distance between `kps_a[a]` and `H^-1(kps_b[b])`.
///
/// `h` maps the reference image A to B.
pub fn verify(
    matches: &[Match],
    h: &Homography,
    kps_a: &[Keypoint],
    kps_b: &[Keypoint],
    tolerance: f64,
) -> Result<Verification> {
    check_non_negative("tolerance", tolerance)?;
    let inv = h.inverse();
    let matches = matches
        .iter()
        .map(|&m| {
            let (ka, kb) = (&kps_a[m.a], &kps_b[m.b]);
            let (x, y) = inv.project(kb.x, kb.y)?;
            let error = (x - ka.x).hypot(y - ka.y);
            Ok(VerifiedMatch {
                m,
                error,
                inlier: error <= tolerance,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Verification { tolerance, matches })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    pub ratio: f64,
    pub covered: usize,
    /// 255 where covered, 0 elsewhere.
    pub mask: GrayImage,
}

#[inline]
fn in_disk(i: usize, j: usize, x: f64, y: f64, r2: f64) -> bool {
    let (dx, dy) = (i as f64 - x, j as f64 - y);
    dx * dx + dy * dy <= r2
}

/// Union of radius-`radius` disks (pixel-center distance) around `points`.
pub fn coverage(
    points: &[(f64, f64)],
    width: usize,
    height: usize,
    radius: f64,
) -> Result<Coverage> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::param(
            "disk_radius",
            format!("must be > 0, got {radius}"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::param("size", "image must be at least 1x1"));
    }
    let r2 = radius * radius;
    let mut mask = vec![0u8; width * height];
    for &(x, y) in points {
        let j0 = (y - radius).ceil().max(0.0);
        let j1 = (y + radius).floor().min(height as f64 - 1.0);
        if j1 < j0 {
            continue;
        }
        for j in j0 as usize..=j1 as usize {
            let dy = j as f64 - y;
            let half = (r2 - dy * dy).max(0.0).sqrt();
            // widen by one on each side; the exact predicate decides
            let i0 = ((x - half).ceil() - 1.0).max(0.0);
            let i1 = ((x + half).floor() + 1.0).min(width as f64 - 1.0);
            if i1 < i0 {
                continue;
            }
            let row = &mut mask[j * width..(j + 1) * width];
            let (i0, i1) = (i0 as usize, i1 as usize);
            for (i, px) in row.iter_mut().enumerate().take(i1 + 1).skip(i0) {
                if in_disk(i, j, x, y, r2) {
                    *px = 255;
                }
            }
        }
    }
    let covered = mask.iter().filter(|&&v| v != 0).count();
    Ok(Coverage {
        ratio: covered as f64 / (width * height) as f64,
        covered,
        mask: GrayImage::new(width, height, mask)?,
    })
}

/// Fraction of errors at or below each threshold.
pub fn inlier_ratio_curve(errors: &[f64], thresholds: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(Error::EmptyMatches);
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| sorted.partition_point(|&e| e <= t) as f64 / n)
        .collect())
}

/// 0.25, 0.5, ..., 5.0 px.
pub fn default_thresholds() -> Vec<f64> {
    (1..=20).map(|k| f64::from(k) * 0.25).collect()
}

pub fn matched_pair(inlier_count: usize) -> bool {
    inlier_count >= MATCHED_PAIR_MIN_INLIERS
}
