use std::fmt::Write as _;

use serde::Serialize;

use super::descriptor::{describe, Described};
use super::homography::Homography;
use super::matching::match_descriptors;
use super::metrics::{
    coverage, default_thresholds, inlier_ratio_curve, matched_pair, verify, Coverage, Verification,
    DEFAULT_DISK_RADIUS, DEFAULT_TOLERANCE,
};
use crate::detector::{detect_pyramid, DetectorParams, Keypoint};
use crate::error::Result;
use crate::imageio::{build_pyramid, GrayImage};

#[derive(Clone, Debug, PartialEq)]
pub struct EvalParams {
    pub detector: DetectorParams,
    pub tolerance: f64,
    pub disk_radius: f64,
    pub thresholds: Vec<f64>,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            detector: DetectorParams::default(),
            tolerance: DEFAULT_TOLERANCE,
            disk_radius: DEFAULT_DISK_RADIUS,
            thresholds: default_thresholds(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub ratio: f64,
}

/// Summary numbers for one image pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairReport {
    pub keypoints_a: usize,
    pub keypoints_b: usize,
    pub described_a: usize,
    pub described_b: usize,
    pub tentatives: usize,
    pub inliers: usize,
    /// `None` when there are no tentative matches.
    pub inlier_ratio: Option<f64>,
    pub tolerance: f64,
    pub coverage: f64,
    pub disk_radius: f64,
    pub matched: bool,
    /// Empty when there are no tentative matches.
    pub curve: Vec<CurvePoint>,
}

/// Everything computed while evaluating a pair.
#[derive(Clone, Debug)]
pub struct PairEvaluation {
    pub report: PairReport,
    pub keypoints_a: Vec<Keypoint>,
    pub keypoints_b: Vec<Keypoint>,
    pub described_a: Described,
    pub described_b: Described,
    pub verification: Verification,
    pub coverage: Coverage,
}

fn detect_and_describe(
    image: &GrayImage,
    params: &DetectorParams,
) -> Result<(Vec<Keypoint>, Described)> {
    let pyramid = build_pyramid(image, params.n_levels, params.scale_factor)?;
    let keypoints = detect_pyramid(&pyramid, params)?;
    let described = describe(&pyramid, &keypoints);
    Ok((keypoints, described))
}

/// Detects, describes and matches both images, then verifies against `h` (A to B).
pub fn evaluate_pair(
    a: &GrayImage,
    b: &GrayImage,
    h: &Homography,
    params: &EvalParams,
) -> Result<PairEvaluation> {
    params.detector.validate()?;
    let (keypoints_a, described_a) = detect_and_describe(a, &params.detector)?;
    let (keypoints_b, described_b) = detect_and_describe(b, &params.detector)?;
    let matches = match_descriptors(&described_a.descriptors, &described_b.descriptors);
    let verification = verify(
        &matches,
        h,
        &described_a.keypoints,
        &described_b.keypoints,
        params.tolerance,
    )?;
    let cover = coverage(
        &verification.inlier_points(&described_a.keypoints),
        a.width(),
        a.height(),
        params.disk_radius,
    )?;

    let inliers = verification.inlier_count();
    let (inlier_ratio, curve) = if matches.is_empty() {
        (None, Vec::new())
    } else {
        let errors = verification.errors();
        let ratios = inlier_ratio_curve(&errors, &params.thresholds)?;
        let curve = params
            .thresholds
            .iter()
            .zip(ratios)
            .map(|(&threshold, ratio)| CurvePoint { threshold, ratio })
            .collect();
        (Some(inliers as f64 / matches.len() as f64), curve)
    };

    let report = PairReport {
        keypoints_a: keypoints_a.len(),
        keypoints_b: keypoints_b.len(),
        described_a: described_a.len(),
        described_b: described_b.len(),
        tentatives: matches.len(),
        inliers,
        inlier_ratio,
        tolerance: params.tolerance,
        coverage: cover.ratio,
        disk_radius: params.disk_radius,
        matched: matched_pair(inliers),
        curve,
    };
    Ok(PairEvaluation {
        report,
        keypoints_a,
        keypoints_b,
        described_a,
        described_b,
        verification,
        coverage: cover,
    })
}

/// `pair,inliers,coverage,matched` rows.
pub fn summary_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a PairReport)>) -> String {
    let mut out = String::from("pair,inliers,coverage,matched\n");
    for (name, r) in rows {
        let _ = writeln!(out, "{name},{},{:.6},{}", r.inliers, r.coverage, r.matched);
    }
    out
}

/// `threshold,ratio` rows.
pub fn curve_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("threshold,ratio\n");
    for p in curve {
        let _ = writeln!(out, "{:.2},{:.6}", p.threshold, p.ratio);
    }
    out
}
