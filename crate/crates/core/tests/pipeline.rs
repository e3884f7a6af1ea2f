use std::path::PathBuf;

use saddle::eval::{evaluate_pair, EvalParams};
use saddle::synth::warp;
use saddle::{load_pgm, GrayImage, Homography};

fn photo(name: &str) -> GrayImage {
    let path: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "data",
        "images",
        &format!("{name}.pgm"),
    ]
    .iter()
    .collect();
    load_pgm(path).unwrap()
}

fn shifted_pair() -> (GrayImage, GrayImage, Homography) {
    let src = photo("harbour");
    // B(x + 10, y) = A(x, y)
    let a = src.crop(110, 100, 400, 300).unwrap();
    let b = src.crop(100, 100, 400, 300).unwrap();
    (a, b, Homography::translation(10.0, 0.0))
}

#[test]
fn translated_pair_single_level_is_exact() {
    let (a, b, h) = shifted_pair();
    let mut params = EvalParams::default();
    params.detector.n_levels = 1;
    let e = evaluate_pair(&a, &b, &h, &params).unwrap();
    assert!(e.report.matched, "{:?}", e.report);
    let worst = e
        .verification
        .matches
        .iter()
        .map(|m| m.error)
        .fold(0.0, f64::max);
    assert!(worst < 1.0, "worst error {worst}");
}

#[test]
fn translated_pair_level_zero_is_exact() {
    // a 10 px shift is not a whole pixel count on coarser levels, so only level 0 is exact
    let (a, b, h) = shifted_pair();
    let e = evaluate_pair(&a, &b, &h, &EvalParams::default()).unwrap();
    let level0: Vec<f64> = e
        .verification
        .matches
        .iter()
        .filter(|m| e.described_a.keypoints[m.m.a].level == 0)
        .map(|m| m.error)
        .collect();
    assert!(level0.len() > 100);
    assert!(level0.iter().all(|&err| err < 1.0));
    let inlier_ratio = e.report.inlier_ratio.unwrap();
    assert!(inlier_ratio > 0.9, "{inlier_ratio}");
}

#[test]
fn warped_pair_report_is_consistent() {
    let a = photo("flower").crop(200, 100, 400, 300).unwrap();
    let h = Homography::new([[0.98, 0.03, 6.0], [-0.02, 1.01, 4.0], [2e-5, -3e-5, 1.0]]).unwrap();
    let b = warp(&a, &h, 400, 300).unwrap();
    let r = evaluate_pair(&a, &b, &h, &EvalParams::default())
        .unwrap()
        .report;
    assert!(r.tentatives <= r.described_a.min(r.described_b));
    assert!(r.inliers <= r.tentatives);
    assert!(r.described_a <= r.keypoints_a);
    assert!(r.matched);
    assert!((0.0..=1.0).contains(&r.coverage));
    let ratios: Vec<f64> = r.curve.iter().map(|p| p.ratio).collect();
    assert!(ratios.windows(2).all(|w| w[0] <= w[1]));
    let at_tol = r.curve.iter().find(|p| p.threshold == 3.0).unwrap().ratio;
    assert_eq!(Some(at_tol), r.inlier_ratio);
}
