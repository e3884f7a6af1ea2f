use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use saddle::detector::{detect_pyramid, keypoints_to_csv, keypoints_to_json, Keypoint};
use saddle::eval::{self, describe, evaluate_pair, load_homography, match_descriptors, EvalParams};
use saddle::synth::{self, GroundTruthSaddle, SinusoidSpec};
use saddle::{build_pyramid, load_image, save_pgm, GrayImage, Homography};

use crate::{BenchArgs, ChessboardArgs, CliError, DetectArgs, EvalArgs, Format, SinusoidArgs};

type Result<T> = std::result::Result<T, CliError>;

/// Writes to `path`, or to stdout when `None`.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Draws a 3x3 plus of 255 at each keypoint's rounded position.
pub fn overlay(image: &GrayImage, keypoints: &[Keypoint]) -> GrayImage {
    let mut out = image.clone();
    let (w, h) = (image.width() as i64, image.height() as i64);
    for k in keypoints {
        let (x, y) = (k.x.round() as i64, k.y.round() as i64);
        for (dx, dy) in [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)] {
            let (px, py) = (x + dx, y + dy);
            if (0..w).contains(&px) && (0..h).contains(&py) {
                out.set(px as usize, py as usize, 255);
            }
        }
    }
    out
}

pub fn detect(args: &DetectArgs) -> Result<()> {
    let params = args.detector.params()?;
    let image = load_image(&args.input)?;
    let keypoints = saddle::detect(&image, &params)?;
    let text = match args.format {
        Format::Csv => keypoints_to_csv(&keypoints),
        Format::Json => keypoints_to_json(&keypoints) + "\n",
    };
    emit(args.output.as_deref(), &text)?;
    if let Some(path) = &args.overlay {
        save_pgm(&overlay(&image, &keypoints), path)?;
    }
    Ok(())
}

fn sigma_label(sigma: f64) -> String {
    format!("{sigma}").replace('.', "p")
}

pub fn chessboard(args: &ChessboardArgs) -> Result<()> {
    if args.sigmas.is_empty() {
        return Err(CliError::Usage("--sigmas needs at least one value".into()));
    }
    if let Some(s) = args.sigmas.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(CliError::Usage(format!(
            "invalid sigma {s}: must be finite and >= 0"
        )));
    }
    let board = synth::chessboard(args.width, args.height, args.square)?;
    create_dir(&args.output)?;
    for &sigma in &args.sigmas {
        let img = synth::gaussian_blur(&board, sigma)?;
        let path = args
            .output
            .join(format!("chessboard-sigma{}.pgm", sigma_label(sigma)));
        save_pgm(&img, path)?;
    }
    // the board is drawn directly in image coordinates, so plane and image positions coincide
    let corners: Vec<GroundTruthSaddle> =
        synth::chessboard_corners(args.width, args.height, args.square, 0.0)
            .into_iter()
            .map(|(x, y)| GroundTruthSaddle { u: x, v: y, x, y })
            .collect();
    emit(
        Some(&args.output.join("corners.csv")),
        &synth::ground_truth_to_csv(&corners),
    )
}

pub fn sinusoid(args: &SinusoidArgs) -> Result<()> {
    let homography = match (&args.homography, args.perspective) {
        (Some(path), _) => load_homography(path)?,
        (None, true) => SinusoidSpec::mild_perspective(args.width, args.height),
        (None, false) => Homography::identity(),
    };
    let spec = SinusoidSpec {
        width: args.width,
        height: args.height,
        wavelength: args.wavelength,
        homography,
        contrast: args.contrast,
    };
    let (image, saddles) = spec.render()?;
    create_dir(&args.output)?;
    save_pgm(&image, args.output.join("sinusoid.pgm"))?;
    emit(
        Some(&args.output.join("saddles.csv")),
        &synth::ground_truth_to_csv(&saddles),
    )?;
    emit(
        Some(&args.output.join("homography.txt")),
        &homography.to_text(),
    )
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn curve_path(report: &Path) -> PathBuf {
    let mut name = stem(report);
    name.push_str("-curve.csv");
    report.with_file_name(name)
}

#[derive(Serialize)]
struct NamedReport<'a> {
    pair: &'a str,
    #[serde(flatten)]
    report: &'a eval::PairReport,
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let params = EvalParams {
        detector: args.detector.params()?,
        tolerance: args.tolerance,
        disk_radius: args.disk_radius,
        thresholds: eval::default_thresholds(),
    };
    if !params.tolerance.is_finite() || params.tolerance < 0.0 {
        return Err(CliError::Usage(format!(
            "invalid --tolerance {}",
            params.tolerance
        )));
    }
    if !params.disk_radius.is_finite() || params.disk_radius <= 0.0 {
        return Err(CliError::Usage(format!(
            "invalid --disk-radius {}",
            params.disk_radius
        )));
    }
    let h = load_homography(&args.homography)?;
    let a = load_image(&args.image_a)?;
    let b = load_image(&args.image_b)?;
    let result = evaluate_pair(&a, &b, &h, &params)?;
    let name = format!("{}-{}", stem(&args.image_a), stem(&args.image_b));
    let report = &result.report;

    match args.format {
        Format::Json => emit(
            args.output.as_deref(),
            &json(&NamedReport {
                pair: &name,
                report,
            }),
        )?,
        Format::Csv => {
            let summary = eval::summary_csv([(name.as_str(), report)]);
            let curve = eval::curve_csv(&report.curve);
            match &args.output {
                Some(path) => {
                    emit(Some(path), &summary)?;
                    emit(Some(&curve_path(path)), &curve)?;
                }
                None => emit(None, &format!("{summary}\n{curve}"))?,
            }
        }
    }
    if let Some(path) = &args.coverage_mask {
        save_pgm(&result.coverage.mask, path)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct StageTiming {
    stage: &'static str,
    mean_ms: f64,
    std_ms: f64,
}

const STAGES: [&str; 5] = ["load", "pyramid", "detect", "describe", "match"];

/// Minimum timed repetitions per image.
pub const MIN_REPEAT: usize = 10;

pub fn bench(args: &BenchArgs) -> Result<()> {
    if args.images.is_empty() {
        return Err(CliError::Usage("bench needs at least one image".into()));
    }
    if args.repeat < MIN_REPEAT {
        return Err(CliError::Usage(format!(
            "--repeat must be at least {MIN_REPEAT}"
        )));
    }
    let params = args.detector.params()?;
    let mut samples: [Vec<f64>; 5] = Default::default();
    for path in &args.images {
        for run in 0..=args.repeat {
            let mut times = [0.0; 5];
            let mut t = Instant::now();
            let mut lap = |i: usize| {
                times[i] = t.elapsed().as_secs_f64() * 1e3;
                t = Instant::now();
            };
            let image = load_image(path)?;
            lap(0);
            let pyramid = build_pyramid(&image, params.n_levels, params.scale_factor)?;
            lap(1);
            let keypoints = detect_pyramid(&pyramid, &params)?;
            lap(2);
            let described = describe(&pyramid, &keypoints);
            lap(3);
            // self-matching exercises the full all-pairs Hamming search
            let matches = match_descriptors(&described.descriptors, &described.descriptors);
            lap(4);
            std::hint::black_box(matches);
            if run > 0 {
                for (s, v) in samples.iter_mut().zip(times) {
                    s.push(v);
                }
            }
        }
    }
    let rows: Vec<StageTiming> = STAGES
        .iter()
        .zip(&samples)
        .map(|(&stage, s)| {
            let n = s.len() as f64;
            let mean = s.iter().sum::<f64>() / n;
            let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            StageTiming {
                stage,
                mean_ms: mean,
                std_ms: var.sqrt(),
            }
        })
        .collect();
    let text = match args.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut s = String::from("stage,mean_ms,std_ms\n");
            for r in &rows {
                let _ = writeln!(s, "{},{:.3},{:.3}", r.stage, r.mean_ms, r.std_ms);
            }
            s
        }
    };
    emit(args.output.as_deref(), &text)
}
