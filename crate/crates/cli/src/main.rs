//! `saddle`: detect saddle keypoints, generate test patterns, evaluate image
//! pairs against a ground-truth homography and time the pipeline.
//!
//! Exit codes: 0 success, 2 I/O or malformed input files, 3 invalid parameters.

mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "saddle", version, about = "Saddle keypoint detector")]
pub struct Cli {
    /// Worker threads (default: all cores). Output does not depend on this.
    #[arg(long, global = true, env = "SADDLE_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Detect keypoints in one image.
    Detect(DetectArgs),
    /// Write synthetic test patterns with their ground truth.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Detect, describe, match and verify an image pair.
    Eval(EvalArgs),
    /// Time each pipeline stage.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct DetectorArgs {
    /// Half-width of the "similar" intensity band around the central value.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f32,
    /// Number of pyramid levels.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Downsampling factor between levels.
    #[arg(long, default_value_t = 1.3)]
    pub scale_factor: f64,
    /// Keep only the strongest N keypoints.
    #[arg(long)]
    pub max_features: Option<usize>,
}

impl DetectorArgs {
    pub fn params(&self) -> saddle::Result<saddle::DetectorParams> {
        let p = saddle::DetectorParams {
            epsilon: self.epsilon,
            n_levels: self.levels,
            scale_factor: self.scale_factor,
            max_features: self.max_features,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Keypoint file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write a PGM copy of the input with keypoints drawn as white crosses.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SynthCommand {
    /// Chessboard blurred at each sigma, plus `corners.csv`.
    Chessboard(ChessboardArgs),
    /// Perspective view of sin(2 pi u / L) sin(2 pi v / L), plus `saddles.csv`.
    Sinusoid(SinusoidArgs),
}

#[derive(Args, Debug)]
pub struct ChessboardArgs {
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long, default_value_t = 16)]
    pub square: usize,
    /// Comma-separated Gaussian blur sigmas, one image each.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "0,1,2,4"
    )]
    pub sigmas: Vec<f64>,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct SinusoidArgs {
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long, default_value_t = 32.0, allow_negative_numbers = true)]
    pub wavelength: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub contrast: f64,
    /// Apply the built-in mild perspective tilt.
    #[arg(long, conflicts_with = "homography")]
    pub perspective: bool,
    /// Plane-to-image homography file (9 reals, row-major).
    #[arg(long)]
    pub homography: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Reference image A.
    pub image_a: PathBuf,
    pub image_b: PathBuf,
    /// Homography mapping A onto B.
    pub homography: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Inlier tolerance in pixels of the reference image.
    #[arg(long, default_value_t = saddle::eval::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Coverage disk radius in pixels.
    #[arg(long, default_value_t = saddle::eval::DEFAULT_DISK_RADIUS)]
    pub disk_radius: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Report file (default: stdout). In CSV mode the curve goes next to it as `<stem>-curve.csv`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Write the coverage mask as a PGM.
    #[arg(long)]
    pub coverage_mask: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    pub images: Vec<PathBuf>,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Timed repetitions per image, after one warm-up run.
    #[arg(long, default_value_t = 10)]
    pub repeat: usize,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] saddle::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_parameter_error() => 3,
            CliError::Usage(_) => 3,
            CliError::Core(_) | CliError::Io { .. } => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.into())
            .build_global()
        {
            eprintln!("saddle: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Detect(a) => commands::detect(&a),
        Command::Synth(SynthCommand::Chessboard(a)) => commands::chessboard(&a),
        Command::Synth(SynthCommand::Sinusoid(a)) => commands::sinusoid(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("saddle: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
