//! Saddle keypoint detection.
//!
//! Saddle points are pixels whose neighbourhood, seen as an intensity surface,
//! rises along one direction and falls along the orthogonal one. They are found
//! with intensity comparisons only: a quick test on an 8-pixel inner ring and an
//! arc-pattern test on the 16-pixel circle of radius 3, repeated on every level
//! of a coarse scale pyramid.
//!
//! - [`imageio`]: grayscale images, PGM files and the pyramid.
//! - [`detector`]: the ring tests, non-maximum suppression, refinement, [`detect`].
//! - [`synth`]: chessboard and perspective sinusoid patterns with known saddles.
//! - [`eval`]: ground-truth homographies, a binary descriptor and matcher, and
//!   the coverage / inlier-ratio / matched-pair measures.

pub mod detector;
pub mod error;
pub mod eval;
pub mod imageio;
pub mod synth;

pub use detector::{detect, detect_pyramid, DetectorParams, Keypoint};
pub use error::{Error, Result};
pub use eval::Homography;
pub use imageio::{build_pyramid, load_image, load_pgm, save_pgm, GrayImage, Pyramid};
