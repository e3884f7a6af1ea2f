//! Ground-truth verification and the evaluation measures: coverage, inlier-ratio
//! curves and matched-pair counting, plus a binary descriptor and mutual
//! nearest-neighbour matcher for forming tentative correspondences.
//!
//! All geometry is checked against a known homography mapping the reference
//! image A onto B; reprojection errors are measured in A.

pub mod descriptor;
mod homography;
mod matching;
mod metrics;
mod pair;

pub use descriptor::{describe, Described, Descriptor};
pub use homography::*;
pub use matching::{match_descriptors, Match};
pub use metrics::*;
pub use pair::*;
