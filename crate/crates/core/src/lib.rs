//! Deformable template matching (DTM) and friends.
//!
//! The crate is organised bottom-up:
//!
//! - [`imageio`]: 8-bit grayscale rasters, binary PGM I/O, cropping and
//!   bilinear resampling under affine and projective maps.
//! - [`features`]: gradient fields, HOG cell grids, SIFT keypoints and
//!   descriptors.
//! - [`dtm`]: sub-patch decomposition, the ordering constraint between
//!   neighbouring sub-patches, the coordinate-descent solver and an
//!   exhaustive oracle.
//! - [`baselines`]: rigid SAD and HOG template matchers.
//! - [`matching`]: rigid and deformable SIFT descriptor similarity, mutual
//!   nearest-neighbour matching, DLT homographies and RANSAC.
//! - [`eval`]: ROC/AUC, the patch retrieval benchmark, the transformed-image
//!   inlier benchmark and a synthetic corpus generator.
//!
//! All scores are similarities: higher means more alike.

pub mod baselines;
pub mod dtm;
mod error;
pub mod eval;
pub mod features;
pub mod imageio;
pub mod matching;

pub use error::{Error, Result};
pub use imageio::{AffineMap, BBox, GrayImage};
