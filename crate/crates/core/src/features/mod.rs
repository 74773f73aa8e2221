//! Gradient-based image features.

mod gradient;
mod hog;
pub mod sift;

pub use gradient::{gradients, GradientField};
pub use hog::{block_normalize, cell_histograms, hog, FeatureGrid, HogParams, HOG_EPSILON};
pub use sift::{detect_sift, sift_descriptor, SiftDescriptor, SiftKeypoint, SiftParams, SiftPyramid};
