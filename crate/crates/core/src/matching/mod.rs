//! Descriptor similarity, correspondence search and homography fitting.

mod descriptor;
mod homography;
mod ransac;

pub use descriptor::{
    conventional_sift_similarity, deformable_direction_score, deformable_sift_similarity, feasible_descriptor_placements,
    match_descriptors, rigid_sift_score, Correspondence, MatchMode, SiftFeature,
};
pub use homography::{estimate_homography_dlt, Homography, PointPair};
pub use ransac::{ransac_homography, symmetric_transfer_error, RansacConfig, RansacResult};
