//! ROC/AUC, the patch retrieval benchmark, the transformed-image inlier
//! benchmark, annotation ingestion and synthetic data.

mod annotations;
mod auc;
mod patches;
mod sift_bench;
pub mod synth;

pub use annotations::{load_annotations, load_corpus, parse_annotations, AnnotationRecord};
pub use auc::roc_auc;
pub use patches::{mean_std, voc_benchmark, BenchmarkConfig, BenchmarkRun, Method, Patch, PatchScorer};
pub use sift_bench::{
    correspondence_points, extract_features, sift_benchmark, sift_table, ImageFeatures, ModeOutcome, SiftBenchConfig,
    SiftTrialResult,
};
