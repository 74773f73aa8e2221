use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("unsupported PGM maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("truncated PGM payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },

    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("pixel buffer of length {actual} does not match {width}x{height}")]
    PixelCountMismatch {
        width: usize,
        height: usize,
        actual: usize,
    },

    #[error("bounding box {bbox} is empty or outside a {width}x{height} image")]
    BBoxOutOfBounds {
        bbox: String,
        width: usize,
        height: usize,
    },

    #[error("image of {width}x{height} is smaller than the required {min_width}x{min_height}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min_width: usize,
        min_height: usize,
    },

    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feature grid of {cells_x}x{cells_y} cells cannot hold {n}x{m} sub-patches")]
    GridTooSmall {
        cells_x: usize,
        cells_y: usize,
        n: usize,
        m: usize,
    },

    #[error("window at ({x}, {y}) of {cols}x{rows} cells leaves the {cells_x}x{cells_y} target grid")]
    WindowOutOfBounds {
        x: usize,
        y: usize,
        cols: usize,
        rows: usize,
        cells_x: usize,
        cells_y: usize,
    },

    #[error("no feasible initial placement: {0}")]
    InfeasibleInitialPlacement(String),

    #[error("exhaustive search over {size} configurations exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },

    #[error("homography is singular")]
    SingularHomography,

    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("{found} correspondences available, at least {required} needed")]
    TooFewCorrespondences { found: usize, required: usize },

    #[error("no model reached {required} inliers")]
    NoConsensus { required: usize },

    #[error("score list is empty")]
    EmptyScores,

    #[error("insufficient patches: {0}")]
    InsufficientPatches(String),

    #[error("annotation line {line}: {message}")]
    Annotation { line: usize, message: String },
}
