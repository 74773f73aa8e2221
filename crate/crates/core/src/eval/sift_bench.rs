use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::patches::mean_std;
use crate::features::{SiftParams, SiftPyramid};
use crate::imageio::warp_affine;
use crate::matching::{
    match_descriptors, ransac_homography, Correspondence, Homography, MatchMode, PointPair, RansacConfig, SiftFeature,
};
use crate::{AffineMap, Error, GrayImage, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftBenchConfig {
    pub trials: usize,
    pub min_scale: f64,
    pub max_scale: f64,
    pub sift: SiftParams,
    pub ransac: RansacConfig,
    /// Keep only the strongest keypoints per image.
    pub max_keypoints: Option<usize>,
    /// Replace every drawn transform with the identity.
    pub identity: bool,
}

impl Default for SiftBenchConfig {
    fn default() -> Self {
        SiftBenchConfig {
            trials: 100,
            min_scale: 0.5,
            max_scale: 1.0,
            sift: SiftParams::default(),
            ransac: RansacConfig::default(),
            max_keypoints: Some(600),
            identity: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModeOutcome {
    pub matches: usize,
    pub inliers: usize,
    /// Matches within the RANSAC threshold of the true transform.
    pub correct: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftTrialResult {
    pub trial: usize,
    pub rotation: f64,
    pub scale_x: f64,
    pub scale_y: f64,
    pub conventional: ModeOutcome,
    pub deformable: ModeOutcome,
}

/// Keypoints with both descriptor variants, strongest first when capped.
#[derive(Debug, Clone)]
pub struct ImageFeatures {
    pub weighted: Vec<SiftFeature>,
    pub unweighted: Vec<SiftFeature>,
}

impl ImageFeatures {
    pub fn for_mode(&self, mode: MatchMode) -> &[SiftFeature] {
        match mode {
            MatchMode::Conventional => &self.weighted,
            MatchMode::Deformable => &self.unweighted,
        }
    }
}

/// Detects keypoints and describes each one with and without Gaussian
/// weighting. With a cap, keeps the largest `|response|`, earlier keypoints
/// first on ties.
pub fn extract_features(img: &GrayImage, params: SiftParams, max_keypoints: Option<usize>) -> Result<ImageFeatures> {
    let pyramid = SiftPyramid::build(img, params)?;
    let mut keypoints = pyramid.detect();
    if let Some(cap) = max_keypoints {
        keypoints.sort_by(|a, b| b.response.abs().total_cmp(&a.response.abs()));
        keypoints.truncate(cap);
    }
    let describe = |weighted: bool| {
        keypoints
            .par_iter()
            .map(|kp| SiftFeature {
                keypoint: *kp,
                descriptor: pyramid.describe(kp, weighted),
            })
            .collect::<Vec<_>>()
    };
    Ok(ImageFeatures {
        weighted: describe(true),
        unweighted: describe(false),
    })
}

/// Point pairs of `matches`, in match order.
pub fn correspondence_points(a: &[SiftFeature], b: &[SiftFeature], matches: &[Correspondence]) -> Vec<PointPair> {
    matches
        .iter()
        .map(|c| {
            let (ka, kb) = (&a[c.index_a].keypoint, &b[c.index_b].keypoint);
            ((ka.x, ka.y), (kb.x, kb.y))
        })
        .collect()
}

fn to_homography(map: &AffineMap) -> Result<Homography> {
    let [a, b, c, d, e, f] = map.coeffs;
    Homography::from_matrix([[a, b, c], [d, e, f], [0.0, 0.0, 1.0]])
}

fn evaluate_mode(
    original: &ImageFeatures,
    transformed: &ImageFeatures,
    mode: MatchMode,
    truth: &Homography,
    config: &SiftBenchConfig,
    ransac_seed: u64,
) -> ModeOutcome {
    let (fa, fb) = (original.for_mode(mode), transformed.for_mode(mode));
    let matches = match_descriptors(fa, fb, mode);
    let pairs = correspondence_points(fa, fb, &matches);
    let correct = pairs
        .iter()
        .filter(|((ax, ay), (bx, by))| {
            truth
                .apply(*ax, *ay)
                .is_some_and(|(x, y)| (x - bx).hypot(y - by) <= config.ransac.threshold)
        })
        .count();
    let inliers = ransac_homography(&pairs, &config.ransac, ransac_seed)
        .map(|r| r.inliers.len())
        .unwrap_or(0);
    ModeOutcome {
        matches: matches.len(),
        inliers,
        correct,
    }
}

/// Transformed-image inlier benchmark. Trial `t` draws a rotation in
/// `[0, 2pi)` and per-axis scales in `[min_scale, max_scale]` from stream
/// `t` of a generator seeded with `seed`, warps `image`, and matches it
/// against the original in both modes under the same RANSAC seed. Trials
/// with fewer than four matches or no consensus record zero inliers.
pub fn sift_benchmark(image: &GrayImage, config: &SiftBenchConfig, seed: u64) -> Result<Vec<SiftTrialResult>> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if !(config.min_scale > 0.0 && config.min_scale <= config.max_scale && config.max_scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale range [{}, {}] is invalid",
            config.min_scale, config.max_scale
        )));
    }
    let original = extract_features(image, config.sift, config.max_keypoints)?;
    let mut results = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let mut rotation = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut scale_x = rng.gen_range(config.min_scale..=config.max_scale);
        let mut scale_y = rng.gen_range(config.min_scale..=config.max_scale);
        let ransac_seed: u64 = rng.gen();
        if config.identity {
            (rotation, scale_x, scale_y) = (0.0, 1.0, 1.0);
        }
        let (forward, w, h) = AffineMap::rotation_scale(image.width(), image.height(), rotation, scale_x, scale_y);
        let inverse = forward
            .inverse()
            .ok_or_else(|| Error::InvalidParameter("transform is not invertible".into()))?;
        let warped = warp_affine(image, &inverse, w, h)?;
        let truth = to_homography(&forward)?;
        let (conventional, deformable) = match extract_features(&warped, config.sift, config.max_keypoints) {
            Ok(transformed) => (
                evaluate_mode(&original, &transformed, MatchMode::Conventional, &truth, config, ransac_seed),
                evaluate_mode(&original, &transformed, MatchMode::Deformable, &truth, config, ransac_seed),
            ),
            Err(Error::ImageTooSmall { .. }) => Default::default(),
            Err(e) => return Err(e),
        };
        results.push(SiftTrialResult {
            trial,
            rotation,
            scale_x,
            scale_y,
            conventional,
            deformable,
        });
    }
    Ok(results)
}

/// Per-trial rows followed by `mean` and `std` rows over the count columns.
pub fn sift_table(results: &[SiftTrialResult]) -> String {
    let mut out = String::from(
        "trial,rotation,scale_x,scale_y,matches_conventional,inliers_conventional,matches_deformable,inliers_deformable\n",
    );
    for r in results {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{},{},{},{}\n",
            r.trial,
            r.rotation,
            r.scale_x,
            r.scale_y,
            r.conventional.matches,
            r.conventional.inliers,
            r.deformable.matches,
            r.deformable.inliers
        ));
    }
    let column = |f: fn(&SiftTrialResult) -> usize| mean_std(&results.iter().map(|r| f(r) as f64).collect::<Vec<_>>());
    let cols = [
        column(|r| r.conventional.matches),
        column(|r| r.conventional.inliers),
        column(|r| r.deformable.matches),
        column(|r| r.deformable.inliers),
    ];
    for (label, pick) in [("mean", 0usize), ("std", 1)] {
        out.push_str(label);
        out.push_str(",,,");
        for c in &cols {
            let v = if pick == 0 { c.0 } else { c.1 };
            out.push_str(&format!(",{v:.3}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::synth::textured_image;

    fn quick(trials: usize) -> SiftBenchConfig {
        SiftBenchConfig {
            trials,
            max_keypoints: Some(150),
            ransac: RansacConfig {
                iterations: 300,
                ..RansacConfig::default()
            },
            ..SiftBenchConfig::default()
        }
    }

    #[test]
    fn identity_trial_self_matches() {
        let img = textured_image(3, 128, 128);
        let cfg = SiftBenchConfig { identity: true, ..quick(1) };
        let r = sift_benchmark(&img, &cfg, 5).unwrap();
        assert_eq!(r.len(), 1);
        for mode in [r[0].conventional, r[0].deformable] {
            assert!(mode.inliers > 0);
            assert_eq!(mode.correct, mode.matches);
            assert!(mode.inliers <= mode.matches);
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let img = textured_image(4, 96, 96);
        let a = sift_benchmark(&img, &quick(2), 11).unwrap();
        let b = sift_benchmark(&img, &quick(2), 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(sift_table(&a), sift_table(&b));
        assert!(a.iter().all(|r| (0.5..=1.0).contains(&r.scale_x) && (0.0..std::f64::consts::TAU).contains(&r.rotation)));
    }

    #[test]
    fn rejects_bad_configs() {
        let img = textured_image(4, 64, 64);
        assert!(sift_benchmark(&img, &quick(0), 0).is_err());
        let mut cfg = quick(1);
        cfg.min_scale = 0.0;
        assert!(sift_benchmark(&img, &cfg, 0).is_err());
        assert!(sift_benchmark(&GrayImage::filled(16, 16, 0).unwrap(), &quick(1), 0).is_err());
    }

    #[test]
    fn table_has_summary_rows() {
        let r = SiftTrialResult {
            trial: 0,
            rotation: 1.0,
            scale_x: 0.5,
            scale_y: 0.75,
            conventional: ModeOutcome { matches: 10, inliers: 4, correct: 5 },
            deformable: ModeOutcome { matches: 12, inliers: 6, correct: 7 },
        };
        let t = sift_table(&[r]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,1.000000,0.500000,0.750000,10,4,12,6");
        assert_eq!(lines[2], "mean,,,,10.000,4.000,12.000,6.000");
        assert_eq!(lines[3], "std,,,,0.000,0.000,0.000,0.000");
    }
}
