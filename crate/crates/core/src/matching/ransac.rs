use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::homography::{estimate_homography_dlt, has_collinear_triple, Homography, PointPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub iterations: usize,
    /// Bound on the symmetric transfer error, in pixels.
    pub threshold: f64,
    pub min_inliers: usize,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            iterations: 2000,
            threshold: 3.0,
            min_inliers: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    pub homography: Homography,
    /// Indices into the input pairs, ascending.
    pub inliers: Vec<usize>,
    /// Inlier count of the best minimal-sample model before refitting.
    pub sample_inliers: usize,
    pub iterations: usize,
    pub seed: u64,
}

/// `sqrt(|H a - b|^2 + |H^-1 b - a|^2)`; infinite when a point maps to
/// infinity.
pub fn symmetric_transfer_error(h: &Homography, h_inv: &Homography, pair: &PointPair) -> f64 {
    let ((ax, ay), (bx, by)) = *pair;
    match (h.apply(ax, ay), h_inv.apply(bx, by)) {
        (Some((fx, fy)), Some((gx, gy))) => ((fx - bx).powi(2) + (fy - by).powi(2) + (gx - ax).powi(2) + (gy - ay).powi(2)).sqrt(),
        _ => f64::INFINITY,
    }
}

fn inliers_of(h: &Homography, pairs: &[PointPair], threshold: f64) -> Vec<usize> {
    let Ok(h_inv) = h.inverse() else {
        return Vec::new();
    };
    (0..pairs.len())
        .filter(|&i| symmetric_transfer_error(h, &h_inv, &pairs[i]) <= threshold)
        .collect()
}

/// Seeded RANSAC over random 4-subsets with one DLT refit on the best
/// consensus set. The refit replaces the sample model only if it keeps at
/// least as many inliers.
pub fn ransac_homography(pairs: &[PointPair], config: &RansacConfig, seed: u64) -> Result<RansacResult> {
    let required = config.min_inliers.max(4);
    if pairs.len() < 4 {
        return Err(Error::TooFewCorrespondences {
            found: pairs.len(),
            required: 4,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Homography, Vec<usize>)> = None;
    for _ in 0..config.iterations {
        let idx = sample(&mut rng, pairs.len(), 4);
        let subset: Vec<PointPair> = idx.iter().map(|i| pairs[i]).collect();
        let src = [subset[0].0, subset[1].0, subset[2].0, subset[3].0];
        let dst = [subset[0].1, subset[1].1, subset[2].1, subset[3].1];
        if has_collinear_triple(&src) || has_collinear_triple(&dst) {
            continue;
        }
        let Ok(h) = estimate_homography_dlt(&subset) else {
            continue;
        };
        let inliers = inliers_of(&h, pairs, config.threshold);
        if best.as_ref().is_none_or(|(_, b)| inliers.len() > b.len()) {
            best = Some((h, inliers));
        }
    }
    let (sample_model, sample_inliers) = best.ok_or(Error::NoConsensus { required })?;
    if sample_inliers.len() < required {
        return Err(Error::NoConsensus { required });
    }
    let refit = sample_inliers
        .iter()
        .map(|&i| pairs[i])
        .collect::<Vec<_>>();
    let (homography, inliers) = match estimate_homography_dlt(&refit) {
        Ok(h) => {
            let refit_inliers = inliers_of(&h, pairs, config.threshold);
            if refit_inliers.len() >= sample_inliers.len() {
                (h, refit_inliers)
            } else {
                (sample_model, sample_inliers.clone())
            }
        }
        Err(_) => (sample_model, sample_inliers.clone()),
    };
    Ok(RansacResult {
        homography,
        inliers,
        sample_inliers: sample_inliers.len(),
        iterations: config.iterations,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn truth() -> Homography {
        Homography::from_matrix([[0.9, -0.3, 40.0], [0.25, 0.8, -12.0], [2e-4, 1e-4, 1.0]]).unwrap()
    }

    fn exact_pairs(rng: &mut ChaCha8Rng, n: usize) -> Vec<PointPair> {
        let h = truth();
        (0..n)
            .map(|_| {
                let p = (rng.gen_range(0.0..300.0), rng.gen_range(0.0..300.0));
                (p, h.apply(p.0, p.1).unwrap())
            })
            .collect()
    }

    #[test]
    fn exact_consensus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pairs = exact_pairs(&mut rng, 40);
        let r = ransac_homography(&pairs, &RansacConfig::default(), 9).unwrap();
        assert_eq!(r.inliers.len(), 40);
        let inv = r.homography.inverse().unwrap();
        assert!(pairs.iter().all(|p| symmetric_transfer_error(&r.homography, &inv, p) <= 3.0));
        assert!(r.homography.max_abs_diff(&truth()) < 1e-6);
    }

    #[test]
    fn planted_outliers_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut pairs = exact_pairs(&mut rng, 30);
        for _ in 0..30 {
            pairs.push((
                (rng.gen_range(0.0..300.0), rng.gen_range(0.0..300.0)),
                (rng.gen_range(0.0..300.0), rng.gen_range(0.0..300.0)),
            ));
        }
        let r = ransac_homography(&pairs, &RansacConfig::default(), 3).unwrap();
        assert!(r.inliers.iter().all(|&i| i < 30 || {
            // a random pair may land on the model by chance; it must then really fit
            let inv = truth().inverse().unwrap();
            symmetric_transfer_error(&truth(), &inv, &pairs[i]) <= 6.0
        }));
        assert!(r.inliers.iter().filter(|&&i| i < 30).count() >= 27);
        assert!(r.inliers.len() >= r.sample_inliers);
    }

    #[test]
    fn seeded_runs_repeat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pairs = exact_pairs(&mut rng, 20);
        pairs.push(((1.0, 1.0), (250.0, 7.0)));
        let a = ransac_homography(&pairs, &RansacConfig::default(), 77).unwrap();
        let b = ransac_homography(&pairs, &RansacConfig::default(), 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failure_modes() {
        let pairs: Vec<PointPair> = vec![((0.0, 0.0), (1.0, 1.0)); 3];
        assert!(matches!(
            ransac_homography(&pairs, &RansacConfig::default(), 0),
            Err(Error::TooFewCorrespondences { .. })
        ));
        let line: Vec<PointPair> = (0..10).map(|k| ((k as f64, k as f64), (k as f64, 0.0))).collect();
        assert!(matches!(ransac_homography(&line, &RansacConfig::default(), 0), Err(Error::NoConsensus { .. })));
    }
}
