use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::{Error, Result};

/// Source point and its image.
pub type PointPair = ((f64, f64), (f64, f64));

const SINGULAR_DET: f64 = 1e-12;
/// Relative size of the second-smallest singular value below which the DLT
/// system is treated as rank deficient.
const RANK_TOLERANCE: f64 = 1e-9;

/// 3x3 projective transform, row-major, scaled so `h33 = 1` whenever
/// `h33` is non-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl Homography {
    pub fn identity() -> Self {
        Homography {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Normalizes and rejects singular or non-finite matrices.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        let h = Self::from_matrix_unchecked(m);
        if h.m.iter().flatten().any(|v| !v.is_finite()) || h.determinant().abs() <= SINGULAR_DET {
            return Err(Error::SingularHomography);
        }
        Ok(h)
    }

    /// Normalizes without the invertibility check.
    pub fn from_matrix_unchecked(m: [[f64; 3]; 3]) -> Self {
        let mut m = m;
        let s = m[2][2];
        if s != 0.0 && s.is_finite() {
            for v in m.iter_mut().flatten() {
                *v /= s;
            }
        }
        Homography { m }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    fn as_na(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.m[r][c])
    }

    pub fn determinant(&self) -> f64 {
        self.as_na().determinant()
    }

    pub fn inverse(&self) -> Result<Homography> {
        if self.determinant().abs() <= SINGULAR_DET {
            return Err(Error::SingularHomography);
        }
        let inv = self.as_na().try_inverse().ok_or(Error::SingularHomography)?;
        Homography::from_matrix([
            [inv[(0, 0)], inv[(0, 1)], inv[(0, 2)]],
            [inv[(1, 0)], inv[(1, 1)], inv[(1, 2)]],
            [inv[(2, 0)], inv[(2, 1)], inv[(2, 2)]],
        ])
    }

    /// Maps a point; `None` when it goes to infinity.
    pub fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let m = &self.m;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        if w.abs() < 1e-15 {
            return None;
        }
        Some(((m[0][0] * x + m[0][1] * y + m[0][2]) / w, (m[1][0] * x + m[1][1] * y + m[1][2]) / w))
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Homography) -> Result<Homography> {
        let p = self.as_na() * first.as_na();
        Homography::from_matrix([
            [p[(0, 0)], p[(0, 1)], p[(0, 2)]],
            [p[(1, 0)], p[(1, 1)], p[(1, 2)]],
            [p[(2, 0)], p[(2, 1)], p[(2, 2)]],
        ])
    }

    /// Largest elementwise difference of the normalized matrices.
    pub fn max_abs_diff(&self, other: &Homography) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Similarity transform taking the centroid to the origin and the mean
/// distance to sqrt(2).
fn normalizer(points: impl Iterator<Item = (f64, f64)> + Clone) -> Result<Matrix3<f64>> {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (cx, cy) = (sx / n, sy / n);
    let mean_dist = points.map(|(x, y)| (x - cx).hypot(y - cy)).sum::<f64>() / n;
    if !(mean_dist > 1e-12) || !mean_dist.is_finite() {
        return Err(Error::DegenerateConfiguration("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn transform(t: &Matrix3<f64>, p: (f64, f64)) -> (f64, f64) {
    let v = t * Vector3::new(p.0, p.1, 1.0);
    (v[0] / v[2], v[1] / v[2])
}

fn collinear(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let scale = (b.0 - a.0).hypot(b.1 - a.1) * (c.0 - a.0).hypot(c.1 - a.1);
    cross.abs() <= 1e-9 * scale.max(1e-300)
}

/// Whether any three of four points are collinear.
pub(crate) fn has_collinear_triple(p: &[(f64, f64); 4]) -> bool {
    [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        .iter()
        .any(|&(a, b, c)| collinear(p[a], p[b], p[c]))
}

/// Normalized direct linear transform from at least four pairs, solved as
/// the right singular vector of the smallest singular value.
pub fn estimate_homography_dlt(pairs: &[PointPair]) -> Result<Homography> {
    if pairs.len() < 4 {
        return Err(Error::TooFewCorrespondences {
            found: pairs.len(),
            required: 4,
        });
    }
    if pairs.len() == 4 {
        let src = [pairs[0].0, pairs[1].0, pairs[2].0, pairs[3].0];
        let dst = [pairs[0].1, pairs[1].1, pairs[2].1, pairs[3].1];
        if has_collinear_triple(&src) || has_collinear_triple(&dst) {
            return Err(Error::DegenerateConfiguration("three of the four points are collinear".into()));
        }
    }
    let t_src = normalizer(pairs.iter().map(|p| p.0))?;
    let t_dst = normalizer(pairs.iter().map(|p| p.1))?;

    // at least nine rows so the SVD exposes the full right nullspace
    let rows = (2 * pairs.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (k, &(s, d)) in pairs.iter().enumerate() {
        let (x, y) = transform(&t_src, s);
        let (u, v) = transform(&t_dst, d);
        let r0 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r1 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for c in 0..9 {
            a[(2 * k, c)] = r0[c];
            a[(2 * k + 1, c)] = r1[c];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::DegenerateConfiguration("SVD failed".into()))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let smallest = order[0];
    let largest = sv[order[sv.len() - 1]];
    if !(largest > 0.0) || sv[order[1]] <= RANK_TOLERANCE * largest {
        return Err(Error::DegenerateConfiguration("point configuration does not determine a homography".into()));
    }
    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t_dst_inv = t_dst.try_inverse().ok_or(Error::SingularHomography)?;
    let full = t_dst_inv * hn * t_src;
    if full[(2, 2)].abs() < 1e-15 {
        return Err(Error::DegenerateConfiguration("recovered homography has h33 = 0".into()));
    }
    Homography::from_matrix([
        [full[(0, 0)], full[(0, 1)], full[(0, 2)]],
        [full[(1, 0)], full[(1, 1)], full[(1, 2)]],
        [full[(2, 0)], full[(2, 1)], full[(2, 2)]],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_points() -> Vec<(f64, f64)> {
        vec![(3.0, 4.0), (200.0, 10.0), (15.0, 180.0), (190.0, 170.0), (90.0, 60.0), (40.0, 120.0)]
    }

    #[test]
    fn identity_from_fixed_points() {
        let pairs: Vec<PointPair> = grid_points()[..4].iter().map(|&p| (p, p)).collect();
        let h = estimate_homography_dlt(&pairs).unwrap();
        assert!(h.max_abs_diff(&Homography::identity()) < 1e-9);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pairs: Vec<PointPair> = (0..4).map(|k| ((k as f64, 2.0 * k as f64), (k as f64, 1.0))).collect();
        assert!(matches!(estimate_homography_dlt(&pairs), Err(Error::DegenerateConfiguration(_))));
        let many: Vec<PointPair> = (0..8).map(|k| ((k as f64, 2.0 * k as f64 + 1.0), (3.0 * k as f64, 1.0 + k as f64))).collect();
        assert!(matches!(estimate_homography_dlt(&many), Err(Error::DegenerateConfiguration(_))));
    }

    #[test]
    fn recovers_projective_generator() {
        let truth = Homography::from_matrix([[1.1, 0.2, 5.0], [-0.1, 0.9, -3.0], [1e-4, -2e-4, 1.0]]).unwrap();
        let pairs: Vec<PointPair> = grid_points().iter().map(|&p| (p, truth.apply(p.0, p.1).unwrap())).collect();
        let h = estimate_homography_dlt(&pairs).unwrap();
        assert!(h.max_abs_diff(&truth) < 1e-8);
    }

    #[test]
    fn inverse_and_compose() {
        let h = Homography::from_matrix([[0.0, 0.5, 0.0], [-1.0, 0.0, 511.0], [0.0, 0.0, 1.0]]).unwrap();
        let round = h.compose(&h.inverse().unwrap()).unwrap();
        assert!(round.max_abs_diff(&Homography::identity()) < 1e-12);
        assert!(Homography::from_matrix([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn too_few_pairs() {
        let pairs: Vec<PointPair> = grid_points()[..3].iter().map(|&p| (p, p)).collect();
        assert!(matches!(estimate_homography_dlt(&pairs), Err(Error::TooFewCorrespondences { .. })));
    }
}
