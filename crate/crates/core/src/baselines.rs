//! Rigid template matchers used as baselines.
//!
//! Every score is bidirectional and oriented so that higher means more
//! similar: SAD-based scores are negated distances, HOG-based scores are
//! sums of products.
//!
//! - `SAD1`: resize one image to the other's size, SAD, both ways.
//! - `SAD2`: slide one image over the other, best (smallest) SAD, both ways.
//! - `HOG1`: both images at the canonical size, full-grid dot product.
//! - `HOG2`: native-size HOG grids, best sliding dot product at cell steps.
//!
//! When a scanned image does not fit inside the other it is first shrunk
//! by the smallest uniform factor that makes it fit.

use std::fmt;
use std::str::FromStr;

use crate::dtm::{canonical_features, DtmConfig};
use crate::features::{hog, FeatureGrid, HogParams};
use crate::imageio::resize_bilinear;
use crate::{Error, GrayImage, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    Sad1,
    Sad2,
    Hog1,
    Hog2,
}

impl Baseline {
    pub const ALL: [Baseline; 4] = [Baseline::Sad1, Baseline::Sad2, Baseline::Hog1, Baseline::Hog2];

    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Sad1 => "sad1",
            Baseline::Sad2 => "sad2",
            Baseline::Hog1 => "hog1",
            Baseline::Hog2 => "hog2",
        }
    }

    pub fn score(&self, a: &GrayImage, b: &GrayImage, config: &DtmConfig) -> Result<BaselineScore> {
        match self {
            Baseline::Sad1 => sad1(a, b),
            Baseline::Sad2 => sad2(a, b),
            Baseline::Hog1 => hog1(a, b, config),
            Baseline::Hog2 => hog2(a, b, config.hog_params()),
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown baseline {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineScore {
    pub method: Baseline,
    pub score: f64,
}

/// Sum of absolute pixel differences of two equally sized images.
pub fn sad(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::DimensionMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    let total: u64 = a.pixels().iter().zip(b.pixels()).map(|(&p, &q)| p.abs_diff(q) as u64).sum();
    Ok(total as f64)
}

pub fn sad1(a: &GrayImage, b: &GrayImage) -> Result<BaselineScore> {
    let forward = sad(a, &resize_bilinear(b, a.width(), a.height())?)?;
    let backward = sad(&resize_bilinear(a, b.width(), b.height())?, b)?;
    Ok(BaselineScore {
        method: Baseline::Sad1,
        score: -(forward + backward),
    })
}

/// Shrinks `img` uniformly until it fits inside `width x height`; returns it
/// unchanged if it already fits.
pub fn fit_inside(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if img.width() <= width && img.height() <= height {
        return Ok(img.clone());
    }
    let factor = (width as f64 / img.width() as f64).min(height as f64 / img.height() as f64);
    let w = ((img.width() as f64 * factor + 1e-9).floor() as usize).clamp(1, width);
    let h = ((img.height() as f64 * factor + 1e-9).floor() as usize).clamp(1, height);
    resize_bilinear(img, w, h)
}

/// Smallest SAD of `scan` over every placement inside `base`; `scan` must fit.
fn min_sliding_sad(scan: &GrayImage, base: &GrayImage) -> u64 {
    let (sw, sh) = (scan.width(), scan.height());
    let mut best = u64::MAX;
    for oy in 0..=base.height() - sh {
        for ox in 0..=base.width() - sw {
            let mut total = 0u64;
            for y in 0..sh {
                let srow = &scan.pixels()[y * sw..(y + 1) * sw];
                let start = (oy + y) * base.width() + ox;
                let brow = &base.pixels()[start..start + sw];
                total += srow.iter().zip(brow).map(|(&p, &q)| p.abs_diff(q) as u64).sum::<u64>();
                if total >= best {
                    break;
                }
            }
            best = best.min(total);
        }
    }
    best
}

pub fn sad2(a: &GrayImage, b: &GrayImage) -> Result<BaselineScore> {
    let forward = min_sliding_sad(&fit_inside(a, b.width(), b.height())?, b);
    let backward = min_sliding_sad(&fit_inside(b, a.width(), a.height())?, a);
    Ok(BaselineScore {
        method: Baseline::Sad2,
        score: -((forward + backward) as f64),
    })
}

pub fn hog1(a: &GrayImage, b: &GrayImage, config: &DtmConfig) -> Result<BaselineScore> {
    let ga = canonical_features(a, config)?;
    let gb = canonical_features(b, config)?;
    Ok(BaselineScore {
        method: Baseline::Hog1,
        score: hog1_grids(&ga, &gb)?,
    })
}

/// `HOG1` on grids that already share a resolution.
pub fn hog1_grids(a: &FeatureGrid, b: &FeatureGrid) -> Result<f64> {
    Ok(a.dot(b)? + b.dot(a)?)
}

/// Largest window dot product of `scan` inside `base`; `scan` must fit.
pub fn max_sliding_dot(scan: &FeatureGrid, base: &FeatureGrid) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    if scan.cells_x() > base.cells_x() || scan.cells_y() > base.cells_y() {
        return Err(Error::WindowOutOfBounds {
            x: 0,
            y: 0,
            cols: scan.cells_x(),
            rows: scan.cells_y(),
            cells_x: base.cells_x(),
            cells_y: base.cells_y(),
        });
    }
    for y in 0..=base.cells_y() - scan.cells_y() {
        for x in 0..=base.cells_x() - scan.cells_x() {
            best = best.max(scan.window_dot(base, x, y)?);
        }
    }
    Ok(best)
}

fn hog2_direction(scan: &GrayImage, base: &GrayImage, params: HogParams) -> Result<f64> {
    let base_grid = hog(base, params)?;
    let scan_grid = hog(&fit_inside(scan, base.width(), base.height())?, params)?;
    max_sliding_dot(&scan_grid, &base_grid)
}

pub fn hog2(a: &GrayImage, b: &GrayImage, params: HogParams) -> Result<BaselineScore> {
    let forward = hog2_direction(a, b, params)?;
    let backward = hog2_direction(b, a, params)?;
    Ok(BaselineScore {
        method: Baseline::Hog2,
        score: forward + backward,
    })
}
