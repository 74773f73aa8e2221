use std::f64::consts::PI;

use crate::{Error, GrayImage, Result};

/// Per-pixel image derivatives.
///
/// `orientation` is the unsigned gradient direction folded into `[0, pi)`.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub orientation: Vec<f64>,
}

/// Folds an angle in `(-pi, pi]` into `[0, pi)`.
pub(crate) fn fold_unsigned(theta: f64) -> f64 {
    let mut t = theta;
    if t < 0.0 {
        t += PI;
    }
    // also catches tiny negative inputs where t + pi rounds to pi
    if t >= PI {
        t -= PI;
    }
    t
}

/// Central differences in the interior, one-sided differences on the border.
pub fn gradients(img: &GrayImage) -> Result<GradientField> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min_width: 3,
            min_height: 3,
        });
    }
    let p = |x: usize, y: usize| img.get(x, y) as f64;
    let n = w * h;
    let mut dx = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    for y in 0..h {
        for x in 0..w {
            let gx = if x == 0 {
                p(1, y) - p(0, y)
            } else if x == w - 1 {
                p(w - 1, y) - p(w - 2, y)
            } else {
                0.5 * (p(x + 1, y) - p(x - 1, y))
            };
            let gy = if y == 0 {
                p(x, 1) - p(x, 0)
            } else if y == h - 1 {
                p(x, h - 1) - p(x, h - 2)
            } else {
                0.5 * (p(x, y + 1) - p(x, y - 1))
            };
            dx.push(gx);
            dy.push(gy);
        }
    }
    let magnitude = dx.iter().zip(&dy).map(|(gx, gy)| gx.hypot(*gy)).collect();
    let orientation = dx.iter().zip(&dy).map(|(gx, gy)| fold_unsigned(gy.atan2(*gx))).collect();
    Ok(GradientField {
        width: w,
        height: h,
        dx,
        dy,
        magnitude,
        orientation,
    })
}
