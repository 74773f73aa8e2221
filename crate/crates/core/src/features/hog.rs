use std::f64::consts::PI;

use super::gradient::{gradients, GradientField};
use crate::{Error, GrayImage, Result};

/// Regularizer in the block-normalization denominator `sqrt(|v|^2 + eps^2)`.
pub const HOG_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HogParams {
    pub cell_size: usize,
    pub bins: usize,
}

impl Default for HogParams {
    fn default() -> Self {
        HogParams { cell_size: 8, bins: 9 }
    }
}

/// Dense grid of per-cell orientation histograms, stored row-major by cell
/// with the bins of one cell contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    cells_x: usize,
    cells_y: usize,
    bins: usize,
    cell_size: usize,
    values: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(cells_x: usize, cells_y: usize, bins: usize, cell_size: usize, values: Vec<f64>) -> Result<Self> {
        if cells_x == 0 || cells_y == 0 || bins == 0 {
            return Err(Error::InvalidParameter(format!(
                "feature grid needs at least one cell and bin, got {cells_x}x{cells_y}x{bins}"
            )));
        }
        if values.len() != cells_x * cells_y * bins {
            return Err(Error::InvalidParameter(format!(
                "feature grid of {cells_x}x{cells_y}x{bins} given {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("feature values must be finite and non-negative".into()));
        }
        Ok(FeatureGrid {
            cells_x,
            cells_y,
            bins,
            cell_size,
            values,
        })
    }

    pub fn zeros(cells_x: usize, cells_y: usize, bins: usize, cell_size: usize) -> Self {
        FeatureGrid {
            cells_x,
            cells_y,
            bins,
            cell_size,
            values: vec![0.0; cells_x * cells_y * bins],
        }
    }

    pub fn cells_x(&self) -> usize {
        self.cells_x
    }

    pub fn cells_y(&self) -> usize {
        self.cells_y
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn cell(&self, cx: usize, cy: usize) -> &[f64] {
        let start = (cy * self.cells_x + cx) * self.bins;
        &self.values[start..start + self.bins]
    }

    #[inline]
    fn cell_mut(&mut self, cx: usize, cy: usize) -> &mut [f64] {
        let start = (cy * self.cells_x + cx) * self.bins;
        &mut self.values[start..start + self.bins]
    }

    /// Copies the `cols x rows` block of cells whose top-left cell is
    /// `(x0, y0)`.
    pub fn sub_grid(&self, x0: usize, y0: usize, cols: usize, rows: usize) -> Result<FeatureGrid> {
        if cols == 0 || rows == 0 || x0 + cols > self.cells_x || y0 + rows > self.cells_y {
            return Err(Error::WindowOutOfBounds {
                x: x0,
                y: y0,
                cols,
                rows,
                cells_x: self.cells_x,
                cells_y: self.cells_y,
            });
        }
        let mut values = Vec::with_capacity(cols * rows * self.bins);
        for cy in y0..y0 + rows {
            for cx in x0..x0 + cols {
                values.extend_from_slice(self.cell(cx, cy));
            }
        }
        Ok(FeatureGrid {
            cells_x: cols,
            cells_y: rows,
            bins: self.bins,
            cell_size: self.cell_size,
            values,
        })
    }

    /// Sum of products of `self` placed with its top-left cell at `(x, y)` in
    /// `target`. Caller guarantees the window is in bounds.
    pub(crate) fn window_dot_unchecked(&self, target: &FeatureGrid, x: usize, y: usize) -> f64 {
        let row_len = self.cells_x * self.bins;
        let mut total = 0.0;
        for r in 0..self.cells_y {
            let src = &self.values[r * row_len..(r + 1) * row_len];
            let start = ((y + r) * target.cells_x + x) * target.bins;
            let dst = &target.values[start..start + row_len];
            total += src.iter().zip(dst).map(|(a, b)| a * b).sum::<f64>();
        }
        total
    }

    /// Sum of products with a window of `target`, bounds- and shape-checked.
    pub fn window_dot(&self, target: &FeatureGrid, x: usize, y: usize) -> Result<f64> {
        if self.bins != target.bins {
            return Err(Error::InvalidParameter(format!(
                "bin counts differ: {} vs {}",
                self.bins, target.bins
            )));
        }
        if x + self.cells_x > target.cells_x || y + self.cells_y > target.cells_y {
            return Err(Error::WindowOutOfBounds {
                x,
                y,
                cols: self.cells_x,
                rows: self.cells_y,
                cells_x: target.cells_x,
                cells_y: target.cells_y,
            });
        }
        Ok(self.window_dot_unchecked(target, x, y))
    }

    /// Full-grid sum of products; both grids must share their shape.
    pub fn dot(&self, other: &FeatureGrid) -> Result<f64> {
        if (self.cells_x, self.cells_y, self.bins) != (other.cells_x, other.cells_y, other.bins) {
            return Err(Error::InvalidParameter(format!(
                "grid shapes differ: {}x{}x{} vs {}x{}x{}",
                self.cells_x, self.cells_y, self.bins, other.cells_x, other.cells_y, other.bins
            )));
        }
        Ok(self.window_dot_unchecked(other, 0, 0))
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Unnormalized histograms: each covered pixel votes its gradient magnitude
/// into the two nearest orientation bins, bin `b` being centered on
/// `b * pi / bins`. Pixels in trailing partial cells are ignored.
pub fn cell_histograms(field: &GradientField, params: HogParams) -> Result<FeatureGrid> {
    let HogParams { cell_size, bins } = params;
    if cell_size < 2 || bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "HOG needs cell_size >= 2 and bins >= 2, got {cell_size} and {bins}"
        )));
    }
    if field.width < cell_size || field.height < cell_size {
        return Err(Error::ImageTooSmall {
            width: field.width,
            height: field.height,
            min_width: cell_size,
            min_height: cell_size,
        });
    }
    let cells_x = field.width / cell_size;
    let cells_y = field.height / cell_size;
    let mut grid = FeatureGrid::zeros(cells_x, cells_y, bins, cell_size);
    let bin_width = PI / bins as f64;
    for y in 0..cells_y * cell_size {
        for x in 0..cells_x * cell_size {
            let idx = y * field.width + x;
            let mag = field.magnitude[idx];
            if mag == 0.0 {
                continue;
            }
            let pos = field.orientation[idx] / bin_width;
            let lower = pos.floor();
            let frac = pos - lower;
            let b0 = (lower as usize) % bins;
            let b1 = (b0 + 1) % bins;
            let cell = grid.cell_mut(x / cell_size, y / cell_size);
            cell[b0] += mag * (1.0 - frac);
            cell[b1] += mag * frac;
        }
    }
    Ok(grid)
}

/// L2-normalizes every 2x2 block of cells (stride one cell) and replaces
/// each cell by the mean of its normalized copies. Grids narrower than two
/// cells along an axis use one-cell blocks along that axis.
pub fn block_normalize(grid: &FeatureGrid) -> FeatureGrid {
    let bw = grid.cells_x.min(2);
    let bh = grid.cells_y.min(2);
    let mut acc = FeatureGrid::zeros(grid.cells_x, grid.cells_y, grid.bins, grid.cell_size);
    let mut counts = vec![0usize; grid.cells_x * grid.cells_y];
    for by in 0..=grid.cells_y - bh {
        for bx in 0..=grid.cells_x - bw {
            let mut energy = 0.0;
            for cy in by..by + bh {
                for cx in bx..bx + bw {
                    energy += grid.cell(cx, cy).iter().map(|v| v * v).sum::<f64>();
                }
            }
            let denom = (energy + HOG_EPSILON * HOG_EPSILON).sqrt();
            for cy in by..by + bh {
                for cx in bx..bx + bw {
                    counts[cy * grid.cells_x + cx] += 1;
                    let src = grid.cell(cx, cy).to_vec();
                    for (d, s) in acc.cell_mut(cx, cy).iter_mut().zip(src) {
                        *d += s / denom;
                    }
                }
            }
        }
    }
    for cy in 0..grid.cells_y {
        for cx in 0..grid.cells_x {
            let c = counts[cy * grid.cells_x + cx] as f64;
            for v in acc.cell_mut(cx, cy) {
                *v /= c;
            }
        }
    }
    acc
}

/// Block-normalized HOG grid of `img`.
pub fn hog(img: &GrayImage, params: HogParams) -> Result<FeatureGrid> {
    if img.width() < params.cell_size || img.height() < params.cell_size {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min_width: params.cell_size,
            min_height: params.cell_size,
        });
    }
    let field = gradients(img)?;
    Ok(block_normalize(&cell_histograms(&field, params)?))
}
