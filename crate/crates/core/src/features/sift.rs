//! Difference-of-Gaussian keypoints and 4x4x8 gradient descriptors.
//!
//! The detector follows the usual recipe: a Gaussian scale space with
//! `intervals + 3` images per octave, DoG extrema over 26 neighbours,
//! quadratic refinement, a contrast test on `[0, 1]` intensities, the
//! Hessian edge test and a 36-bin orientation histogram. Octaves are built
//! by taking every other pixel of the image with twice the base blur.
//!
//! Descriptors are sampled on a 16x16 grid in the keypoint frame (four
//! samples per cell side, cells `3 sigma` wide) and accumulated with
//! trilinear interpolation. The Gaussian window over the samples is
//! optional; deformable matching shifts cells around and wants every cell
//! weighted alike.

use std::f64::consts::PI;

use crate::{Error, GrayImage, Result};

pub const DESCRIPTOR_CELLS: usize = 4;
pub const DESCRIPTOR_BINS: usize = 8;
pub const DESCRIPTOR_LEN: usize = DESCRIPTOR_CELLS * DESCRIPTOR_CELLS * DESCRIPTOR_BINS;
/// Component ceiling applied before the second normalization.
pub const CLAMP_CEILING: f64 = 0.2;

const SAMPLES_PER_CELL: usize = 4;
const CELL_WIDTH_SIGMAS: f64 = 3.0;
const ORIENTATION_BINS: usize = 36;
const ORIENTATION_SIGMA_FACTOR: f64 = 1.5;
const BORDER: usize = 5;
const MAX_REFINE_STEPS: usize = 5;
const MIN_OCTAVE_SIDE: usize = 12;
const MIN_IMAGE_SIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftParams {
    pub octaves: usize,
    pub intervals: usize,
    pub sigma0: f64,
    /// Blur already present in the input image.
    pub assumed_blur: f64,
    pub contrast_threshold: f64,
    pub edge_ratio: f64,
    /// Secondary orientation peaks must reach this fraction of the maximum.
    pub peak_ratio: f64,
    pub max_orientations: usize,
}

impl Default for SiftParams {
    fn default() -> Self {
        SiftParams {
            octaves: 4,
            intervals: 3,
            sigma0: 1.6,
            assumed_blur: 0.5,
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
            peak_ratio: 0.8,
            max_orientations: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftKeypoint {
    pub x: f64,
    pub y: f64,
    /// Blur scale in input-image pixels.
    pub scale: f64,
    /// Dominant gradient direction in `[0, 2pi)`, measured from +x towards +y.
    pub orientation: f64,
    /// Interpolated DoG value at the extremum.
    pub response: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiftDescriptor {
    values: [f64; DESCRIPTOR_LEN],
}

impl SiftDescriptor {
    pub fn new(values: [f64; DESCRIPTOR_LEN]) -> Self {
        SiftDescriptor { values }
    }

    pub fn zeros() -> Self {
        SiftDescriptor {
            values: [0.0; DESCRIPTOR_LEN],
        }
    }

    pub fn values(&self) -> &[f64; DESCRIPTOR_LEN] {
        &self.values
    }

    /// Histogram of cell `(row, col)` of the 4x4 layout.
    pub fn cell(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * DESCRIPTOR_CELLS + col) * DESCRIPTOR_BINS;
        &self.values[start..start + DESCRIPTOR_BINS]
    }

    /// No gradient energy was found in the support window.
    pub fn is_degenerate(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Unit-normalizes, clamps at [`CLAMP_CEILING`] and renormalizes.
    ///
    /// Clamping and renormalizing once can push the unclamped entries back
    /// over the ceiling, so the fixed point of that iteration is solved
    /// directly: the `k` largest entries sit exactly at the ceiling and the
    /// rest share the remaining unit energy. Vectors too sparse for such a
    /// fixed point (fewer than `1 / ceiling^2` non-zero entries) fall back to
    /// a single clamp-and-renormalize pass. All-zero input stays all-zero.
    pub fn from_raw(mut values: [f64; DESCRIPTOR_LEN]) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return SiftDescriptor::zeros();
        }
        values.iter_mut().for_each(|v| *v /= norm);

        let mut order: Vec<usize> = (0..DESCRIPTOR_LEN).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        let c2 = CLAMP_CEILING * CLAMP_CEILING;
        let mut rest: f64 = 1.0;
        for k in 0..DESCRIPTOR_LEN {
            let budget = 1.0 - k as f64 * c2;
            if budget <= 0.0 || rest <= 0.0 {
                break;
            }
            let scale = (budget / rest).sqrt();
            if values[order[k]] * scale <= CLAMP_CEILING {
                for (rank, &i) in order.iter().enumerate() {
                    values[i] = if rank < k { CLAMP_CEILING } else { values[i] * scale };
                }
                return SiftDescriptor { values };
            }
            rest -= values[order[k]] * values[order[k]];
        }

        for v in values.iter_mut() {
            *v = v.min(CLAMP_CEILING);
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        values.iter_mut().for_each(|v| *v /= norm);
        SiftDescriptor { values }
    }
}

/// Float image in `[0, 1]`.
#[derive(Debug, Clone)]
struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    fn zeros(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Bilinear sample; `None` outside the pixel-center hull.
    fn sample(&self, x: f64, y: f64) -> Option<f64> {
        if !(x >= 0.0 && y >= 0.0 && x <= (self.width - 1) as f64 && y <= (self.height - 1) as f64) {
            return None;
        }
        let x0 = (x.floor() as usize).min(self.width - 1);
        let y0 = (y.floor() as usize).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);
        let top = lerp(self.at(x0, y0), self.at(x1, y0), fx);
        let bottom = lerp(self.at(x0, y1), self.at(x1, y1), fx);
        Some(lerp(top, bottom, fy))
    }

    fn blur(&self, sigma: f64) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let radius = (3.0 * sigma).ceil().max(1.0) as isize;
        let mut kernel: Vec<f64> = (-radius..=radius)
            .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let sum: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= sum);

        let reflect = |i: isize, n: usize| -> usize {
            let n = n as isize;
            let mut i = i;
            // mirror without repeating the edge pixel; loops for kernels wider than the image
            loop {
                if i < 0 {
                    i = -i;
                } else if i >= n {
                    i = 2 * (n - 1) - i;
                } else {
                    return i as usize;
                }
                if n == 1 {
                    return 0;
                }
            }
        };

        let (w, h) = (self.width, self.height);
        let mut tmp = Plane::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, &kv) in kernel.iter().enumerate() {
                    let sx = reflect(x as isize + k as isize - radius, w);
                    acc += kv * self.data[y * w + sx];
                }
                tmp.data[y * w + x] = acc;
            }
        }
        let mut out = Plane::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, &kv) in kernel.iter().enumerate() {
                    let sy = reflect(y as isize + k as isize - radius, h);
                    acc += kv * tmp.data[sy * w + x];
                }
                out.data[y * w + x] = acc;
            }
        }
        out
    }

    fn downsample(&self) -> Plane {
        let w = self.width.div_ceil(2);
        let h = self.height.div_ceil(2);
        let mut out = Plane::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                out.data[y * w + x] = self.at(2 * x, 2 * y);
            }
        }
        out
    }
}

/// Gaussian and DoG pyramids of one image, reusable across detection and
/// description.
#[derive(Debug, Clone)]
pub struct SiftPyramid {
    params: SiftParams,
    width: usize,
    height: usize,
    /// `gaussians[o][k]` has blur `sigma0 * 2^(k / intervals)` in octave pixels.
    gaussians: Vec<Vec<Plane>>,
    dogs: Vec<Vec<Plane>>,
}

impl SiftPyramid {
    pub fn build(img: &GrayImage, params: SiftParams) -> Result<Self> {
        if img.width() < MIN_IMAGE_SIDE || img.height() < MIN_IMAGE_SIDE {
            return Err(Error::ImageTooSmall {
                width: img.width(),
                height: img.height(),
                min_width: MIN_IMAGE_SIDE,
                min_height: MIN_IMAGE_SIDE,
            });
        }
        if params.intervals == 0 || params.octaves == 0 || !(params.sigma0 > params.assumed_blur) {
            return Err(Error::InvalidParameter("SIFT needs octaves >= 1, intervals >= 1 and sigma0 above the input blur".into()));
        }
        let s = params.intervals;
        let base = Plane {
            width: img.width(),
            height: img.height(),
            data: img.pixels().iter().map(|&p| p as f64 / 255.0).collect(),
        };
        let base = base.blur((params.sigma0.powi(2) - params.assumed_blur.powi(2)).sqrt());
        let k = 2f64.powf(1.0 / s as f64);
        let increments: Vec<f64> = (1..s + 3)
            .map(|i| {
                let prev = params.sigma0 * k.powi(i as i32 - 1);
                let next = prev * k;
                (next * next - prev * prev).sqrt()
            })
            .collect();

        let mut gaussians: Vec<Vec<Plane>> = Vec::new();
        let mut seed = base;
        for o in 0..params.octaves {
            if o > 0 {
                let prev: &Vec<Plane> = &gaussians[o - 1];
                let next = prev[s].downsample();
                if next.width.min(next.height) < MIN_OCTAVE_SIDE {
                    break;
                }
                seed = next;
            }
            let mut octave = Vec::with_capacity(s + 3);
            octave.push(seed.clone());
            for inc in &increments {
                let blurred = octave.last().expect("seeded").blur(*inc);
                octave.push(blurred);
            }
            gaussians.push(octave);
        }
        let dogs = gaussians
            .iter()
            .map(|octave| {
                octave
                    .windows(2)
                    .map(|pair| Plane {
                        width: pair[0].width,
                        height: pair[0].height,
                        data: pair[1].data.iter().zip(&pair[0].data).map(|(b, a)| b - a).collect(),
                    })
                    .collect()
            })
            .collect();
        Ok(SiftPyramid {
            params,
            width: img.width(),
            height: img.height(),
            gaussians,
            dogs,
        })
    }

    pub fn params(&self) -> &SiftParams {
        &self.params
    }

    pub fn octave_count(&self) -> usize {
        self.gaussians.len()
    }

    /// Keypoints in deterministic scan order: octave, layer, row, column,
    /// then descending orientation-peak strength.
    pub fn detect(&self) -> Vec<SiftKeypoint> {
        let s = self.params.intervals;
        let prefilter = 0.5 * self.params.contrast_threshold;
        let mut out = Vec::new();
        for (o, dogs) in self.dogs.iter().enumerate() {
            let (w, h) = (dogs[0].width, dogs[0].height);
            if w <= 2 * BORDER || h <= 2 * BORDER {
                continue;
            }
            for layer in 1..=s {
                for y in BORDER..h - BORDER {
                    for x in BORDER..w - BORDER {
                        let v = dogs[layer].at(x, y);
                        if v.abs() <= prefilter || !is_extremum(dogs, layer, x, y) {
                            continue;
                        }
                        let Some(refined) = self.refine(o, layer, x, y) else {
                            continue;
                        };
                        out.extend(self.orient(o, refined));
                    }
                }
            }
        }
        out
    }

    fn refine(&self, octave: usize, layer: usize, x: usize, y: usize) -> Option<Refined> {
        let dogs = &self.dogs[octave];
        let s = self.params.intervals;
        let (w, h) = (dogs[0].width, dogs[0].height);
        let (mut l, mut px, mut py) = (layer, x, y);
        for _ in 0..MAX_REFINE_STEPS {
            let d = |dl: isize, dx: isize, dy: isize| {
                dogs[(l as isize + dl) as usize].at((px as isize + dx) as usize, (py as isize + dy) as usize)
            };
            let g = [
                0.5 * (d(0, 1, 0) - d(0, -1, 0)),
                0.5 * (d(0, 0, 1) - d(0, 0, -1)),
                0.5 * (d(1, 0, 0) - d(-1, 0, 0)),
            ];
            let c = d(0, 0, 0);
            let dxx = d(0, 1, 0) + d(0, -1, 0) - 2.0 * c;
            let dyy = d(0, 0, 1) + d(0, 0, -1) - 2.0 * c;
            let dss = d(1, 0, 0) + d(-1, 0, 0) - 2.0 * c;
            let dxy = 0.25 * (d(0, 1, 1) - d(0, -1, 1) - d(0, 1, -1) + d(0, -1, -1));
            let dxs = 0.25 * (d(1, 1, 0) - d(1, -1, 0) - d(-1, 1, 0) + d(-1, -1, 0));
            let dys = 0.25 * (d(1, 0, 1) - d(1, 0, -1) - d(-1, 0, 1) + d(-1, 0, -1));
            let hess = nalgebra::Matrix3::new(dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss);
            let inv = hess.try_inverse()?;
            let offset = -(inv * nalgebra::Vector3::new(g[0], g[1], g[2]));
            if offset.iter().any(|v| !v.is_finite()) {
                return None;
            }
            if offset.iter().all(|v| v.abs() <= 0.5) {
                let response = c + 0.5 * (g[0] * offset[0] + g[1] * offset[1] + g[2] * offset[2]);
                if response.abs() < self.params.contrast_threshold {
                    return None;
                }
                let trace = dxx + dyy;
                let det = dxx * dyy - dxy * dxy;
                let r = self.params.edge_ratio;
                if det <= 0.0 || trace * trace * r >= (r + 1.0) * (r + 1.0) * det {
                    return None;
                }
                return Some(Refined {
                    layer: l,
                    x: px,
                    y: py,
                    offset: [offset[0], offset[1], offset[2]],
                    response,
                });
            }
            let step = |v: f64| if v > 0.5 { 1isize } else if v < -0.5 { -1 } else { 0 };
            let nl = l as isize + step(offset[2]);
            let nx = px as isize + step(offset[0]);
            let ny = py as isize + step(offset[1]);
            if nl < 1 || nl > s as isize || nx < BORDER as isize || ny < BORDER as isize
                || nx >= (w - BORDER) as isize || ny >= (h - BORDER) as isize
            {
                return None;
            }
            l = nl as usize;
            px = nx as usize;
            py = ny as usize;
        }
        None
    }

    fn orient(&self, octave: usize, r: Refined) -> Vec<SiftKeypoint> {
        let s = self.params.intervals as f64;
        let octave_scale = 2f64.powi(octave as i32);
        let sigma_oct = self.params.sigma0 * 2f64.powf((r.layer as f64 + r.offset[2]) / s);
        let img = &self.gaussians[octave][r.layer];
        let weight_sigma = ORIENTATION_SIGMA_FACTOR * sigma_oct;
        let radius = (3.0 * weight_sigma).round() as isize;
        let mut hist = [0.0f64; ORIENTATION_BINS];
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let x = r.x as isize + dx;
                let y = r.y as isize + dy;
                if x < 1 || y < 1 || x >= img.width as isize - 1 || y >= img.height as isize - 1 {
                    continue;
                }
                let (x, y) = (x as usize, y as usize);
                let gx = img.at(x + 1, y) - img.at(x - 1, y);
                let gy = img.at(x, y + 1) - img.at(x, y - 1);
                let mag = gx.hypot(gy);
                let w = (-((dx * dx + dy * dy) as f64) / (2.0 * weight_sigma * weight_sigma)).exp();
                let angle = wrap_angle(gy.atan2(gx));
                let bin = ((angle / (2.0 * PI) * ORIENTATION_BINS as f64).round() as usize) % ORIENTATION_BINS;
                hist[bin] += w * mag;
            }
        }
        // two passes of a [1 4 6 4 1]/16 circular smoother
        for _ in 0..2 {
            let prev = hist;
            for i in 0..ORIENTATION_BINS {
                let at = |d: isize| prev[((i as isize + d).rem_euclid(ORIENTATION_BINS as isize)) as usize];
                hist[i] = (at(-2) + at(2) + 4.0 * (at(-1) + at(1)) + 6.0 * at(0)) / 16.0;
            }
        }
        let max = hist.iter().cloned().fold(0.0, f64::max);
        if !(max > 0.0) {
            return Vec::new();
        }
        let mut peaks: Vec<(f64, f64)> = Vec::new();
        for i in 0..ORIENTATION_BINS {
            let left = hist[(i + ORIENTATION_BINS - 1) % ORIENTATION_BINS];
            let right = hist[(i + 1) % ORIENTATION_BINS];
            let v = hist[i];
            if v > left && v > right && v >= self.params.peak_ratio * max {
                let shift = 0.5 * (left - right) / (left - 2.0 * v + right);
                let angle = wrap_angle((i as f64 + shift) * 2.0 * PI / ORIENTATION_BINS as f64);
                peaks.push((v, angle));
            }
        }
        peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
        peaks.truncate(self.params.max_orientations.max(1));
        let x = (r.x as f64 + r.offset[0]) * octave_scale;
        let y = (r.y as f64 + r.offset[1]) * octave_scale;
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        peaks
            .into_iter()
            .map(|(_, orientation)| SiftKeypoint {
                x,
                y,
                scale: sigma_oct * octave_scale,
                orientation,
                response: r.response,
            })
            .collect()
    }

    /// Pyramid level whose blur is closest to the keypoint scale.
    fn level_for(&self, scale: f64) -> (usize, usize) {
        let s = self.params.intervals;
        let level = (scale / self.params.sigma0).max(1e-12).log2() * s as f64;
        let octave = ((level / s as f64).floor().max(0.0) as usize).min(self.gaussians.len() - 1);
        let layer = (level - (octave * s) as f64).round().clamp(0.0, (s + 2) as f64) as usize;
        (octave, layer)
    }

    /// Descriptor of `kp`; see [`sift_descriptor`].
    pub fn describe(&self, kp: &SiftKeypoint, gaussian_weighting: bool) -> SiftDescriptor {
        let (octave, layer) = self.level_for(kp.scale);
        let img = &self.gaussians[octave][layer];
        let octave_scale = 2f64.powi(octave as i32);
        let cx = kp.x / octave_scale;
        let cy = kp.y / octave_scale;
        let cell_width = CELL_WIDTH_SIGMAS * kp.scale / octave_scale;
        let spacing = cell_width / SAMPLES_PER_CELL as f64;
        let (sin, cos) = kp.orientation.sin_cos();
        let samples = DESCRIPTOR_CELLS * SAMPLES_PER_CELL;
        let half = samples as f64 / 2.0;
        // window sigma of half the descriptor width, in cell units
        let window_sigma = DESCRIPTOR_CELLS as f64 / 2.0;
        // finite-difference steps along the frame axes
        let h = spacing.max(1.0);
        let step_u = (cos * h, sin * h);
        let step_v = (-sin * h, cos * h);

        let mut raw = [0.0f64; DESCRIPTOR_LEN];
        for row in 0..samples {
            for col in 0..samples {
                // frame coordinates in cells, origin at the descriptor center
                let u = (col as f64 + 0.5 - half) / SAMPLES_PER_CELL as f64;
                let v = (row as f64 + 0.5 - half) / SAMPLES_PER_CELL as f64;
                let fu = u * cell_width;
                let fv = v * cell_width;
                let px = cx + cos * fu - sin * fv;
                let py = cy + sin * fu + cos * fv;
                let probe = |du: f64, dv: f64| img.sample(px + du * step_u.0 + dv * step_v.0, py + du * step_u.1 + dv * step_v.1);
                // derivatives along the frame axes, so the angle is already relative
                let (Some(r), Some(l), Some(d), Some(t)) = (probe(1.0, 0.0), probe(-1.0, 0.0), probe(0.0, 1.0), probe(0.0, -1.0)) else {
                    continue;
                };
                let gu = r - l;
                let gv = d - t;
                let mag = gu.hypot(gv);
                if mag == 0.0 {
                    continue;
                }
                let weight = if gaussian_weighting {
                    (-(u * u + v * v) / (2.0 * window_sigma * window_sigma)).exp()
                } else {
                    1.0
                };
                let angle = wrap_angle(gv.atan2(gu));
                let cell_c = u + DESCRIPTOR_CELLS as f64 / 2.0 - 0.5;
                let cell_r = v + DESCRIPTOR_CELLS as f64 / 2.0 - 0.5;
                let bin = angle / (2.0 * PI) * DESCRIPTOR_BINS as f64;
                accumulate(&mut raw, cell_r, cell_c, bin, weight * mag);
            }
        }
        SiftDescriptor::from_raw(raw)
    }
}

struct Refined {
    layer: usize,
    x: usize,
    y: usize,
    offset: [f64; 3],
    response: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let t = a.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

fn is_extremum(dogs: &[Plane], layer: usize, x: usize, y: usize) -> bool {
    let v = dogs[layer].at(x, y);
    let mut is_max = true;
    let mut is_min = true;
    for l in layer - 1..=layer + 1 {
        for yy in y - 1..=y + 1 {
            for xx in x - 1..=x + 1 {
                if l == layer && yy == y && xx == x {
                    continue;
                }
                let n = dogs[l].at(xx, yy);
                is_max &= v > n;
                is_min &= v < n;
                if !is_max && !is_min {
                    return false;
                }
            }
        }
    }
    is_max || is_min
}

/// Trilinear vote into the 4x4x8 histogram; out-of-grid cells are dropped and
/// orientation wraps around.
fn accumulate(hist: &mut [f64; DESCRIPTOR_LEN], r: f64, c: f64, o: f64, value: f64) {
    let r0 = r.floor();
    let c0 = c.floor();
    let o0 = o.floor();
    let (fr, fc, fo) = (r - r0, c - c0, o - o0);
    for (dr, wr) in [(0isize, 1.0 - fr), (1, fr)] {
        let ri = r0 as isize + dr;
        if ri < 0 || ri >= DESCRIPTOR_CELLS as isize || wr == 0.0 {
            continue;
        }
        for (dc, wc) in [(0isize, 1.0 - fc), (1, fc)] {
            let ci = c0 as isize + dc;
            if ci < 0 || ci >= DESCRIPTOR_CELLS as isize || wc == 0.0 {
                continue;
            }
            for (dob, wo) in [(0isize, 1.0 - fo), (1, fo)] {
                let oi = (o0 as isize + dob).rem_euclid(DESCRIPTOR_BINS as isize) as usize;
                let idx = (ri as usize * DESCRIPTOR_CELLS + ci as usize) * DESCRIPTOR_BINS + oi;
                hist[idx] += value * wr * wc * wo;
            }
        }
    }
}

pub fn detect_sift(img: &GrayImage, params: SiftParams) -> Result<Vec<SiftKeypoint>> {
    Ok(SiftPyramid::build(img, params)?.detect())
}

/// Descriptor of `kp` with the default pyramid parameters. Builds a pyramid
/// per call; use [`SiftPyramid::describe`] for many keypoints.
pub fn sift_descriptor(img: &GrayImage, kp: &SiftKeypoint, gaussian_weighting: bool) -> Result<SiftDescriptor> {
    Ok(SiftPyramid::build(img, SiftParams::default())?.describe(kp, gaussian_weighting))
}
