//! Grayscale rasters, binary PGM I/O and geometric resampling.
//!
//! Sample-grid convention used by every resampling routine in this module:
//! pixel centers sit at integer coordinates, so pixel `(x, y)` covers the
//! point `(x, y)` and the image spans `[0, w-1] x [0, h-1]`. Output pixels are
//! produced by inverse mapping into the source and bilinear interpolation of
//! the four surrounding centers. A sample point outside `[0, w-1] x [0, h-1]`
//! evaluates to 0.
//!
//! [`resize_bilinear`] maps the corner centers onto each other
//! (`src = dst * (in - 1) / (out - 1)`), so resizing `[0, 100]` from 2x1 to
//! 3x1 samples the source at 0, 0.5 and 1 and yields `[0, 50, 100]`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::matching::Homography;
use crate::{Error, Result};

/// Tolerance on the source bounds used when deciding whether a sample point
/// is inside the image; absorbs rounding in `cos(pi/2)`-style coefficients.
const BOUNDS_EPS: f64 = 1e-9;

/// 8-bit single-channel raster stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if pixels.len() != width * height {
            return Err(Error::PixelCountMismatch {
                width,
                height,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Bilinear sample at a real-valued position, `None` outside the pixel
    /// center hull.
    pub fn sample(&self, x: f64, y: f64) -> Option<f64> {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        if !(x >= -BOUNDS_EPS && y >= -BOUNDS_EPS && x <= max_x + BOUNDS_EPS && y <= max_y + BOUNDS_EPS) {
            return None;
        }
        let x = x.clamp(0.0, max_x);
        let y = y.clamp(0.0, max_y);
        let x0 = (x.floor() as usize).min(self.width - 1);
        let y0 = (y.floor() as usize).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let p = |xx, yy| self.get(xx, yy) as f64;
        let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
        let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
        Some(top * (1.0 - fy) + bottom * fy)
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("GrayImage");
        s.field("width", &self.width).field("height", &self.height);
        if self.pixels.len() <= 64 {
            s.field("pixels", &self.pixels);
        }
        s.finish()
    }
}

/// Axis-aligned box with inclusive minima and exclusive maxima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BBox {
    pub xmin: usize,
    pub ymin: usize,
    pub xmax: usize,
    pub ymax: usize,
}

impl BBox {
    pub fn new(xmin: usize, ymin: usize, xmax: usize, ymax: usize) -> Self {
        BBox {
            xmin,
            ymin,
            xmax,
            ymax,
        }
    }

    pub fn width(&self) -> usize {
        self.xmax.saturating_sub(self.xmin)
    }

    pub fn height(&self) -> usize {
        self.ymax.saturating_sub(self.ymin)
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.xmin < self.xmax && self.ymin < self.ymax && self.xmax <= width && self.ymax <= height
    }

    /// Moves the box by `(dx, dy)`.
    pub fn offset(&self, dx: usize, dy: usize) -> BBox {
        BBox::new(self.xmin + dx, self.ymin + dy, self.xmax + dx, self.ymax + dy)
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}) x [{}, {})", self.xmin, self.xmax, self.ymin, self.ymax)
    }
}

/// Affine map from output coordinates to source coordinates:
/// `src_x = a*x + b*y + c`, `src_y = d*x + e*y + f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub coeffs: [f64; 6],
}

impl AffineMap {
    pub fn new(coeffs: [f64; 6]) -> Self {
        AffineMap { coeffs }
    }

    pub fn identity() -> Self {
        AffineMap::new([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b, c, d, e, f] = self.coeffs;
        (a * x + b * y + c, d * x + e * y + f)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn determinant(&self) -> f64 {
        self.coeffs[0] * self.coeffs[4] - self.coeffs[1] * self.coeffs[3]
    }

    pub fn inverse(&self) -> Option<AffineMap> {
        let det = self.determinant();
        if !det.is_finite() || det.abs() < 1e-12 {
            return None;
        }
        let [a, b, c, d, e, f] = self.coeffs;
        let (ia, ib, id, ie) = (e / det, -b / det, -d / det, a / det);
        Some(AffineMap::new([ia, ib, -(ia * c + ib * f), id, ie, -(id * c + ie * f)]))
    }

    /// Forward map that rotates an image of `width x height` by `angle`
    /// radians anti-clockwise as displayed (y axis pointing down), then
    /// scales by `scale_x` and `scale_y`, translated so the transformed
    /// pixel-center hull starts at the origin. Returns the forward map and
    /// the output canvas size that holds the whole hull.
    pub fn rotation_scale(width: usize, height: usize, angle: f64, scale_x: f64, scale_y: f64) -> (AffineMap, usize, usize) {
        let (s, c) = angle.sin_cos();
        let lin = [scale_x * c, scale_x * s, -scale_y * s, scale_y * c];
        let corners = [
            (0.0, 0.0),
            ((width - 1) as f64, 0.0),
            (0.0, (height - 1) as f64),
            ((width - 1) as f64, (height - 1) as f64),
        ];
        let mapped: Vec<(f64, f64)> = corners
            .iter()
            .map(|&(x, y)| (lin[0] * x + lin[1] * y, lin[2] * x + lin[3] * y))
            .collect();
        let min_x = mapped.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let max_x = mapped.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let min_y = mapped.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let max_y = mapped.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let out_w = ((max_x - min_x) + BOUNDS_EPS).floor() as usize + 1;
        let out_h = ((max_y - min_y) + BOUNDS_EPS).floor() as usize + 1;
        let forward = AffineMap::new([lin[0], lin[1], -min_x, lin[2], lin[3], -min_y]);
        (forward, out_w, out_h)
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parses a binary (P5) PGM with maxval 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::MalformedHeader("missing P5 magic".into()));
    }
    pos += 2;

    let mut fields = [0u32; 3];
    for (k, name) in ["width", "height", "maxval"].iter().enumerate() {
        // whitespace and comments before each field; at least one separator
        let start = pos;
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        if pos == start {
            return Err(Error::MalformedHeader(format!("expected whitespace before {name}")));
        }
        let digits_start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if pos == digits_start {
            return Err(Error::MalformedHeader(format!("expected {name}")));
        }
        let text = std::str::from_utf8(&bytes[digits_start..pos]).expect("ascii digits");
        fields[k] = text
            .parse()
            .map_err(|_| Error::MalformedHeader(format!("{name} out of range")))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedHeader("expected single whitespace after maxval".into())),
    }

    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let (width, height) = (width as usize, height as usize);
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    let expected = width * height;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            actual: payload.len(),
        });
    }
    GrayImage::new(width, height, payload[..expected].to_vec())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    decode_pgm(&bytes)
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(&encode_pgm(img)).map_err(|e| io_err(path, e))
}

pub fn crop(img: &GrayImage, bbox: BBox) -> Result<GrayImage> {
    if !bbox.fits(img.width, img.height) {
        return Err(Error::BBoxOutOfBounds {
            bbox: bbox.to_string(),
            width: img.width,
            height: img.height,
        });
    }
    let mut pixels = Vec::with_capacity(bbox.width() * bbox.height());
    for y in bbox.ymin..bbox.ymax {
        pixels.extend_from_slice(&img.pixels[y * img.width + bbox.xmin..y * img.width + bbox.xmax]);
    }
    GrayImage::new(bbox.width(), bbox.height(), pixels)
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Bilinear resize with corner-aligned sample grids (see module docs).
pub fn resize_bilinear(img: &GrayImage, out_w: usize, out_h: usize) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidDimensions {
            width: out_w,
            height: out_h,
        });
    }
    if out_w == img.width && out_h == img.height {
        return Ok(img.clone());
    }
    let axis = |out: usize, inp: usize| -> Vec<f64> {
        if out == 1 {
            vec![(inp - 1) as f64 / 2.0]
        } else {
            let step = (inp - 1) as f64 / (out - 1) as f64;
            (0..out).map(|i| i as f64 * step).collect()
        }
    };
    let xs = axis(out_w, img.width);
    let ys = axis(out_h, img.height);
    GrayImage::from_fn(out_w, out_h, |x, y| to_u8(img.sample(xs[x], ys[y]).unwrap_or(0.0)))
}

/// Resamples `img` onto an `out_w x out_h` canvas; `map` sends output
/// coordinates to source coordinates.
pub fn warp_affine(img: &GrayImage, map: &AffineMap, out_w: usize, out_h: usize) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidDimensions {
            width: out_w,
            height: out_h,
        });
    }
    if !map.is_finite() {
        return Err(Error::InvalidParameter("affine map has non-finite coefficients".into()));
    }
    GrayImage::from_fn(out_w, out_h, |x, y| {
        let (sx, sy) = map.apply(x as f64, y as f64);
        to_u8(img.sample(sx, sy).unwrap_or(0.0))
    })
}

/// Resamples `img` so that output pixel `p` takes the source value at
/// `H^-1 p`, i.e. `h` maps source coordinates to output coordinates.
pub fn warp_homography(img: &GrayImage, h: &Homography, out_w: usize, out_h: usize) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidDimensions {
            width: out_w,
            height: out_h,
        });
    }
    let inv = h.inverse()?;
    GrayImage::from_fn(out_w, out_h, |x, y| {
        let v = inv
            .apply(x as f64, y as f64)
            .and_then(|(sx, sy)| img.sample(sx, sy))
            .unwrap_or(0.0);
        to_u8(v)
    })
}
