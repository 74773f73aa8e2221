//! Synthetic benchmark data: scenes of part-based objects with annotated
//! boxes, and a cluttered texture image.
//!
//! Each object category is a fixed arrangement of parts. Every instance
//! jitters each part independently, draws the box with a random aspect
//! ratio, and randomizes foreground and background intensities (including
//! polarity) and pixel noise.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imageio::save_pgm;
use crate::{BBox, Error, GrayImage, Result};

pub const CATEGORIES: [&str; 4] = ["face", "house", "tree", "car"];

const SCENE_SIDE: usize = 256;
const SLOT: usize = SCENE_SIDE / 2;
const PART_JITTER: f64 = 0.08;

#[derive(Debug, Clone, Copy)]
enum Shape {
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    /// Isosceles, apex up.
    Roof { x0: f64, x1: f64, base: f64, apex: f64 },
}

impl Shape {
    fn contains(&self, u: f64, v: f64) -> bool {
        match *self {
            Shape::Ellipse { cx, cy, rx, ry } => ((u - cx) / rx).powi(2) + ((v - cy) / ry).powi(2) <= 1.0,
            Shape::Rect { x0, y0, x1, y1 } => (x0..=x1).contains(&u) && (y0..=y1).contains(&v),
            Shape::Roof { x0, x1, base, apex } => {
                if v < apex || v > base {
                    return false;
                }
                let half = 0.5 * (x1 - x0) * (v - apex) / (base - apex);
                (u - 0.5 * (x0 + x1)).abs() <= half
            }
        }
    }

    fn shifted(&self, du: f64, dv: f64) -> Shape {
        match *self {
            Shape::Ellipse { cx, cy, rx, ry } => Shape::Ellipse { cx: cx + du, cy: cy + dv, rx, ry },
            Shape::Rect { x0, y0, x1, y1 } => Shape::Rect { x0: x0 + du, y0: y0 + dv, x1: x1 + du, y1: y1 + dv },
            Shape::Roof { x0, x1, base, apex } => Shape::Roof { x0: x0 + du, x1: x1 + du, base: base + dv, apex: apex + dv },
        }
    }
}

/// Parts in drawing order with their intensity slot: 0 body, 1 detail.
fn parts(category: usize) -> Vec<(Shape, usize)> {
    use Shape::*;
    match category {
        0 => vec![
            (Ellipse { cx: 0.5, cy: 0.5, rx: 0.4, ry: 0.47 }, 0),
            (Ellipse { cx: 0.33, cy: 0.38, rx: 0.08, ry: 0.06 }, 1),
            (Ellipse { cx: 0.67, cy: 0.38, rx: 0.08, ry: 0.06 }, 1),
            (Rect { x0: 0.46, y0: 0.45, x1: 0.54, y1: 0.6 }, 1),
            (Rect { x0: 0.33, y0: 0.7, x1: 0.67, y1: 0.77 }, 1),
        ],
        1 => vec![
            (Rect { x0: 0.15, y0: 0.48, x1: 0.85, y1: 0.97 }, 0),
            (Roof { x0: 0.05, x1: 0.95, base: 0.48, apex: 0.05 }, 0),
            (Rect { x0: 0.42, y0: 0.68, x1: 0.58, y1: 0.97 }, 1),
            (Rect { x0: 0.22, y0: 0.58, x1: 0.35, y1: 0.7 }, 1),
            (Rect { x0: 0.65, y0: 0.58, x1: 0.78, y1: 0.7 }, 1),
        ],
        2 => vec![
            (Rect { x0: 0.42, y0: 0.55, x1: 0.58, y1: 0.98 }, 1),
            (Ellipse { cx: 0.5, cy: 0.33, rx: 0.38, ry: 0.3 }, 0),
            (Ellipse { cx: 0.3, cy: 0.5, rx: 0.16, ry: 0.12 }, 0),
            (Ellipse { cx: 0.7, cy: 0.5, rx: 0.16, ry: 0.12 }, 0),
        ],
        _ => vec![
            (Rect { x0: 0.03, y0: 0.38, x1: 0.97, y1: 0.7 }, 0),
            (Rect { x0: 0.25, y0: 0.12, x1: 0.7, y1: 0.4 }, 0),
            (Rect { x0: 0.31, y0: 0.18, x1: 0.46, y1: 0.36 }, 1),
            (Ellipse { cx: 0.25, cy: 0.74, rx: 0.13, ry: 0.16 }, 1),
            (Ellipse { cx: 0.75, cy: 0.74, rx: 0.13, ry: 0.16 }, 1),
        ],
    }
}

fn draw_object(canvas: &mut [f64], bbox: BBox, category: usize, rng: &mut ChaCha8Rng) {
    let jittered: Vec<(Shape, usize)> = parts(category)
        .into_iter()
        .map(|(s, slot)| {
            let du = rng.gen_range(-PART_JITTER..=PART_JITTER);
            let dv = rng.gen_range(-PART_JITTER..=PART_JITTER);
            (s.shifted(du, dv), slot)
        })
        .collect();
    let bright = rng.gen_bool(0.5);
    let (body, detail) = if bright {
        (rng.gen_range(170.0..240.0), rng.gen_range(20.0..90.0))
    } else {
        (rng.gen_range(20.0..90.0), rng.gen_range(170.0..240.0))
    };
    let levels = [body, detail];
    // object fills the inner 80% of its box
    let (w, h) = (bbox.width() as f64, bbox.height() as f64);
    for y in bbox.ymin..bbox.ymax {
        for x in bbox.xmin..bbox.xmax {
            let mut acc = 0.0;
            let mut hits = 0;
            for (sx, sy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                let u = ((x - bbox.xmin) as f64 + sx) / w * 1.25 - 0.125;
                let v = ((y - bbox.ymin) as f64 + sy) / h * 1.25 - 0.125;
                if let Some(level) = jittered.iter().rev().find(|(s, _)| s.contains(u, v)).map(|&(_, slot)| levels[slot]) {
                    acc += level;
                    hits += 1;
                }
            }
            let idx = y * SCENE_SIDE + x;
            canvas[idx] = (acc + (4 - hits) as f64 * canvas[idx]) / 4.0;
        }
    }
}

/// Smooth random background: a few low-frequency cosines around a mid level.
fn background(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let base = rng.gen_range(80.0..160.0);
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-0.05..0.05),
                rng.gen_range(-0.05..0.05),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(5.0..20.0),
            )
        })
        .collect();
    let mut out = vec![0.0; SCENE_SIDE * SCENE_SIDE];
    for y in 0..SCENE_SIDE {
        for x in 0..SCENE_SIDE {
            out[y * SCENE_SIDE + x] = base
                + waves
                    .iter()
                    .map(|&(fx, fy, ph, amp)| amp * (fx * x as f64 + fy * y as f64 + ph).cos())
                    .sum::<f64>();
        }
    }
    out
}

fn quantize(canvas: &[f64], side: usize, noise: f64, rng: &mut ChaCha8Rng) -> GrayImage {
    let px = canvas
        .iter()
        .map(|&v| (v + rng.gen_range(-noise..=noise)).round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::new(side, side, px).expect("canvas matches its side")
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub scenes: Vec<GrayImage>,
    /// (scene index, category, box).
    pub objects: Vec<(usize, &'static str, BBox)>,
}

impl SyntheticCorpus {
    pub fn scene_name(index: usize) -> String {
        format!("scene_{index:03}.pgm")
    }

    /// Annotation text with paths relative to the scene directory.
    pub fn annotation_text(&self) -> String {
        let mut out = String::from("# image,category,xmin,ymin,xmax,ymax\n");
        for (scene, cat, b) in &self.objects {
            let _ = writeln!(out, "{},{},{},{},{},{}", Self::scene_name(*scene), cat, b.xmin, b.ymin, b.xmax, b.ymax);
        }
        out
    }
}

/// `per_category` instances of each category, four objects per scene in
/// a 2x2 slot layout, categories shuffled across slots.
pub fn synthetic_corpus(seed: u64, per_category: usize) -> Result<SyntheticCorpus> {
    if per_category == 0 {
        return Err(Error::InvalidParameter("per_category must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..CATEGORIES.len()).flat_map(|c| std::iter::repeat_n(c, per_category)).collect();
    labels.shuffle(&mut rng);
    let mut scenes = Vec::new();
    let mut objects = Vec::new();
    for chunk in labels.chunks(4) {
        let scene = scenes.len();
        let mut canvas = background(&mut rng);
        for (slot, &cat) in chunk.iter().enumerate() {
            let (ox, oy) = ((slot % 2) * SLOT, (slot / 2) * SLOT);
            let w = rng.gen_range(56..=120usize);
            let h = rng.gen_range(56..=120usize);
            let x0 = ox + rng.gen_range(0..=SLOT - w);
            let y0 = oy + rng.gen_range(0..=SLOT - h);
            let bbox = BBox::new(x0, y0, x0 + w, y0 + h);
            draw_object(&mut canvas, bbox, cat, &mut rng);
            objects.push((scene, CATEGORIES[cat], bbox));
        }
        let noise = rng.gen_range(4.0..14.0);
        scenes.push(quantize(&canvas, SCENE_SIDE, noise, &mut rng));
    }
    Ok(SyntheticCorpus { scenes, objects })
}

/// Cluttered grayscale texture of overlapping ellipses and rotated
/// rectangles on a gradient.
pub fn textured_image(seed: u64, width: usize, height: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (wf, hf) = (width as f64, height as f64);
    let mut canvas: Vec<f64> = (0..width * height)
        .map(|i| 60.0 + 80.0 * ((i % width) as f64 / wf) + 40.0 * ((i / width) as f64 / hf))
        .collect();
    let count = (width * height) / 220;
    for _ in 0..count {
        let cx = rng.gen_range(0.0..wf);
        let cy = rng.gen_range(0.0..hf);
        let a: f64 = rng.gen_range(2.0..14.0);
        let b = rng.gen_range(2.0..14.0);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let level = rng.gen_range(0.0..255.0);
        let ellipse = rng.gen_bool(0.5);
        let (s, c) = theta.sin_cos();
        let reach = a.max(b).ceil() as isize + 1;
        for y in (cy as isize - reach).max(0)..(cy as isize + reach).min(height as isize) {
            for x in (cx as isize - reach).max(0)..(cx as isize + reach).min(width as isize) {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                let (u, v) = (c * dx + s * dy, -s * dx + c * dy);
                let inside = if ellipse {
                    (u / a).powi(2) + (v / b).powi(2) <= 1.0
                } else {
                    u.abs() <= a && v.abs() <= b
                };
                if inside {
                    canvas[y as usize * width + x as usize] = level;
                }
            }
        }
    }
    let px = canvas.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    GrayImage::new(width, height, px).expect("canvas matches its size")
}

/// Writes the scenes and `annotations.txt` into `dir`.
pub fn write_corpus(corpus: &SyntheticCorpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for (i, scene) in corpus.scenes.iter().enumerate() {
        save_pgm(scene, dir.join(SyntheticCorpus::scene_name(i)))?;
    }
    let path = dir.join("annotations.txt");
    std::fs::write(&path, corpus.annotation_text()).map_err(|source| Error::Io { path, source })
}
