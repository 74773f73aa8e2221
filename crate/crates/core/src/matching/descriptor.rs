//! Rigid and deformable SIFT descriptor similarity plus mutual
//! nearest-neighbour matching.
//!
//! The deformable score regroups a descriptor's 4x4 cells into a 2x2
//! arrangement of 2x2-cell sub-patches. Each sub-patch may sit at any of
//! the nine top-left cell positions of the other descriptor's grid, subject
//! to the same ordering rule as template matching. The search space is small
//! enough to enumerate exactly.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::dtm::{is_feasible, Anchor, Placement};
use crate::features::sift::{DESCRIPTOR_BINS, DESCRIPTOR_CELLS};
use crate::features::{SiftDescriptor, SiftKeypoint};

const SUB: usize = 2;
/// Anchor positions per axis for a 2-cell sub-patch in a 4-cell grid.
const POSITIONS: usize = DESCRIPTOR_CELLS - SUB + 1;
const ANCHORS: usize = POSITIONS * POSITIONS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchMode {
    /// Dot product of descriptors.
    Conventional,
    /// Bidirectional deformable sub-patch score.
    Deformable,
}

impl MatchMode {
    pub fn name(&self) -> &'static str {
        match self {
            MatchMode::Conventional => "conventional",
            MatchMode::Deformable => "deformable",
        }
    }

    pub fn similarity(&self, a: &SiftDescriptor, b: &SiftDescriptor) -> f64 {
        match self {
            MatchMode::Conventional => conventional_sift_similarity(a, b),
            MatchMode::Deformable => deformable_sift_similarity(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiftFeature {
    pub keypoint: SiftKeypoint,
    pub descriptor: SiftDescriptor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub index_a: usize,
    pub index_b: usize,
    pub similarity: f64,
}

pub fn conventional_sift_similarity(a: &SiftDescriptor, b: &SiftDescriptor) -> f64 {
    a.values().iter().zip(b.values()).map(|(p, q)| p * q).sum()
}

/// Anchor tuple that leaves every sub-patch at its own position.
const RIGID: [u8; 4] = [0, 2, 6, 8];

/// Forward plus backward score of the undeformed layout, `2 * dot(a, b)` up
/// to rounding. Summed in the same order as [`deformable_sift_similarity`],
/// so it never exceeds it.
pub fn rigid_sift_score(a: &SiftDescriptor, b: &SiftDescriptor) -> f64 {
    let dots = cell_dots(a, b);
    let forward = window_scores(&dots, false);
    let backward = window_scores(&dots, true);
    tuple_score(&forward, &RIGID) + tuple_score(&backward, &RIGID)
}

/// All admissible anchor tuples of the 2x2 sub-patch arrangement, each
/// anchor encoded as `y * 3 + x`, in row-major sub-patch order.
pub fn feasible_descriptor_placements() -> &'static [[u8; 4]] {
    static TUPLES: OnceLock<Vec<[u8; 4]>> = OnceLock::new();
    TUPLES.get_or_init(|| {
        let mut out = Vec::new();
        let decode = |a: usize| Anchor::new(a % POSITIONS, a / POSITIONS);
        for t0 in 0..ANCHORS {
            for t1 in 0..ANCHORS {
                for t2 in 0..ANCHORS {
                    for t3 in 0..ANCHORS {
                        let placement = Placement {
                            n: SUB,
                            m: SUB,
                            anchors: vec![decode(t0), decode(t1), decode(t2), decode(t3)],
                        };
                        if is_feasible(&placement) {
                            out.push([t0 as u8, t1 as u8, t2 as u8, t3 as u8]);
                        }
                    }
                }
            }
        }
        out
    })
}

/// `cell_dots[ra][ca][rb][cb]`: histogram dot product of cell `(ra, ca)` of
/// `a` with cell `(rb, cb)` of `b`.
type CellDots = [[[[f64; DESCRIPTOR_CELLS]; DESCRIPTOR_CELLS]; DESCRIPTOR_CELLS]; DESCRIPTOR_CELLS];

fn cell_dots(a: &SiftDescriptor, b: &SiftDescriptor) -> CellDots {
    let mut out = [[[[0.0; DESCRIPTOR_CELLS]; DESCRIPTOR_CELLS]; DESCRIPTOR_CELLS]; DESCRIPTOR_CELLS];
    for ra in 0..DESCRIPTOR_CELLS {
        for ca in 0..DESCRIPTOR_CELLS {
            let ha = a.cell(ra, ca);
            for rb in 0..DESCRIPTOR_CELLS {
                for cb in 0..DESCRIPTOR_CELLS {
                    let hb = b.cell(rb, cb);
                    out[ra][ca][rb][cb] = (0..DESCRIPTOR_BINS).map(|k| ha[k] * hb[k]).sum();
                }
            }
        }
    }
    out
}

/// Per sub-patch, the score at each of the nine anchors, for the
/// descriptor on the `a` side of `dots`; `transpose` reads the table the
/// other way round.
fn window_scores(dots: &CellDots, transpose: bool) -> [[f64; ANCHORS]; SUB * SUB] {
    let dot = |ra: usize, ca: usize, rb: usize, cb: usize| {
        if transpose {
            dots[rb][cb][ra][ca]
        } else {
            dots[ra][ca][rb][cb]
        }
    };
    let mut window = [[0.0f64; ANCHORS]; SUB * SUB];
    for (p, scores) in window.iter_mut().enumerate() {
        let (i, j) = (p / SUB, p % SUB);
        for (a, score) in scores.iter_mut().enumerate() {
            let (ax, ay) = (a % POSITIONS, a / POSITIONS);
            let mut total = 0.0;
            for r in 0..SUB {
                for c in 0..SUB {
                    total += dot(SUB * i + r, SUB * j + c, ay + r, ax + c);
                }
            }
            *score = total;
        }
    }
    window
}

fn tuple_score(window: &[[f64; ANCHORS]; SUB * SUB], t: &[u8; 4]) -> f64 {
    window[0][t[0] as usize] + window[1][t[1] as usize] + window[2][t[2] as usize] + window[3][t[3] as usize]
}

fn direction_from_dots(dots: &CellDots, transpose: bool) -> f64 {
    let window = window_scores(dots, transpose);
    feasible_descriptor_placements()
        .iter()
        .map(|t| tuple_score(&window, t))
        .fold(0.0, f64::max)
}

/// Deformable score of `a`'s sub-patches placed into `b`.
pub fn deformable_direction_score(a: &SiftDescriptor, b: &SiftDescriptor) -> f64 {
    direction_from_dots(&cell_dots(a, b), false)
}

/// Forward plus backward deformable score. Meant for descriptors computed
/// without Gaussian weighting.
pub fn deformable_sift_similarity(a: &SiftDescriptor, b: &SiftDescriptor) -> f64 {
    let dots = cell_dots(a, b);
    direction_from_dots(&dots, false) + direction_from_dots(&dots, true)
}

/// Index of the largest value, ties to the lowest index.
fn argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    values
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, bv)) if v <= bv => best,
            _ => Some((i, v)),
        })
}

/// Mutual nearest neighbours under `mode`'s similarity. Degenerate
/// descriptors never match. Output is sorted by `index_a`.
pub fn match_descriptors(list_a: &[SiftFeature], list_b: &[SiftFeature], mode: MatchMode) -> Vec<Correspondence> {
    let valid_a: Vec<usize> = (0..list_a.len()).filter(|&i| !list_a[i].descriptor.is_degenerate()).collect();
    let valid_b: Vec<usize> = (0..list_b.len()).filter(|&i| !list_b[i].descriptor.is_degenerate()).collect();
    if valid_a.is_empty() || valid_b.is_empty() {
        return Vec::new();
    }
    let sims: Vec<Vec<f64>> = valid_a
        .par_iter()
        .map(|&i| {
            valid_b
                .iter()
                .map(|&j| mode.similarity(&list_a[i].descriptor, &list_b[j].descriptor))
                .collect()
        })
        .collect();
    let best_for_a: Vec<(usize, f64)> = sims
        .iter()
        .map(|row| argmax(row.iter().copied()).expect("non-empty"))
        .collect();
    let best_for_b: Vec<usize> = (0..valid_b.len())
        .map(|jb| argmax(sims.iter().map(|row| row[jb])).expect("non-empty").0)
        .collect();
    best_for_a
        .iter()
        .enumerate()
        .filter(|&(ia, &(jb, _))| best_for_b[jb] == ia)
        .map(|(ia, &(jb, s))| Correspondence {
            index_a: valid_a[ia],
            index_b: valid_b[jb],
            similarity: s,
        })
        .collect()
}
