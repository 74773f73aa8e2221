//! Deformable template matching on HOG cell grids.
//!
//! A source grid is split into `n x m` sub-patches. Each sub-patch is placed
//! independently in the target grid; a placement is admissible only if
//! every pair of neighbouring sub-patches (diagonals included) keeps the
//! strict up/down and left/right order of its source positions. The
//! direction score is the largest total of per-sub-patch sums of products
//! over admissible placements, and the match score adds both directions.
//!
//! Conventions: sub-patch `(i, j)` is row `i`, column `j`, both zero-based;
//! an anchor `(x, y)` is the target-grid cell holding the sub-patch's
//! top-left cell, `x` a column and `y` a row. Scores are similarities and
//! are maximized; the equivalent cost is the negated similarity.

use crate::features::{hog, FeatureGrid, HogParams};
use crate::imageio::resize_bilinear;
use crate::{Error, GrayImage, Result};

/// Default limit on the number of anchor tuples [`brute_force_dtm`] will
/// consider.
pub const DEFAULT_SEARCH_LIMIT: u128 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DtmConfig {
    /// Sub-patch rows.
    pub n: usize,
    /// Sub-patch columns.
    pub m: usize,
    pub canonical_w: usize,
    pub canonical_h: usize,
    pub cell_size: usize,
    pub bins: usize,
    pub max_sweeps: usize,
}

impl Default for DtmConfig {
    fn default() -> Self {
        DtmConfig {
            n: 2,
            m: 2,
            canonical_w: 128,
            canonical_h: 128,
            cell_size: 8,
            bins: 9,
            max_sweeps: 64,
        }
    }
}

impl DtmConfig {
    pub fn with_grid(n: usize, m: usize) -> Self {
        DtmConfig {
            n,
            m,
            ..DtmConfig::default()
        }
    }

    pub fn hog_params(&self) -> HogParams {
        HogParams {
            cell_size: self.cell_size,
            bins: self.bins,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidParameter(format!("sub-patch grid {}x{} is empty", self.n, self.m)));
        }
        if self.cell_size < 2 || self.bins < 2 {
            return Err(Error::InvalidParameter("cell size and bin count must be at least 2".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidParameter("sweep cap must be positive".into()));
        }
        if self.canonical_w == 0
            || self.canonical_h == 0
            || !self.canonical_w.is_multiple_of(self.cell_size)
            || !self.canonical_h.is_multiple_of(self.cell_size)
        {
            return Err(Error::InvalidParameter(format!(
                "canonical size {}x{} is not a positive multiple of the {} px cell",
                self.canonical_w, self.canonical_h, self.cell_size
            )));
        }
        let (cx, cy) = (self.canonical_w / self.cell_size, self.canonical_h / self.cell_size);
        if cy < self.n || cx < self.m {
            return Err(Error::GridTooSmall {
                cells_x: cx,
                cells_y: cy,
                n: self.n,
                m: self.m,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    pub x: usize,
    pub y: usize,
}

impl Anchor {
    pub fn new(x: usize, y: usize) -> Self {
        Anchor { x, y }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubPatch {
    pub row: usize,
    pub col: usize,
    /// Top-left cell in the source grid.
    pub origin: Anchor,
    pub features: FeatureGrid,
}

impl SubPatch {
    pub fn rows(&self) -> usize {
        self.features.cells_y()
    }

    pub fn cols(&self) -> usize {
        self.features.cells_x()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubPatchDecomposition {
    pub n: usize,
    pub m: usize,
    /// Row-major: patch `(i, j)` lives at `i * m + j`.
    pub patches: Vec<SubPatch>,
}

impl SubPatchDecomposition {
    pub fn patch(&self, i: usize, j: usize) -> &SubPatch {
        &self.patches[i * self.m + j]
    }

    /// Anchors reproducing the source layout, i.e. the rigid placement.
    pub fn origins(&self) -> Placement {
        Placement {
            n: self.n,
            m: self.m,
            anchors: self.patches.iter().map(|p| p.origin).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Placement {
    pub n: usize,
    pub m: usize,
    /// Row-major, like [`SubPatchDecomposition::patches`].
    pub anchors: Vec<Anchor>,
}

impl Placement {
    pub fn anchor(&self, i: usize, j: usize) -> Anchor {
        self.anchors[i * self.m + j]
    }
}

/// Outcome of matching one grid into another.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionResult {
    pub placement: Placement,
    pub similarity: f64,
    /// Sweeps run, including the final one that changed nothing.
    pub sweeps: usize,
    /// False when the sweep cap stopped the solver.
    pub converged: bool,
    /// Total similarity at initialization followed by the total after each sweep.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub similarity_forward: f64,
    pub similarity_backward: f64,
    pub similarity_total: f64,
    pub placement_forward: Placement,
    pub placement_backward: Placement,
    pub sweeps_forward: usize,
    pub sweeps_backward: usize,
    pub converged: bool,
}

fn split_bounds(len: usize, parts: usize) -> Vec<usize> {
    (0..=parts).map(|k| k * len / parts).collect()
}

/// Splits `grid` into `n x m` sub-grids with floor-spaced boundaries.
pub fn decompose(grid: &FeatureGrid, n: usize, m: usize) -> Result<SubPatchDecomposition> {
    if n == 0 || m == 0 || grid.cells_y() < n || grid.cells_x() < m {
        return Err(Error::GridTooSmall {
            cells_x: grid.cells_x(),
            cells_y: grid.cells_y(),
            n,
            m,
        });
    }
    let rows = split_bounds(grid.cells_y(), n);
    let cols = split_bounds(grid.cells_x(), m);
    let mut patches = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let features = grid.sub_grid(cols[j], rows[i], cols[j + 1] - cols[j], rows[i + 1] - rows[i])?;
            patches.push(SubPatch {
                row: i,
                col: j,
                origin: Anchor::new(cols[j], rows[i]),
                features,
            });
        }
    }
    Ok(SubPatchDecomposition { n, m, patches })
}

/// Floor-spaced anchors over the target grid, clamped so each window fits.
pub fn init_placement(target_cells_x: usize, target_cells_y: usize, decomp: &SubPatchDecomposition) -> Result<Placement> {
    let (n, m) = (decomp.n, decomp.m);
    let mut anchors = Vec::with_capacity(n * m);
    for p in &decomp.patches {
        if p.cols() > target_cells_x || p.rows() > target_cells_y {
            return Err(Error::InfeasibleInitialPlacement(format!(
                "sub-patch ({}, {}) of {}x{} cells exceeds the {}x{} target",
                p.row,
                p.col,
                p.cols(),
                p.rows(),
                target_cells_x,
                target_cells_y
            )));
        }
        let x = (p.col * target_cells_x / m).min(target_cells_x - p.cols());
        let y = (p.row * target_cells_y / n).min(target_cells_y - p.rows());
        anchors.push(Anchor::new(x, y));
    }
    let placement = Placement { n, m, anchors };
    if !is_feasible(&placement) {
        return Err(Error::InfeasibleInitialPlacement(format!(
            "clamped anchors violate the ordering constraint in a {target_cells_x}x{target_cells_y} target"
        )));
    }
    Ok(placement)
}

/// Whether two sub-patches at `a` (index `ij`) and `b` (index `kl`) keep
/// their strict relative order; the zero-penalty case of the deformation cost.
pub fn is_feasible_pair(a: Anchor, b: Anchor, ij: (usize, usize), kl: (usize, usize)) -> bool {
    let (i, j) = ij;
    let (k, l) = kl;
    let violated = (i > k && a.y <= b.y) || (i < k && a.y >= b.y) || (j > l && a.x <= b.x) || (j < l && a.x >= b.x);
    !violated
}

fn neighbours(i: usize, j: usize, n: usize, m: usize) -> impl Iterator<Item = (usize, usize)> {
    let rows = i.saturating_sub(1)..(i + 2).min(n);
    rows.flat_map(move |k| {
        let cols = j.saturating_sub(1)..(j + 2).min(m);
        cols.map(move |l| (k, l))
    })
    .filter(move |&(k, l)| (k, l) != (i, j))
}

/// Every unordered pair of 8-connected sub-patches satisfies the ordering.
pub fn is_feasible(placement: &Placement) -> bool {
    let (n, m) = (placement.n, placement.m);
    for i in 0..n {
        for j in 0..m {
            for (k, l) in neighbours(i, j, n, m) {
                // visit each unordered pair once
                if (k, l) < (i, j) {
                    continue;
                }
                if !is_feasible_pair(placement.anchor(i, j), placement.anchor(k, l), (i, j), (k, l)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Sum of products between `sub` and the equally sized window of `target`
/// at anchor `at`.
pub fn local_similarity(sub: &FeatureGrid, target: &FeatureGrid, at: Anchor) -> Result<f64> {
    sub.window_dot(target, at.x, at.y)
}

fn check_windows_fit(placement: &Placement, decomp: &SubPatchDecomposition, target: &FeatureGrid) -> bool {
    placement.anchors.iter().zip(&decomp.patches).all(|(a, p)| {
        a.x + p.cols() <= target.cells_x() && a.y + p.rows() <= target.cells_y()
    })
}

/// In-bounds placement check: every window lies inside `target`.
pub fn placement_in_bounds(placement: &Placement, source: &FeatureGrid, target: &FeatureGrid) -> Result<bool> {
    let decomp = decompose(source, placement.n, placement.m)?;
    Ok(check_windows_fit(placement, &decomp, target))
}

/// Local similarity of every in-bounds anchor, per sub-patch.
struct ScoreTable {
    /// Per sub-patch: (anchor columns, anchor rows, row-major scores).
    tables: Vec<(usize, usize, Vec<f64>)>,
}

impl ScoreTable {
    fn build(decomp: &SubPatchDecomposition, target: &FeatureGrid) -> Result<Self> {
        let mut tables = Vec::with_capacity(decomp.patches.len());
        for p in &decomp.patches {
            if p.features.bins() != target.bins() {
                return Err(Error::InvalidParameter(format!(
                    "bin counts differ: {} vs {}",
                    p.features.bins(),
                    target.bins()
                )));
            }
            if p.cols() > target.cells_x() || p.rows() > target.cells_y() {
                return Err(Error::InfeasibleInitialPlacement(format!(
                    "sub-patch ({}, {}) does not fit the {}x{} target",
                    p.row,
                    p.col,
                    target.cells_x(),
                    target.cells_y()
                )));
            }
            let ax = target.cells_x() - p.cols() + 1;
            let ay = target.cells_y() - p.rows() + 1;
            let mut scores = Vec::with_capacity(ax * ay);
            for y in 0..ay {
                for x in 0..ax {
                    scores.push(local_similarity(&p.features, target, Anchor::new(x, y))?);
                }
            }
            tables.push((ax, ay, scores));
        }
        Ok(ScoreTable { tables })
    }

    #[inline]
    fn score(&self, patch: usize, a: Anchor) -> f64 {
        let (ax, _, ref s) = self.tables[patch];
        s[a.y * ax + a.x]
    }

    /// Sum of local similarities in row-major sub-patch order.
    fn total(&self, placement: &Placement) -> f64 {
        placement
            .anchors
            .iter()
            .enumerate()
            .fold(0.0, |acc, (p, &a)| acc + self.score(p, a))
    }
}

fn feasible_against_neighbours(placement: &Placement, i: usize, j: usize, candidate: Anchor) -> bool {
    neighbours(i, j, placement.n, placement.m)
        .all(|(k, l)| is_feasible_pair(candidate, placement.anchor(k, l), (i, j), (k, l)))
}

/// Coordinate-descent matching of `source` into `target`.
///
/// Sweeps visit sub-patches in row-major order. Sweep `s` (starting at 1)
/// lets each sub-patch move within `s` cells of its current anchor along
/// both axes, to any in-bounds anchor that keeps the ordering with the
/// current neighbour anchors. A move needs a strictly higher local
/// similarity; ties go to the smallest `(y, x)`. The loop stops after a
/// sweep that moves nothing, or at `config.max_sweeps`.
pub fn dtm_direction(source: &FeatureGrid, target: &FeatureGrid, config: &DtmConfig) -> Result<DirectionResult> {
    let decomp = decompose(source, config.n, config.m)?;
    let table = ScoreTable::build(&decomp, target)?;
    let mut placement = init_placement(target.cells_x(), target.cells_y(), &decomp)?;
    let mut trace = vec![table.total(&placement)];
    let mut sweeps = 0;
    let mut converged = false;
    let mut radius = 1usize;

    while sweeps < config.max_sweeps.max(1) {
        sweeps += 1;
        let mut moved = false;
        for i in 0..config.n {
            for j in 0..config.m {
                let p = i * config.m + j;
                let (ax, ay, _) = table.tables[p];
                let current = placement.anchors[p];
                let mut best = current;
                let mut best_score = table.score(p, current);
                let y_lo = current.y.saturating_sub(radius);
                let y_hi = (current.y + radius).min(ay - 1);
                let x_lo = current.x.saturating_sub(radius);
                let x_hi = (current.x + radius).min(ax - 1);
                for y in y_lo..=y_hi {
                    for x in x_lo..=x_hi {
                        let cand = Anchor::new(x, y);
                        let score = table.score(p, cand);
                        if score > best_score && feasible_against_neighbours(&placement, i, j, cand) {
                            best = cand;
                            best_score = score;
                        }
                    }
                }
                if best != current {
                    placement.anchors[p] = best;
                    moved = true;
                }
            }
        }
        trace.push(table.total(&placement));
        if !moved {
            converged = true;
            break;
        }
        radius += 1;
    }

    let similarity = table.total(&placement);
    Ok(DirectionResult {
        placement,
        similarity,
        sweeps,
        converged,
        trace,
    })
}

/// Exhaustive search over all in-bounds anchor tuples, keeping only
/// admissible ones. Returns the first optimum met in lexicographic tuple
/// order (row-major sub-patches, each anchor in `(y, x)` order).
pub fn brute_force_dtm(source: &FeatureGrid, target: &FeatureGrid, config: &DtmConfig, limit: u128) -> Result<(Placement, f64)> {
    let decomp = decompose(source, config.n, config.m)?;
    let table = ScoreTable::build(&decomp, target)?;
    let size = table
        .tables
        .iter()
        .fold(1u128, |acc, (ax, ay, _)| acc.saturating_mul((*ax * *ay) as u128));
    if size > limit {
        return Err(Error::SearchSpaceTooLarge { size, limit });
    }

    struct Search<'a> {
        table: &'a ScoreTable,
        n: usize,
        m: usize,
        current: Vec<Anchor>,
        best: Option<(Vec<Anchor>, f64)>,
    }

    impl Search<'_> {
        fn go(&mut self, p: usize, partial: f64) {
            if p == self.n * self.m {
                if self.best.as_ref().is_none_or(|(_, s)| partial > *s) {
                    self.best = Some((self.current.clone(), partial));
                }
                return;
            }
            let (i, j) = (p / self.m, p % self.m);
            let (ax, ay, _) = self.table.tables[p];
            for y in 0..ay {
                for x in 0..ax {
                    let cand = Anchor::new(x, y);
                    // neighbours earlier in row-major order are already placed
                    let ok = neighbours(i, j, self.n, self.m)
                        .filter(|&(k, l)| k * self.m + l < p)
                        .all(|(k, l)| is_feasible_pair(cand, self.current[k * self.m + l], (i, j), (k, l)));
                    if !ok {
                        continue;
                    }
                    self.current.push(cand);
                    let score = partial + self.table.score(p, cand);
                    self.go(p + 1, score);
                    self.current.pop();
                }
            }
        }
    }

    let mut search = Search {
        table: &table,
        n: config.n,
        m: config.m,
        current: Vec::with_capacity(config.n * config.m),
        best: None,
    };
    search.go(0, 0.0);
    let (anchors, _) = search
        .best
        .ok_or_else(|| Error::InfeasibleInitialPlacement("no admissible placement exists".into()))?;
    let placement = Placement {
        n: config.n,
        m: config.m,
        anchors,
    };
    debug_assert!(is_feasible(&placement));
    let similarity = table.total(&placement);
    Ok((placement, similarity))
}

/// Total similarity of `placement` for `source` matched into `target`.
pub fn placement_similarity(source: &FeatureGrid, target: &FeatureGrid, placement: &Placement) -> Result<f64> {
    let decomp = decompose(source, placement.n, placement.m)?;
    let mut total = 0.0;
    for (p, a) in decomp.patches.iter().zip(&placement.anchors) {
        total += local_similarity(&p.features, target, *a)?;
    }
    Ok(total)
}

/// HOG grid of `img` resized to the canonical size.
pub fn canonical_features(img: &GrayImage, config: &DtmConfig) -> Result<FeatureGrid> {
    config.validate()?;
    let resized = resize_bilinear(img, config.canonical_w, config.canonical_h)?;
    hog(&resized, config.hog_params())
}

/// Bidirectional match of two feature grids.
pub fn match_grids(a: &FeatureGrid, b: &FeatureGrid, config: &DtmConfig) -> Result<MatchResult> {
    let forward = dtm_direction(a, b, config)?;
    let backward = dtm_direction(b, a, config)?;
    Ok(MatchResult {
        similarity_forward: forward.similarity,
        similarity_backward: backward.similarity,
        similarity_total: forward.similarity + backward.similarity,
        placement_forward: forward.placement,
        placement_backward: backward.placement,
        sweeps_forward: forward.sweeps,
        sweeps_backward: backward.sweeps,
        converged: forward.converged && backward.converged,
    })
}

/// Bidirectional DTM score of two images at canonical resolution.
pub fn total_score(img1: &GrayImage, img2: &GrayImage, config: &DtmConfig) -> Result<MatchResult> {
    let a = canonical_features(img1, config)?;
    let b = canonical_features(img2, config)?;
    match_grids(&a, &b, config)
}
