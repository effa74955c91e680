//! One level of the partial box decomposition: maximal packing by N x N
//! squares, neighbor arms, crosses with exit points, decorations, and
//! cross-sectors.
//!
//! All coordinates are unit-grid integers except axes, centers, exits and
//! sector polygons, which live on the half-integer lattice (doubled ints).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    self, closed_rect_intersection2, locate_in_wedges, P2, P4, Rect, Seg2, WedgePos,
};
use crate::tiling::{occurrences, TilingWindow};

/// An N x N square plaque with footprint `[x, x+N) x [y, y+N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquarePlacement {
    pub anchor: (i32, i32),
    pub side: u32,
}

impl SquarePlacement {
    pub fn rect(&self) -> Rect {
        Rect::new(
            self.anchor.0,
            self.anchor.1,
            self.anchor.0 + self.side as i32,
            self.anchor.1 + self.side as i32,
        )
    }
}

/// Direction along which an arm connects its two squares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Squares face each other along x; the axis is a vertical segment.
    Horizontal,
    /// Squares face each other along y; the axis is a horizontal segment.
    Vertical,
}

/// The gap between a square edge and its nearest neighbor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arm {
    /// Square the arm was discovered from, square it leads to.
    pub between: (usize, usize),
    /// Gap rectangle; zero width (or height) when the squares touch.
    pub rect: Rect,
    /// Parallel and equidistant to the two facing edges; doubled coordinates.
    pub axis: Seg2,
    pub orientation: Orientation,
    pub degenerate: bool,
    pub trusted: bool,
}

impl Arm {
    /// Extent along the connecting direction (the gap width).
    pub fn width(&self) -> i32 {
        match self.orientation {
            Orientation::Horizontal => self.rect.x1 - self.rect.x0,
            Orientation::Vertical => self.rect.y1 - self.rect.y0,
        }
    }

    /// Extent along the facing edges.
    pub fn length(&self) -> i32 {
        match self.orientation {
            Orientation::Horizontal => self.rect.y1 - self.rect.y0,
            Orientation::Vertical => self.rect.x1 - self.rect.x0,
        }
    }

    /// Closed bounding corners, doubled.
    pub fn closure2(&self) -> (P2, P2) {
        (
            P2::from_int(self.rect.x0, self.rect.y0),
            P2::from_int(self.rect.x1, self.rect.y1),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExitSign {
    Positive,
    Negative,
}

/// An exit point of a cross: the middle point of the intersection of an arm
/// with the cross, signed by which end of the arm's axis it sits at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitPoint {
    pub point: P2,
    pub sign: ExitSign,
    pub arm: usize,
    pub multiplicity: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossKind {
    Regular4,
    Regular3,
    DegenerateSegment,
    DegeneratePoint,
}

/// A bounded connected component of the complement of squares and arms,
/// or its degenerate (segment / point) analogue.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cross {
    /// For regular kinds: the component rectangle (half-open, nonempty).
    /// For the segment kind: a zero-width or zero-height rect tracing the
    /// segment. For the point kind: a zero-area rect at the point.
    pub rect: Rect,
    /// Center of mass, doubled.
    pub center: P2,
    pub exits: Vec<ExitPoint>,
    pub kind: CrossKind,
    pub trusted: bool,
}

impl Cross {
    pub fn total_exit_multiplicity(&self) -> u32 {
        self.exits.iter().map(|e| e.multiplicity).sum()
    }

    pub fn closure2(&self) -> (P2, P2) {
        (
            P2::from_int(self.rect.x0, self.rect.y0),
            P2::from_int(self.rect.x1, self.rect.y1),
        )
    }
}

/// A region of a cross cut out by its decoration, snapped to unit cells by
/// the right/upward rule.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossSector {
    pub cross: usize,
    /// Square whose inflated tile absorbs this sector; None for zero-area
    /// sectors of degenerate crosses.
    pub owner_square: Option<usize>,
    /// Counterclockwise region polygon, doubled coordinates. Degenerate
    /// sectors store their half-segment as a two-point polyline.
    pub polygon: Vec<P2>,
    /// Unit cells assigned to this sector (absolute coordinates).
    pub cells: Vec<(i32, i32)>,
}

/// Placement rule for the maximal packing.
#[derive(Clone, Copy, Debug)]
pub enum PlacementRule<'a> {
    /// Row-major first fit over every anchor.
    GreedyLex,
    /// Anchors at occurrences of the marker patch first, then greedy
    /// completion.
    PatternAnchored { marker: &'a TilingWindow },
}

/// One level of the partial box decomposition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartialDecomposition {
    pub n: u32,
    /// Width of the exclusion band near the window edge.
    pub margin: u32,
    /// Region that was packed (the window bounds at level one).
    pub bounds: Rect,
    pub squares: Vec<SquarePlacement>,
    pub square_trusted: Vec<bool>,
    pub arms: Vec<Arm>,
    pub crosses: Vec<Cross>,
    pub sectors: Vec<CrossSector>,
    /// Complement components touching the window edge; they are reported but
    /// carry no cross structure.
    pub censored_components: usize,
}

impl PartialDecomposition {
    pub fn trusted_rect(&self) -> Rect {
        self.bounds.shrink(self.margin as i32)
    }
}

// ---------------------------------------------------------------------------
// Placement
// ---------------------------------------------------------------------------

/// Maximal disjoint packing of N x N squares into the window bounds.
pub fn place_maximal_squares(
    window: &TilingWindow,
    n: u32,
    rule: PlacementRule<'_>,
) -> Result<Vec<SquarePlacement>> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "square side must be >= 2, got {n}"
        )));
    }
    let b = window.bounds();
    if (b.width() as u32) < n || (b.height() as u32) < n {
        return Err(Error::WindowTooSmall {
            width: b.width() as u32,
            height: b.height() as u32,
            n,
        });
    }
    match rule {
        PlacementRule::GreedyLex => Ok(greedy_lex(b, n)),
        PlacementRule::PatternAnchored { marker } => {
            let occs = occurrences(window, marker);
            let mut occupancy = Occupancy::new(b, n);
            let mut squares = Vec::new();
            for occ in occs {
                let (x, y) = occ.position;
                if x + n as i32 <= b.x1 && y + n as i32 <= b.y1 {
                    occupancy.try_place(x, y, &mut squares);
                }
            }
            // Greedy completion over every remaining anchor.
            let mut y = b.y0;
            while y + n as i32 <= b.y1 {
                let mut x = b.x0;
                while x + n as i32 <= b.x1 {
                    match occupancy.first_blocker(x, y) {
                        None => {
                            occupancy.try_place(x, y, &mut squares);
                            x += n as i32;
                        }
                        // All anchors up to the blocking cell stay blocked.
                        Some((bx, _)) => x = bx + 1,
                    }
                }
                y += 1;
            }
            squares.sort_by_key(|s| (s.anchor.1, s.anchor.0));
            Ok(squares)
        }
    }
}

/// Row-major first-fit packing using a per-column coverage horizon: scanning
/// anchors bottom-up, a candidate is free iff no earlier square covers any of
/// its columns at this height.
fn greedy_lex(b: Rect, n: u32) -> Vec<SquarePlacement> {
    let n = n as i32;
    let w = b.width() as usize;
    let mut covered_until = vec![b.y0; w];
    let mut squares = Vec::new();
    let mut y = b.y0;
    while y + n <= b.y1 {
        let mut x = b.x0;
        'row: while x + n <= b.x1 {
            let c0 = (x - b.x0) as usize;
            for c in c0..c0 + n as usize {
                if covered_until[c] > y {
                    x = b.x0 + c as i32 + 1;
                    continue 'row;
                }
            }
            squares.push(SquarePlacement {
                anchor: (x, y),
                side: n as u32,
            });
            for c in c0..c0 + n as usize {
                covered_until[c] = y + n;
            }
            x += n;
        }
        y += 1;
    }
    squares
}

/// Cellwise occupancy used by the pattern-anchored rule.
struct Occupancy {
    b: Rect,
    n: i32,
    cells: Vec<bool>,
}

impl Occupancy {
    fn new(b: Rect, n: u32) -> Self {
        Occupancy {
            b,
            n: n as i32,
            cells: vec![false; (b.width() as usize) * (b.height() as usize)],
        }
    }

    fn idx(&self, x: i32, y: i32) -> usize {
        (y - self.b.y0) as usize * self.b.width() as usize + (x - self.b.x0) as usize
    }

    /// First occupied cell inside the candidate footprint, scanning rows
    /// bottom-up.
    fn first_blocker(&self, x: i32, y: i32) -> Option<(i32, i32)> {
        for cy in y..y + self.n {
            for cx in x..x + self.n {
                if self.cells[self.idx(cx, cy)] {
                    return Some((cx, cy));
                }
            }
        }
        None
    }

    fn try_place(&mut self, x: i32, y: i32, squares: &mut Vec<SquarePlacement>) -> bool {
        if self.first_blocker(x, y).is_some() {
            return false;
        }
        for cy in y..y + self.n {
            for cx in x..x + self.n {
                let i = self.idx(cx, cy);
                self.cells[i] = true;
            }
        }
        squares.push(SquarePlacement {
            anchor: (x, y),
            side: self.n as u32,
        });
        true
    }
}

/// Brute-force maximality check: first anchor of an empty N x N square whose
/// footprint lies inside `region`, or None if the packing is maximal there.
pub fn validate_maximality(
    region: Rect,
    n: u32,
    squares: &[SquarePlacement],
) -> Option<(i32, i32)> {
    if region.is_empty() || (region.width() as u32) < n || (region.height() as u32) < n {
        return None;
    }
    let n = n as i32;
    let w = region.width() as usize;
    let h = region.height() as usize;
    let mut occ = vec![0u8; w * h];
    for s in squares {
        let r = s.rect().intersect(&region);
        if r.is_empty() {
            continue;
        }
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                occ[(y - region.y0) as usize * w + (x - region.x0) as usize] = 1;
            }
        }
    }
    let mut pref = vec![0u64; (w + 1) * (h + 1)];
    for y in 0..h {
        for x in 0..w {
            pref[(y + 1) * (w + 1) + (x + 1)] = pref[y * (w + 1) + (x + 1)]
                + pref[(y + 1) * (w + 1) + x]
                - pref[y * (w + 1) + x]
                + occ[y * w + x] as u64;
        }
    }
    let sum = |x0: usize, y0: usize, x1: usize, y1: usize| -> u64 {
        pref[y1 * (w + 1) + x1] + pref[y0 * (w + 1) + x0]
            - pref[y0 * (w + 1) + x1]
            - pref[y1 * (w + 1) + x0]
    };
    for y in region.y0..=region.y1 - n {
        for x in region.x0..=region.x1 - n {
            let (rx, ry) = ((x - region.x0) as usize, (y - region.y0) as usize);
            if sum(rx, ry, rx + n as usize, ry + n as usize) == 0 {
                return Some((x, y));
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Arms
// ---------------------------------------------------------------------------

/// Per-row and per-column indexes of square spans, for neighbor search.
struct SquareIndex {
    b: Rect,
    /// For each row, (x0, square) sorted by x0.
    rows: Vec<Vec<(i32, usize)>>,
    /// For each column, (y0, square) sorted by y0.
    cols: Vec<Vec<(i32, usize)>>,
}

impl SquareIndex {
    fn build(b: Rect, squares: &[SquarePlacement]) -> Self {
        let mut rows = vec![Vec::new(); b.height() as usize];
        let mut cols = vec![Vec::new(); b.width() as usize];
        for (i, s) in squares.iter().enumerate() {
            let r = s.rect();
            for y in r.y0..r.y1 {
                rows[(y - b.y0) as usize].push((r.x0, i));
            }
            for x in r.x0..r.x1 {
                cols[(x - b.x0) as usize].push((r.y0, i));
            }
        }
        for row in &mut rows {
            row.sort_unstable();
        }
        for col in &mut cols {
            col.sort_unstable();
        }
        SquareIndex { b, rows, cols }
    }

    fn right_of(&self, xe: i32, y: i32) -> Option<(i32, usize)> {
        let row = &self.rows[(y - self.b.y0) as usize];
        let i = row.partition_point(|&(x0, _)| x0 < xe);
        row.get(i).map(|&(x0, s)| (x0 - xe, s))
    }

    fn left_of(&self, xl: i32, y: i32, n: i32) -> Option<(i32, usize)> {
        let row = &self.rows[(y - self.b.y0) as usize];
        let i = row.partition_point(|&(x0, _)| x0 <= xl - n);
        i.checked_sub(1)
            .and_then(|i| row.get(i))
            .map(|&(x0, s)| (xl - (x0 + n), s))
    }

    fn above(&self, ye: i32, x: i32) -> Option<(i32, usize)> {
        let col = &self.cols[(x - self.b.x0) as usize];
        let i = col.partition_point(|&(y0, _)| y0 < ye);
        col.get(i).map(|&(y0, s)| (y0 - ye, s))
    }

    fn below(&self, yl: i32, x: i32, n: i32) -> Option<(i32, usize)> {
        let col = &self.cols[(x - self.b.x0) as usize];
        let i = col.partition_point(|&(y0, _)| y0 <= yl - n);
        i.checked_sub(1)
            .and_then(|i| col.get(i))
            .map(|&(y0, s)| (yl - (y0 + n), s))
    }
}

/// Collect minimal-gap neighbors across one edge: returns (gap, squares).
fn edge_minimizers(
    mut scan: impl FnMut(i32) -> Option<(i32, usize)>,
    lo: i32,
    hi: i32,
) -> Option<(i32, Vec<usize>)> {
    let mut best: Option<i32> = None;
    let mut mins: Vec<usize> = Vec::new();
    for t in lo..hi {
        if let Some((gap, q)) = scan(t) {
            match best {
                Some(b) if gap > b => {}
                Some(b) if gap == b => {
                    if !mins.contains(&q) {
                        mins.push(q);
                    }
                }
                _ => {
                    best = Some(gap);
                    mins.clear();
                    mins.push(q);
                }
            }
        }
    }
    best.map(|g| (g, mins))
}

/// Compute one arm for every (edge, minimal neighbor) pair and deduplicate
/// mutual discoveries. Ties (several squares at the same minimal distance
/// from one edge) each produce an arm over their own overlap span, which is
/// exactly the shared-boundary configuration of degenerate crosses.
pub fn neighbors_and_arms(bounds: Rect, trusted: Rect, squares: &[SquarePlacement]) -> Vec<Arm> {
    let index = SquareIndex::build(bounds, squares);
    let n = squares.first().map(|s| s.side as i32).unwrap_or(0);
    let mut seen: BTreeSet<(usize, usize, Rect)> = BTreeSet::new();
    let mut arms: Vec<Arm> = Vec::new();

    let mut push_arm = |from: usize,
                        to: usize,
                        rect: Rect,
                        axis: Seg2,
                        orientation: Orientation,
                        arms: &mut Vec<Arm>| {
        let key = (from.min(to), from.max(to), rect);
        if !seen.insert(key) {
            return;
        }
        let degenerate = match orientation {
            Orientation::Horizontal => rect.x0 == rect.x1,
            Orientation::Vertical => rect.y0 == rect.y1,
        };
        arms.push(Arm {
            between: (from, to),
            rect,
            axis,
            orientation,
            degenerate,
            trusted: trusted.closure_contains(&rect),
        });
    };

    for (i, s) in squares.iter().enumerate() {
        let r = s.rect();
        // Right edge.
        if let Some((gap, mins)) = edge_minimizers(|y| index.right_of(r.x1, y), r.y0, r.y1) {
            for q in mins {
                let qr = squares[q].rect();
                let (y0, y1) = (r.y0.max(qr.y0), r.y1.min(qr.y1));
                let rect = Rect::new(r.x1, y0, r.x1 + gap, y1);
                let ax2 = 2 * r.x1 as i64 + gap as i64;
                let axis = Seg2::new(P2::new(ax2, 2 * y0 as i64), P2::new(ax2, 2 * y1 as i64));
                push_arm(i, q, rect, axis, Orientation::Horizontal, &mut arms);
            }
        }
        // Left edge.
        if let Some((gap, mins)) = edge_minimizers(|y| index.left_of(r.x0, y, n), r.y0, r.y1) {
            for q in mins {
                let qr = squares[q].rect();
                let (y0, y1) = (r.y0.max(qr.y0), r.y1.min(qr.y1));
                let rect = Rect::new(r.x0 - gap, y0, r.x0, y1);
                let ax2 = 2 * r.x0 as i64 - gap as i64;
                let axis = Seg2::new(P2::new(ax2, 2 * y0 as i64), P2::new(ax2, 2 * y1 as i64));
                push_arm(i, q, rect, axis, Orientation::Horizontal, &mut arms);
            }
        }
        // Top edge.
        if let Some((gap, mins)) = edge_minimizers(|x| index.above(r.y1, x), r.x0, r.x1) {
            for q in mins {
                let qr = squares[q].rect();
                let (x0, x1) = (r.x0.max(qr.x0), r.x1.min(qr.x1));
                let rect = Rect::new(x0, r.y1, x1, r.y1 + gap);
                let ay2 = 2 * r.y1 as i64 + gap as i64;
                let axis = Seg2::new(P2::new(2 * x0 as i64, ay2), P2::new(2 * x1 as i64, ay2));
                push_arm(i, q, rect, axis, Orientation::Vertical, &mut arms);
            }
        }
        // Bottom edge.
        if let Some((gap, mins)) = edge_minimizers(|x| index.below(r.y0, x, n), r.x0, r.x1) {
            for q in mins {
                let qr = squares[q].rect();
                let (x0, x1) = (r.x0.max(qr.x0), r.x1.min(qr.x1));
                let rect = Rect::new(x0, r.y0 - gap, x1, r.y0);
                let ay2 = 2 * r.y0 as i64 - gap as i64;
                let axis = Seg2::new(P2::new(2 * x0 as i64, ay2), P2::new(2 * x1 as i64, ay2));
                push_arm(i, q, rect, axis, Orientation::Vertical, &mut arms);
            }
        }
    }

    arms.sort_by_key(|a| (a.rect.y0, a.rect.x0, a.rect.y1, a.rect.x1));
    arms
}

// ---------------------------------------------------------------------------
// Feature raster and spatial buckets
// ---------------------------------------------------------------------------

/// Raster over the decomposition bounds: what covers each cell.
#[derive(Clone)]
pub struct FeatureRaster {
    pub b: Rect,
    /// 0 = uncovered; 1..=S squares; S+1.. arms (offset by square count).
    cells: Vec<u32>,
    square_count: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Feature {
    None,
    Square(usize),
    Arm(usize),
}

impl FeatureRaster {
    pub fn build(b: Rect, squares: &[SquarePlacement], arms: &[Arm]) -> Result<Self> {
        let mut cells = vec![0u32; (b.width() as usize) * (b.height() as usize)];
        let w = b.width() as usize;
        let idx = |x: i32, y: i32| (y - b.y0) as usize * w + (x - b.x0) as usize;
        for (i, s) in squares.iter().enumerate() {
            for (x, y) in s.rect().cells() {
                let c = &mut cells[idx(x, y)];
                if *c != 0 {
                    return Err(Error::FeatureOverlap { x, y });
                }
                *c = i as u32 + 1;
            }
        }
        for (i, a) in arms.iter().enumerate() {
            for (x, y) in a.rect.cells() {
                let c = &mut cells[idx(x, y)];
                if *c != 0 {
                    return Err(Error::FeatureOverlap { x, y });
                }
                *c = (squares.len() + i) as u32 + 1;
            }
        }
        Ok(FeatureRaster {
            b,
            cells,
            square_count: squares.len(),
        })
    }

    pub fn at(&self, x: i32, y: i32) -> Feature {
        if !self.b.contains_cell(x, y) {
            return Feature::None;
        }
        let v = self.cells[(y - self.b.y0) as usize * self.b.width() as usize
            + (x - self.b.x0) as usize];
        if v == 0 {
            Feature::None
        } else if (v as usize) <= self.square_count {
            Feature::Square(v as usize - 1)
        } else {
            Feature::Arm(v as usize - 1 - self.square_count)
        }
    }
}

/// Spatial hash of arm closures for locality queries.
struct ArmBuckets {
    size: i32,
    map: BTreeMap<(i32, i32), Vec<usize>>,
}

impl ArmBuckets {
    fn build(arms: &[Arm], n: u32) -> Self {
        let size = (2 * n.max(1)) as i32;
        let mut map: BTreeMap<(i32, i32), Vec<usize>> = BTreeMap::new();
        for (i, a) in arms.iter().enumerate() {
            for key in Self::keys(size, a.rect) {
                map.entry(key).or_default().push(i);
            }
        }
        ArmBuckets { size, map }
    }

    fn keys(size: i32, r: Rect) -> Vec<(i32, i32)> {
        let bx0 = r.x0.div_euclid(size);
        let bx1 = r.x1.div_euclid(size);
        let by0 = r.y0.div_euclid(size);
        let by1 = r.y1.div_euclid(size);
        let mut keys = Vec::new();
        for by in by0..=by1 {
            for bx in bx0..=bx1 {
                keys.push((bx, by));
            }
        }
        keys
    }

    /// Arm indices whose closure might intersect the closed rect, sorted and
    /// deduplicated.
    fn near(&self, r: Rect) -> Vec<usize> {
        let mut out = Vec::new();
        for key in Self::keys(self.size, r) {
            if let Some(v) = self.map.get(&key) {
                out.extend_from_slice(v);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

// ---------------------------------------------------------------------------
// Crosses
// ---------------------------------------------------------------------------

/// Detect all crosses: rectangular complement components plus the degenerate
/// segment and point crosses of touching configurations.
pub fn crosses_and_exits(
    bounds: Rect,
    trusted: Rect,
    squares: &[SquarePlacement],
    arms: &[Arm],
    raster: &FeatureRaster,
) -> Result<(Vec<Cross>, usize)> {
    let n = squares.first().map(|s| s.side).unwrap_or(1);
    let buckets = ArmBuckets::build(arms, n);
    let mut crosses = Vec::new();
    let mut censored = 0usize;

    // --- Regular crosses: components of uncovered cells. ---
    let w = bounds.width() as usize;
    let h = bounds.height() as usize;
    let mut visited = vec![false; w * h];
    let idx = |x: i32, y: i32| (y - bounds.y0) as usize * w + (x - bounds.x0) as usize;
    for y in bounds.y0..bounds.y1 {
        for x in bounds.x0..bounds.x1 {
            if visited[idx(x, y)] || raster.at(x, y) != Feature::None {
                continue;
            }
            let mut stack = vec![(x, y)];
            visited[idx(x, y)] = true;
            let mut count = 0i64;
            let (mut bx0, mut by0, mut bx1, mut by1) = (x, y, x + 1, y + 1);
            let mut touches_edge = false;
            while let Some((cx, cy)) = stack.pop() {
                count += 1;
                bx0 = bx0.min(cx);
                by0 = by0.min(cy);
                bx1 = bx1.max(cx + 1);
                by1 = by1.max(cy + 1);
                if cx == bounds.x0 || cx + 1 == bounds.x1 || cy == bounds.y0 || cy + 1 == bounds.y1
                {
                    touches_edge = true;
                }
                for (nx, ny) in [(cx - 1, cy), (cx + 1, cy), (cx, cy - 1), (cx, cy + 1)] {
                    if bounds.contains_cell(nx, ny)
                        && !visited[idx(nx, ny)]
                        && raster.at(nx, ny) == Feature::None
                    {
                        visited[idx(nx, ny)] = true;
                        stack.push((nx, ny));
                    }
                }
            }
            if touches_edge {
                censored += 1;
                continue;
            }
            let rect = Rect::new(bx0, by0, bx1, by1);
            let is_trusted = trusted.closure_contains(&rect);
            if rect.area() != count {
                if is_trusted {
                    return Err(Error::NonRectangularComponent { x: bx0, y: by0 });
                }
                censored += 1;
                continue;
            }
            let exits = regular_cross_exits(rect, arms, &buckets, is_trusted)?;
            let kind = match exits.len() {
                4 => CrossKind::Regular4,
                _ => CrossKind::Regular3,
            };
            crosses.push(Cross {
                rect,
                center: rect.center2(),
                exits,
                kind,
                trusted: is_trusted,
            });
        }
    }

    // --- Degenerate segment crosses: a full open side shared by two
    // parallel arms, away from square closures. The middle point then lies
    // on both axes; partially shared sides (staircase bends between arms of
    // different gap spans) are corridor joints, not crosses. ---
    let mut seg_seen: BTreeSet<(P2, P2)> = BTreeSet::new();
    let mut seg_list: Vec<Seg2> = Vec::new();
    for i in 0..arms.len() {
        for j in buckets.near(arms[i].rect) {
            if j <= i || arms[i].orientation != arms[j].orientation {
                continue;
            }
            let span_match = match arms[i].orientation {
                Orientation::Vertical => {
                    arms[i].rect.y0 == arms[j].rect.y0 && arms[i].rect.y1 == arms[j].rect.y1
                }
                Orientation::Horizontal => {
                    arms[i].rect.x0 == arms[j].rect.x0 && arms[i].rect.x1 == arms[j].rect.x1
                }
            };
            if !span_match {
                continue;
            }
            let inter = match closed_rect_intersection2(arms[i].closure2(), arms[j].closure2()) {
                Some(v) => v,
                None => continue,
            };
            let (p0, p1) = inter;
            if p0 == p1 || (p0.x != p1.x && p0.y != p1.y) {
                continue;
            }
            for run in trim_segment_outside_squares(p0, p1, raster) {
                if seg_seen.insert(run) {
                    seg_list.push(Seg2::new(run.0, run.1));
                }
            }
        }
    }
    // Segment lookup for the point-cross pass, keyed by supporting line.
    let mut seg_by_line: BTreeMap<(bool, i64), Vec<(i64, i64)>> = BTreeMap::new();
    for seg in &seg_list {
        let vertical = seg.a.x == seg.b.x;
        let key = (vertical, if vertical { seg.a.x } else { seg.a.y });
        let range = if vertical {
            (seg.a.y.min(seg.b.y), seg.a.y.max(seg.b.y))
        } else {
            (seg.a.x.min(seg.b.x), seg.a.x.max(seg.b.x))
        };
        seg_by_line.entry(key).or_default().push(range);
    }
    for seg in seg_list {
        let rect = Rect::new(
            (seg.a.x / 2) as i32,
            (seg.a.y / 2) as i32,
            (seg.b.x / 2) as i32,
            (seg.b.y / 2) as i32,
        );
        let exits = segment_cross_exits(seg, arms, &buckets);
        crosses.push(Cross {
            rect,
            center: seg.midpoint(),
            exits,
            kind: CrossKind::DegenerateSegment,
            trusted: trusted.closure_contains(&rect),
        });
    }

    // --- Degenerate point crosses: points where >= 3 arm axes end. ---
    let mut endpoint_arms: BTreeMap<P2, Vec<usize>> = BTreeMap::new();
    for (i, a) in arms.iter().enumerate() {
        for p in [a.axis.a, a.axis.b] {
            if p.x % 2 == 0 && p.y % 2 == 0 {
                endpoint_arms.entry(p).or_default().push(i);
            }
        }
    }
    for (p, arm_ids) in endpoint_arms {
        if arm_ids.len() < 3 {
            continue;
        }
        let on_segment = seg_by_line
            .get(&(true, p.x))
            .is_some_and(|rs| rs.iter().any(|&(a, b)| p.y >= a && p.y <= b))
            || seg_by_line
                .get(&(false, p.y))
                .is_some_and(|rs| rs.iter().any(|&(a, b)| p.x >= a && p.x <= b));
        if on_segment {
            continue;
        }
        let mut exits = Vec::new();
        for &ai in &arm_ids {
            exits.push(ExitPoint {
                point: p,
                sign: exit_sign_at(&arms[ai], p),
                arm: ai,
                multiplicity: 1,
            });
        }
        let (cx, cy) = ((p.x / 2) as i32, (p.y / 2) as i32);
        let rect = Rect::new(cx, cy, cx, cy);
        crosses.push(Cross {
            rect,
            center: p,
            exits,
            kind: CrossKind::DegeneratePoint,
            trusted: trusted.closure_contains(&rect),
        });
    }

    crosses.sort_by_key(|c| (c.rect.y0, c.rect.x0, c.rect.y1, c.rect.x1));
    Ok((crosses, censored))
}

/// Split the segment (doubled, axis-parallel, on integer grid lines) into
/// maximal runs whose interior avoids every square closure.
fn trim_segment_outside_squares(p0: P2, p1: P2, raster: &FeatureRaster) -> Vec<(P2, P2)> {
    debug_assert!(p0.x % 2 == 0 && p0.y % 2 == 0 && p1.x % 2 == 0 && p1.y % 2 == 0);
    let mut runs = Vec::new();
    let vertical = p0.x == p1.x;
    let (lo, hi) = if vertical {
        (p0.y.min(p1.y) / 2, p0.y.max(p1.y) / 2)
    } else {
        (p0.x.min(p1.x) / 2, p0.x.max(p1.x) / 2)
    };
    let fixed = if vertical { p0.x / 2 } else { p0.y / 2 };
    let unit_free = |t: i64| -> bool {
        let (c1, c2) = if vertical {
            ((fixed as i32 - 1, t as i32), (fixed as i32, t as i32))
        } else {
            ((t as i32, fixed as i32 - 1), (t as i32, fixed as i32))
        };
        !matches!(raster.at(c1.0, c1.1), Feature::Square(_))
            && !matches!(raster.at(c2.0, c2.1), Feature::Square(_))
    };
    let mut start: Option<i64> = None;
    for t in lo..hi {
        if unit_free(t) {
            if start.is_none() {
                start = Some(t);
            }
        } else if let Some(s) = start.take() {
            runs.push(make_seg(vertical, fixed, s, t));
        }
    }
    if let Some(s) = start {
        runs.push(make_seg(vertical, fixed, s, hi));
    }
    runs
}

fn make_seg(vertical: bool, fixed: i64, a: i64, b: i64) -> (P2, P2) {
    if vertical {
        (P2::new(fixed * 2, a * 2), P2::new(fixed * 2, b * 2))
    } else {
        (P2::new(a * 2, fixed * 2), P2::new(b * 2, fixed * 2))
    }
}

/// Which end of the arm's axis the contact sits at.
fn exit_sign_at(arm: &Arm, at: P2) -> ExitSign {
    match arm.orientation {
        Orientation::Horizontal => {
            let top = arm.axis.a.y.max(arm.axis.b.y);
            let bottom = arm.axis.a.y.min(arm.axis.b.y);
            if (at.y - top).abs() <= (at.y - bottom).abs() {
                ExitSign::Positive
            } else {
                ExitSign::Negative
            }
        }
        Orientation::Vertical => {
            let right = arm.axis.a.x.max(arm.axis.b.x);
            let left = arm.axis.a.x.min(arm.axis.b.x);
            if (at.x - right).abs() <= (at.x - left).abs() {
                ExitSign::Positive
            } else {
                ExitSign::Negative
            }
        }
    }
}

/// Exits of a regular (2D) cross: midpoints of arm contact segments plus
/// endpoint contacts of degenerate arms.
fn regular_cross_exits(
    rect: Rect,
    arms: &[Arm],
    buckets: &ArmBuckets,
    enforce_side_rule: bool,
) -> Result<Vec<ExitPoint>> {
    let cr = (
        P2::from_int(rect.x0, rect.y0),
        P2::from_int(rect.x1, rect.y1),
    );
    let mut exits: Vec<ExitPoint> = Vec::new();
    for i in buckets.near(rect) {
        let a = &arms[i];
        let inter = match closed_rect_intersection2(a.closure2(), cr) {
            Some(v) => v,
            None => continue,
        };
        let (p0, p1) = inter;
        if p0 == p1 {
            // Point contact: an exit only for degenerate arms whose axis
            // ends there.
            if a.degenerate && (a.axis.a == p0 || a.axis.b == p0) {
                exits.push(ExitPoint {
                    point: p0,
                    sign: exit_sign_at(a, p0),
                    arm: i,
                    multiplicity: 1,
                });
            }
            continue;
        }
        if p0.x != p1.x && p0.y != p1.y {
            continue;
        }
        let seg = Seg2::new(p0, p1);
        exits.push(ExitPoint {
            point: seg.midpoint(),
            sign: exit_sign_at(a, seg.midpoint()),
            arm: i,
            multiplicity: 1,
        });
    }
    // At most one exit strictly inside each side.
    if enforce_side_rule {
        let mut per_side: BTreeMap<u8, u32> = BTreeMap::new();
        for e in &exits {
            let p = e.point;
            let (x0, y0, x1, y1) = (
                2 * rect.x0 as i64,
                2 * rect.y0 as i64,
                2 * rect.x1 as i64,
                2 * rect.y1 as i64,
            );
            let side = if p.y == y0 && p.x > x0 && p.x < x1 {
                Some(0u8)
            } else if p.y == y1 && p.x > x0 && p.x < x1 {
                Some(1)
            } else if p.x == x0 && p.y > y0 && p.y < y1 {
                Some(2)
            } else if p.x == x1 && p.y > y0 && p.y < y1 {
                Some(3)
            } else {
                None
            };
            if let Some(s) = side {
                let c = per_side.entry(s).or_insert(0);
                *c += 1;
                if *c > 1 {
                    return Err(Error::DuplicateExitOnSide { x2: p.x, y2: p.y });
                }
            }
        }
    }
    exits.sort_by_key(|e| (e.point, e.arm));
    Ok(exits)
}

/// Exits of a degenerate segment cross.
fn segment_cross_exits(seg: Seg2, arms: &[Arm], buckets: &ArmBuckets) -> Vec<ExitPoint> {
    let lo = P2::new(seg.a.x.min(seg.b.x), seg.a.y.min(seg.b.y));
    let hi = P2::new(seg.a.x.max(seg.b.x), seg.a.y.max(seg.b.y));
    let query = Rect::new(
        (lo.x / 2) as i32,
        (lo.y / 2) as i32,
        (hi.x / 2) as i32,
        (hi.y / 2) as i32,
    );
    let mut exits = Vec::new();
    for i in buckets.near(query) {
        let a = &arms[i];
        let inter = match closed_rect_intersection2(a.closure2(), (lo, hi)) {
            Some(v) => v,
            None => continue,
        };
        let (p0, p1) = inter;
        if p0 == p1 {
            if a.degenerate && (a.axis.a == p0 || a.axis.b == p0) {
                exits.push(ExitPoint {
                    point: p0,
                    sign: exit_sign_at(a, p0),
                    arm: i,
                    multiplicity: 1,
                });
            }
        } else {
            let seg_i = Seg2::new(p0, p1);
            exits.push(ExitPoint {
                point: seg_i.midpoint(),
                sign: exit_sign_at(a, seg_i.midpoint()),
                arm: i,
                multiplicity: 1,
            });
        }
    }
    exits.sort_by_key(|e| (e.point, e.arm));
    exits
}

// ---------------------------------------------------------------------------
// Decorations and sectors
// ---------------------------------------------------------------------------

/// Build the cross-sectors of one cross.
///
/// Regular crosses are cut by segments from the center of mass to each exit;
/// every unit cell goes to the sector holding its membership point, which
/// realizes the right/upward tie rule. Degenerate segment crosses yield two
/// zero-area half-segments, degenerate points none.
pub fn decorate_cross(cross_idx: usize, cross: &Cross, raster: &FeatureRaster) -> Vec<CrossSector> {
    match cross.kind {
        CrossKind::DegeneratePoint => Vec::new(),
        CrossKind::DegenerateSegment => {
            let a = P2::from_int(cross.rect.x0, cross.rect.y0);
            let b = P2::from_int(cross.rect.x1, cross.rect.y1);
            let mid = cross.center;
            vec![
                CrossSector {
                    cross: cross_idx,
                    owner_square: None,
                    polygon: vec![a, mid],
                    cells: Vec::new(),
                },
                CrossSector {
                    cross: cross_idx,
                    owner_square: None,
                    polygon: vec![mid, b],
                    cells: Vec::new(),
                },
            ]
        }
        CrossKind::Regular3 | CrossKind::Regular4 => decorate_regular(cross_idx, cross, raster),
    }
}

fn decorate_regular(cross_idx: usize, cross: &Cross, raster: &FeatureRaster) -> Vec<CrossSector> {
    let rect = cross.rect;
    let center = cross.center;
    let c4 = center.to_q();

    // Exit rays sorted counterclockwise; coincident exit points (a point can
    // carry several arms) collapse to one ray.
    let mut ray_points: Vec<P2> = cross.exits.iter().map(|e| e.point).collect();
    ray_points.sort();
    ray_points.dedup();
    let mut rays: Vec<((i64, i64), P2)> = ray_points
        .into_iter()
        .map(|p| ((p.to_q().x - c4.x, p.to_q().y - c4.y), p))
        .collect();
    rays.sort_by(|a, b| geom::dir_cmp(a.0, b.0));
    let k = rays.len();
    if k < 2 {
        return Vec::new();
    }

    let mut sectors: Vec<CrossSector> = Vec::new();
    for i in 0..k {
        let p_from = rays[i].1;
        let p_to = rays[(i + 1) % k].1;
        let mut poly = vec![center, p_from];
        poly.extend(walk_rect_ccw(rect, p_from, p_to));
        poly.push(p_to);
        sectors.push(CrossSector {
            cross: cross_idx,
            owner_square: None,
            polygon: poly,
            cells: Vec::new(),
        });
    }

    // Cell assignment by membership point.
    let dirs: Vec<(i64, i64)> = rays.iter().map(|r| r.0).collect();
    for (x, y) in rect.cells() {
        let m = P4::membership_point(x, y);
        let q = (m.x - c4.x, m.y - c4.y);
        let sector = match locate_in_wedges(&dirs, q) {
            WedgePos::Inside(i) => i,
            WedgePos::OnRay(i) => {
                if geom::on_ray_side_cw(dirs[i]) {
                    (i + k - 1) % k
                } else {
                    i
                }
            }
        };
        sectors[sector].cells.push((x, y));
    }

    for (i, sector) in sectors.iter_mut().enumerate() {
        let p_from = rays[i].1;
        let p_to = rays[(i + 1) % k].1;
        sector.owner_square = sector_owner(rect, p_from, p_to, raster);
    }
    sectors
}

/// Boundary-walk parameter of a point on the closed rect boundary, doubled
/// coordinates, counterclockwise from the lower-left corner.
fn rect_perimeter_t(rect: Rect, p: P2) -> i64 {
    let (x0, y0, x1, y1) = (
        2 * rect.x0 as i64,
        2 * rect.y0 as i64,
        2 * rect.x1 as i64,
        2 * rect.y1 as i64,
    );
    let (w, h) = (x1 - x0, y1 - y0);
    if p.y == y0 && p.x < x1 {
        p.x - x0
    } else if p.x == x1 && p.y < y1 {
        w + (p.y - y0)
    } else if p.y == y1 && p.x > x0 {
        w + h + (x1 - p.x)
    } else {
        2 * w + h + (y1 - p.y)
    }
}

/// Corners of the rect strictly between two boundary points, counterclockwise.
fn walk_rect_ccw(rect: Rect, from: P2, to: P2) -> Vec<P2> {
    let perim = 2 * (2 * rect.width() as i64 + 2 * rect.height() as i64);
    let t0 = rect_perimeter_t(rect, from);
    let t1 = rect_perimeter_t(rect, to);
    let span = (t1 - t0).rem_euclid(perim);
    let span = if span == 0 { perim } else { span };
    let mut corners: Vec<(i64, P2)> = rect
        .corners2()
        .iter()
        .map(|&c| ((rect_perimeter_t(rect, c) - t0).rem_euclid(perim), c))
        .collect();
    corners.sort_by_key(|&(t, _)| t);
    corners
        .into_iter()
        .filter(|&(t, _)| t > 0 && t < span)
        .map(|(_, c)| c)
        .collect()
}

/// Outside cell of the half-unit boundary piece `[t, t+1)` (doubled
/// perimeter parameter, counterclockwise from the lower-left corner).
fn boundary_piece_outside(rect: Rect, t: i64) -> (i32, i32) {
    let (w, h) = (2 * rect.width() as i64, 2 * rect.height() as i64);
    if t < w {
        (rect.x0 + (t / 2) as i32, rect.y0 - 1)
    } else if t < w + h {
        (rect.x1, rect.y0 + ((t - w) / 2) as i32)
    } else if t < 2 * w + h {
        (rect.x1 - 1 - ((t - w - h) / 2) as i32, rect.y1)
    } else {
        (rect.x0, rect.y1 - 1 - ((t - 2 * w - h) / 2) as i32)
    }
}

/// Owner of the sector spanning the rect boundary from `from` to `to`
/// (counterclockwise): longest square contact, corner contacts at zero
/// length, ties to the smaller square index.
fn sector_owner(rect: Rect, from: P2, to: P2, raster: &FeatureRaster) -> Option<usize> {
    let mut contact: BTreeMap<usize, i64> = BTreeMap::new();
    let perim = 2 * (2 * rect.width() as i64 + 2 * rect.height() as i64);
    let t0 = rect_perimeter_t(rect, from);
    let t1 = rect_perimeter_t(rect, to);
    let span = {
        let s = (t1 - t0).rem_euclid(perim);
        if s == 0 {
            perim
        } else {
            s
        }
    };
    for step in 0..span {
        let t = (t0 + step).rem_euclid(perim);
        let (cx, cy) = boundary_piece_outside(rect, t);
        if let Feature::Square(s) = raster.at(cx, cy) {
            *contact.entry(s).or_insert(0) += 1;
        }
    }
    for c in walk_rect_ccw(rect, from, to) {
        let (dx, dy) = corner_diagonal(rect, c);
        let cell = ((c.x / 2) as i32 + dx, (c.y / 2) as i32 + dy);
        if let Feature::Square(s) = raster.at(cell.0, cell.1) {
            contact.entry(s).or_insert(0);
        }
    }
    contact
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(s, _)| s)
}

/// Outside diagonal direction of a rect corner.
fn corner_diagonal(rect: Rect, c: P2) -> (i32, i32) {
    let dx = if c.x == 2 * rect.x0 as i64 { -1 } else { 0 };
    let dy = if c.y == 2 * rect.y0 as i64 { -1 } else { 0 };
    (dx, dy)
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

/// Build the full decomposition data for a given square set.
pub fn build_decomposition(
    bounds: Rect,
    n: u32,
    margin: u32,
    squares: Vec<SquarePlacement>,
) -> Result<PartialDecomposition> {
    let trusted = bounds.shrink(margin as i32);
    let arms = neighbors_and_arms(bounds, trusted, &squares);
    let raster = FeatureRaster::build(bounds, &squares, &arms)?;
    let (crosses, censored) = crosses_and_exits(bounds, trusted, &squares, &arms, &raster)?;
    let mut sectors = Vec::new();
    for (i, c) in crosses.iter().enumerate() {
        sectors.extend(decorate_cross(i, c, &raster));
    }
    let square_trusted = squares
        .iter()
        .map(|s| trusted.closure_contains(&s.rect()))
        .collect();
    Ok(PartialDecomposition {
        n,
        margin,
        bounds,
        squares,
        square_trusted,
        arms,
        crosses,
        sectors,
        censored_components: censored,
    })
}

/// Pack and decompose a window in one step.
pub fn decompose(
    window: &TilingWindow,
    n: u32,
    margin: u32,
    rule: PlacementRule<'_>,
) -> Result<PartialDecomposition> {
    let squares = place_maximal_squares(window, n, rule)?;
    build_decomposition(window.bounds(), n, margin, squares)
}
