//! Inflated supertile hierarchies: P' regions, cellwise P'' supertiles,
//! iterated levels under a schedule, and isoperimetric accounting.
//!
//! Each level packs N x N squares over the window grid, attaches half-arms
//! and cross-sectors to form the geometric P' of every kept square, and snaps
//! P' to the previous level's tiles: a tile belongs to the P' region holding
//! the membership point of its top-right-most cell, which realizes the
//! right/upward rule for tiles straddling P' boundaries.

use serde::{Deserialize, Serialize};

use crate::decomposition::{
    build_decomposition, place_maximal_squares, Orientation, PartialDecomposition, PlacementRule,
};
use crate::error::{Error, Result};
use crate::geom::{self, P2, P4, Rect};
use crate::ratio::Ratio;
use crate::tiling::TilingWindow;

/// Increasing sequence of square sides, one per level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSchedule {
    pub sides: Vec<u32>,
    pub mode: ScheduleMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleMode {
    /// Requires N_{n+1} >= N_n^3.
    Cubic,
    Custom,
}

impl LevelSchedule {
    pub fn cubic(sides: Vec<u32>) -> Self {
        LevelSchedule {
            sides,
            mode: ScheduleMode::Cubic,
        }
    }

    pub fn custom(sides: Vec<u32>) -> Self {
        LevelSchedule {
            sides,
            mode: ScheduleMode::Custom,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.sides.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::ScheduleNotIncreasing(w[1], w[0]));
            }
            if self.mode == ScheduleMode::Cubic && (w[1] as u64) < (w[0] as u64).pow(3) {
                return Err(Error::ScheduleNotCubic {
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        Ok(())
    }
}

/// One inflated tile: the geometric P' and the snapped P''.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Supertile {
    /// Level-unique id, row-major by square anchor.
    pub id: u32,
    /// Index of the owning square in the level's decomposition.
    pub square: usize,
    pub anchor: (i32, i32),
    /// Children sorted row-major: previous-level supertile ids, or cell
    /// indices at level one.
    pub children: Vec<u32>,
    /// P'' area in unit cells.
    pub area: u64,
    /// P'' boundary length in unit edges.
    pub perimeter: u64,
    /// Exact P' area in eighth cells.
    pub pprime_area_e8: i64,
    /// Euclidean P' boundary length.
    pub pprime_perimeter: f64,
    /// P' boundary rings, doubled coordinates.
    pub pprime_region: Vec<Vec<P2>>,
    /// Translation-invariant content hash (children offsets and types).
    pub type_key: u64,
    /// Top-right-most cell, the membership representative at the next level.
    pub tr_cell: (i32, i32),
}

/// One built level.
#[derive(Clone, Debug)]
pub struct Level {
    pub n: u32,
    /// Region that was packed at this level.
    pub domain: Rect,
    /// Rectangle guaranteed to be covered by kept supertiles.
    pub guaranteed: Rect,
    pub decomposition: PartialDecomposition,
    pub supertiles: Vec<Supertile>,
    /// Window cell -> supertile id + 1 (0 = not covered at this level).
    pub assignment: Vec<u32>,
}

impl Level {
    pub fn supertile_at(&self, window: &TilingWindow, x: i32, y: i32) -> Option<u32> {
        let idx = window.cell_index(x, y) as usize;
        match self.assignment[idx] {
            0 => None,
            v => Some(v - 1),
        }
    }
}

/// A window together with its built inflation levels.
#[derive(Clone, Debug)]
pub struct InflationHierarchy {
    pub window: TilingWindow,
    pub levels: Vec<Level>,
}

impl InflationHierarchy {
    pub fn new(window: TilingWindow) -> Self {
        InflationHierarchy {
            window,
            levels: Vec::new(),
        }
    }

    pub fn top_side(&self) -> u32 {
        self.levels.last().map(|l| l.n).unwrap_or(1)
    }

    /// Packing domain for the next level.
    pub fn next_domain(&self) -> Rect {
        self.levels
            .last()
            .map(|l| l.guaranteed)
            .unwrap_or_else(|| self.window.bounds())
    }
}

/// Geometric P' of one square: pieces, exact area, boundary.
#[derive(Clone, Debug)]
pub struct PPrime {
    pub pieces: Vec<Vec<P2>>,
    /// Area in eighth cells.
    pub area_e8: i64,
    pub perimeter: f64,
    pub rings: Vec<Vec<P2>>,
}

/// Per-square incidence lists, built once per decomposition so that P'
/// assembly stays linear over the level.
pub struct PPrimeIndex {
    arms_by_square: Vec<Vec<usize>>,
    sectors_by_square: Vec<Vec<usize>>,
}

impl PPrimeIndex {
    pub fn build(dec: &PartialDecomposition) -> Self {
        let mut arms_by_square = vec![Vec::new(); dec.squares.len()];
        for (i, arm) in dec.arms.iter().enumerate() {
            arms_by_square[arm.between.0].push(i);
            if arm.between.1 != arm.between.0 {
                arms_by_square[arm.between.1].push(i);
            }
        }
        let mut sectors_by_square = vec![Vec::new(); dec.squares.len()];
        for (i, sector) in dec.sectors.iter().enumerate() {
            if let Some(sq) = sector.owner_square {
                sectors_by_square[sq].push(i);
            }
        }
        PPrimeIndex {
            arms_by_square,
            sectors_by_square,
        }
    }
}

/// Assemble the P' region of a square from its half-arms and owned sectors.
/// Returns None for censored squares (outside the trusted band, or without
/// any incident arm).
pub fn build_supertile_pprime(dec: &PartialDecomposition, square: usize) -> Option<PPrime> {
    build_supertile_pprime_indexed(dec, &PPrimeIndex::build(dec), square)
}

pub fn build_supertile_pprime_indexed(
    dec: &PartialDecomposition,
    index: &PPrimeIndex,
    square: usize,
) -> Option<PPrime> {
    if !dec.square_trusted[square] {
        return None;
    }
    let sq = dec.squares[square].rect();
    let mut pieces: Vec<Vec<P2>> = Vec::new();
    pieces.push(sq.polygon2());

    let mut incident = 0usize;
    for &ai in &index.arms_by_square[square] {
        let arm = &dec.arms[ai];
        incident += 1;
        if arm.degenerate {
            continue;
        }
        let r = arm.rect;
        let (a, b) = (arm.axis.a, arm.axis.b);
        let piece = match arm.orientation {
            Orientation::Horizontal => {
                // Vertical axis at x2 = a.x; the square sits left or right.
                let on_left = sq.x1 == r.x0;
                if on_left {
                    vec![
                        P2::from_int(r.x0, r.y0),
                        P2::new(a.x, 2 * r.y0 as i64),
                        P2::new(b.x, 2 * r.y1 as i64),
                        P2::from_int(r.x0, r.y1),
                    ]
                } else {
                    vec![
                        P2::new(a.x, 2 * r.y0 as i64),
                        P2::from_int(r.x1, r.y0),
                        P2::from_int(r.x1, r.y1),
                        P2::new(b.x, 2 * r.y1 as i64),
                    ]
                }
            }
            Orientation::Vertical => {
                let on_bottom = sq.y1 == r.y0;
                if on_bottom {
                    vec![
                        P2::from_int(r.x0, r.y0),
                        P2::from_int(r.x1, r.y0),
                        P2::new(2 * r.x1 as i64, a.y),
                        P2::new(2 * r.x0 as i64, a.y),
                    ]
                } else {
                    vec![
                        P2::new(2 * r.x0 as i64, a.y),
                        P2::new(2 * r.x1 as i64, a.y),
                        P2::from_int(r.x1, r.y1),
                        P2::from_int(r.x0, r.y1),
                    ]
                }
            }
        };
        pieces.push(piece);
    }
    if incident == 0 {
        return None;
    }

    for &si in &index.sectors_by_square[square] {
        let sector = &dec.sectors[si];
        if sector.polygon.len() >= 3 {
            pieces.push(sector.polygon.clone());
        }
    }

    let area_e8: i64 = pieces.iter().map(|p| geom::area_eighths(p)).sum();
    let edges = geom::union_boundary(&pieces);
    let perimeter = geom::edges_length(&edges);
    let rings = geom::chain_rings(&edges);
    Some(PPrime {
        pieces,
        area_e8,
        perimeter,
        rings,
    })
}

/// Per-cell owner square resolution: squares own their cells, arm cells
/// split along the axis (right/upward for the odd middle), cross cells
/// follow their sector's owner.
pub fn snap_assignment(dec: &PartialDecomposition, window: &TilingWindow) -> Vec<u32> {
    let mut owner = vec![0u32; window.cell_count() as usize];

    for (i, s) in dec.squares.iter().enumerate() {
        for (x, y) in s.rect().cells() {
            owner[window.cell_index(x, y) as usize] = i as u32 + 1;
        }
    }
    for arm in &dec.arms {
        if arm.degenerate {
            continue;
        }
        let (from, to) = arm.between;
        let fr = dec.squares[from].rect();
        for (x, y) in arm.rect.cells() {
            let m = P4::membership_point(x, y);
            let side_of = match arm.orientation {
                Orientation::Horizontal => {
                    // Axis at doubled x; membership x is odd quarters.
                    let axis_q = arm.axis.a.x * 2;
                    let right = m.x > axis_q;
                    let from_is_left = fr.x1 == arm.rect.x0;
                    if right == from_is_left {
                        to
                    } else {
                        from
                    }
                }
                Orientation::Vertical => {
                    let axis_q = arm.axis.a.y * 2;
                    let up = m.y > axis_q;
                    let from_is_below = fr.y1 == arm.rect.y0;
                    if up == from_is_below {
                        to
                    } else {
                        from
                    }
                }
            };
            owner[window.cell_index(x, y) as usize] = side_of as u32 + 1;
        }
    }
    for sector in &dec.sectors {
        if let Some(sq) = sector.owner_square {
            for &(x, y) in &sector.cells {
                owner[window.cell_index(x, y) as usize] = sq as u32 + 1;
            }
        }
    }
    owner
}

/// Snap one P' to previous-level tiles via the per-cell owner raster: kept
/// for API symmetry with the level builder, exposed for tests.
pub fn snap_pprime_to_cells(
    dec: &PartialDecomposition,
    window: &TilingWindow,
    square: usize,
) -> Vec<(i32, i32)> {
    let owner = snap_assignment(dec, window);
    let mut cells = Vec::new();
    for y in dec.bounds.y0..dec.bounds.y1 {
        for x in dec.bounds.x0..dec.bounds.x1 {
            if owner[window.cell_index(x, y) as usize] == square as u32 + 1 {
                cells.push((x, y));
            }
        }
    }
    cells
}

fn fnv(h: &mut u64, v: u64) {
    for b in v.to_le_bytes() {
        *h ^= b as u64;
        *h = h.wrapping_mul(0x100000001b3);
    }
}

/// Append one level of side `n_next` to the hierarchy (greedy placement).
pub fn inflate_level(hier: &mut InflationHierarchy, n_next: u32) -> Result<()> {
    inflate_level_with(hier, n_next, PlacementRule::GreedyLex)
}

/// Append one level with an explicit placement rule.
pub fn inflate_level_with(
    hier: &mut InflationHierarchy,
    n_next: u32,
    rule: PlacementRule<'_>,
) -> Result<()> {
    let level_index = hier.levels.len() + 1;
    let n_prev = hier.top_side();
    if n_next <= n_prev {
        return Err(Error::ScheduleNotIncreasing(n_next, n_prev));
    }
    let domain = hier.next_domain();
    let min_side = 6 * n_next + 1;
    if domain.width() < min_side as i32 || domain.height() < min_side as i32 {
        return Err(Error::WindowExhausted {
            level: level_index,
            n: n_next,
            min_side,
        });
    }
    let sub = hier.window.subwindow(domain);
    let squares = place_maximal_squares(&sub, n_next, rule)?;
    push_level_from_squares(hier, n_next, domain, 3 * n_next, None, squares)
}

/// Append one level from explicit square placements. Fixtures use this with
/// custom margins and an explicit coverage guarantee; `inflate_level` always
/// passes margin `3 * n` and derives the guarantee conservatively.
pub fn push_level_from_squares(
    hier: &mut InflationHierarchy,
    n: u32,
    domain: Rect,
    margin: u32,
    guaranteed: Option<Rect>,
    squares: Vec<crate::decomposition::SquarePlacement>,
) -> Result<()> {
    let level_index = hier.levels.len() + 1;
    let n_prev = hier.top_side();
    let dec = build_decomposition(domain, n, margin, squares)?;
    let window = &hier.window;
    let owner = snap_assignment(&dec, window);

    // Kept squares: trusted footprint and at least one incident arm.
    let mut incident = vec![0usize; dec.squares.len()];
    for arm in &dec.arms {
        incident[arm.between.0] += 1;
        incident[arm.between.1] += 1;
    }
    let kept: Vec<bool> = dec
        .squares
        .iter()
        .enumerate()
        .map(|(i, _)| dec.square_trusted[i] && incident[i] > 0)
        .collect();
    if !kept.iter().any(|&k| k) {
        return Err(Error::WindowExhausted {
            level: level_index,
            n,
            min_side: 7 * n,
        });
    }

    // Dense remap: kept square -> supertile id, row-major by anchor.
    let mut kept_squares: Vec<usize> = (0..dec.squares.len()).filter(|&i| kept[i]).collect();
    kept_squares.sort_by_key(|&i| (dec.squares[i].anchor.1, dec.squares[i].anchor.0));
    let mut square_to_id = vec![u32::MAX; dec.squares.len()];
    for (id, &sq) in kept_squares.iter().enumerate() {
        square_to_id[sq] = id as u32;
    }

    // Assign previous-level units.
    let cell_total = window.cell_count() as usize;
    let mut assignment = vec![0u32; cell_total];
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); kept_squares.len()];
    let mut tr_cells: Vec<(i32, i32)> = vec![(i32::MIN, i32::MIN); kept_squares.len()];
    let mut areas = vec![0u64; kept_squares.len()];

    if let Some(prev) = hier.levels.last() {
        // Children are previous-level supertiles, routed by the membership
        // point of their top-right-most cell.
        for st in &prev.supertiles {
            let (tx, ty) = st.tr_cell;
            let o = owner[window.cell_index(tx, ty) as usize];
            if o == 0 {
                continue;
            }
            let sq = (o - 1) as usize;
            if square_to_id[sq] == u32::MAX {
                continue;
            }
            let id = square_to_id[sq] as usize;
            children[id].push(st.id);
            areas[id] += st.area;
            if (st.tr_cell.1, st.tr_cell.0) > (tr_cells[id].1, tr_cells[id].0) {
                tr_cells[id] = st.tr_cell;
            }
        }
        // Paint the new assignment from the previous one.
        let mut prev_to_new = vec![0u32; prev.supertiles.len()];
        for (id, ch) in children.iter().enumerate() {
            for &c in ch {
                prev_to_new[c as usize] = id as u32 + 1;
            }
        }
        for i in 0..cell_total {
            let p = prev.assignment[i];
            if p != 0 {
                assignment[i] = prev_to_new[(p - 1) as usize];
            }
        }
    } else {
        // Children are unit cells.
        let b = window.bounds();
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                let i = window.cell_index(x, y) as usize;
                let o = owner[i];
                if o == 0 {
                    continue;
                }
                let sq = (o - 1) as usize;
                if square_to_id[sq] == u32::MAX {
                    continue;
                }
                let id = square_to_id[sq] as usize;
                assignment[i] = id as u32 + 1;
                children[id].push(i as u32);
                areas[id] += 1;
                if (y, x) > (tr_cells[id].1, tr_cells[id].0) {
                    tr_cells[id] = (x, y);
                }
            }
        }
    }

    for (id, ch) in children.iter().enumerate() {
        if ch.is_empty() {
            let sq = kept_squares[id];
            return Err(Error::EmptySupertile {
                x: dec.squares[sq].anchor.0,
                y: dec.squares[sq].anchor.1,
            });
        }
    }

    // Perimeters in one pass over the window.
    let mut perims = vec![0u64; kept_squares.len()];
    {
        let b = window.bounds();
        let at = |x: i32, y: i32| -> u32 {
            if b.contains_cell(x, y) {
                assignment[window.cell_index(x, y) as usize]
            } else {
                0
            }
        };
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                let s = at(x, y);
                if s == 0 {
                    continue;
                }
                for (nx, ny) in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                    if at(nx, ny) != s {
                        perims[(s - 1) as usize] += 1;
                    }
                }
            }
        }
    }

    // Type keys and child ordering.
    let pprime_index = PPrimeIndex::build(&dec);
    let prev_level = hier.levels.last();
    let mut supertiles = Vec::with_capacity(kept_squares.len());
    for (id, &sq) in kept_squares.iter().enumerate() {
        let mut ch = std::mem::take(&mut children[id]);
        let anchor_of = |c: u32| -> (i32, i32) {
            match prev_level {
                Some(prev) => prev.supertiles[c as usize].anchor,
                None => window.cell_at_index(c),
            }
        };
        ch.sort_by_key(|&c| {
            let (x, y) = anchor_of(c);
            (y, x)
        });
        let min_anchor = ch
            .iter()
            .map(|&c| anchor_of(c))
            .fold((i32::MAX, i32::MAX), |acc, (x, y)| (acc.0.min(x), acc.1.min(y)));
        let mut h = 0xcbf29ce484222325u64;
        fnv(&mut h, ch.len() as u64);
        for &c in &ch {
            let (x, y) = anchor_of(c);
            fnv(&mut h, (x - min_anchor.0) as u64);
            fnv(&mut h, (y - min_anchor.1) as u64);
            let child_key = match prev_level {
                Some(prev) => prev.supertiles[c as usize].type_key,
                None => window.label(x, y) as u64,
            };
            fnv(&mut h, child_key);
        }

        let pprime = build_supertile_pprime_indexed(&dec, &pprime_index, sq).ok_or_else(|| {
            Error::EmptySupertile {
                x: dec.squares[sq].anchor.0,
                y: dec.squares[sq].anchor.1,
            }
        })?;
        supertiles.push(Supertile {
            id: id as u32,
            square: sq,
            anchor: dec.squares[sq].anchor,
            children: ch,
            area: areas[id],
            perimeter: perims[id],
            pprime_area_e8: pprime.area_e8,
            pprime_perimeter: pprime.perimeter,
            pprime_region: pprime.rings,
            type_key: h,
            tr_cell: tr_cells[id],
        });
    }

    let guaranteed = guaranteed.unwrap_or_else(|| domain.shrink((6 * n + 3 * n_prev) as i32));
    hier.levels.push(Level {
        n,
        domain,
        guaranteed,
        decomposition: dec,
        supertiles,
        assignment,
    });
    Ok(())
}

/// Why a hierarchy run stopped early.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExhaustionReport {
    pub level: usize,
    pub n: u32,
    pub min_side: u32,
}

/// A built hierarchy plus the exhaustion point, if the schedule outran the
/// window.
pub struct HierarchyRun {
    pub hierarchy: InflationHierarchy,
    pub exhausted: Option<ExhaustionReport>,
}

/// Iterate `inflate_level` over the schedule, stopping early with a report
/// when the window is exhausted.
pub fn run_hierarchy(window: TilingWindow, schedule: &LevelSchedule) -> Result<HierarchyRun> {
    run_hierarchy_with(window, schedule, None)
}

/// Like `run_hierarchy`, with an optional marker patch that switches every
/// level to pattern-anchored placement.
pub fn run_hierarchy_with(
    window: TilingWindow,
    schedule: &LevelSchedule,
    marker: Option<&TilingWindow>,
) -> Result<HierarchyRun> {
    schedule.validate()?;
    let mut hier = InflationHierarchy::new(window);
    let mut exhausted = None;
    for &n in &schedule.sides {
        let result = match marker {
            Some(m) => inflate_level_with(&mut hier, n, PlacementRule::PatternAnchored { marker: m }),
            None => inflate_level(&mut hier, n),
        };
        match result {
            Ok(()) => {}
            Err(Error::WindowExhausted {
                level,
                n,
                min_side,
            }) => {
                exhausted = Some(ExhaustionReport {
                    level,
                    n,
                    min_side,
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(HierarchyRun {
        hierarchy: hier,
        exhausted,
    })
}

/// Closed-form isoperimetric ratio bound for consecutive sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatioBound {
    /// `(12 N_n)^2 / (N_{n+1} - (12 N_n)^2)`, only when the denominator is
    /// positive.
    Value(Ratio),
    /// The denominator is nonpositive at desk scale.
    Vacuous,
}

pub fn closed_form_bound(n_prev: u32, n_next: u64) -> RatioBound {
    let t = (12 * n_prev as i64) * (12 * n_prev as i64);
    let den = n_next as i64 - t;
    if den <= 0 {
        RatioBound::Vacuous
    } else {
        RatioBound::Value(Ratio::new(t, den))
    }
}

/// Per-level isoperimetric summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelIsoperimetry {
    pub level: usize,
    pub n: u32,
    /// Max supertile area over the level.
    pub max_area: u64,
    /// Max supertile perimeter over the level.
    pub max_perimeter: u64,
    /// Max perimeter/area over the level's supertiles.
    pub max_ratio: Ratio,
    /// Bound from the previous side, when applicable.
    pub bound: RatioBound,
    /// Measured ratio <= bound (None when vacuous).
    pub within_bound: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsoperimetricReport {
    pub levels: Vec<LevelIsoperimetry>,
}

pub fn isoperimetric_report(hier: &InflationHierarchy) -> IsoperimetricReport {
    let mut levels = Vec::new();
    let mut n_prev = 1u32;
    for (i, level) in hier.levels.iter().enumerate() {
        let max_area = level.supertiles.iter().map(|s| s.area).max().unwrap_or(0);
        let max_perimeter = level
            .supertiles
            .iter()
            .map(|s| s.perimeter)
            .max()
            .unwrap_or(0);
        let max_ratio = level
            .supertiles
            .iter()
            .map(|s| Ratio::new(s.perimeter as i64, s.area as i64))
            .max()
            .unwrap_or_else(Ratio::zero);
        let bound = closed_form_bound(n_prev, level.n as u64);
        let within_bound = match bound {
            RatioBound::Value(b) => Some(max_ratio <= b),
            RatioBound::Vacuous => None,
        };
        levels.push(LevelIsoperimetry {
            level: i + 1,
            n: level.n,
            max_area,
            max_perimeter,
            max_ratio,
            bound,
            within_bound,
        });
        n_prev = level.n;
    }
    IsoperimetricReport { levels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::SquarePlacement;

    fn blank_window(w: u32, h: u32) -> TilingWindow {
        TilingWindow::new((0, 0), w, h, vec![0; (w * h) as usize])
    }

    /// Four-square fixture built as a level over unit cells with margin 0.
    fn fixture_hierarchy() -> InflationHierarchy {
        let window = blank_window(8, 8);
        let mut hier = InflationHierarchy::new(window);
        let squares: Vec<SquarePlacement> = [(0, 0), (5, 0), (0, 5), (5, 5)]
            .iter()
            .map(|&(x, y)| SquarePlacement {
                anchor: (x, y),
                side: 3,
            })
            .collect();
        push_level_from_squares(&mut hier, 3, Rect::new(0, 0, 8, 8), 0, None, squares).unwrap();
        hier
    }

    #[test]
    fn four_square_pprime_is_sixteen_cells() {
        let hier = fixture_hierarchy();
        let level = &hier.levels[0];
        assert_eq!(level.supertiles.len(), 4);
        for st in &level.supertiles {
            assert_eq!(st.area, 16);
            assert_eq!(st.perimeter, 16);
            assert_eq!(st.pprime_area_e8, 128);
            assert!((st.pprime_perimeter - 16.0).abs() < 1e-9);
        }
        // The four supertiles partition the window.
        let covered = level.assignment.iter().filter(|&&v| v != 0).count();
        assert_eq!(covered, 64);
    }

    #[test]
    fn closed_form_bound_values() {
        assert_eq!(
            closed_form_bound(150, 3_375_000),
            RatioBound::Value(Ratio::new(24, 1))
        );
        assert_eq!(closed_form_bound(150, 3_240_000), RatioBound::Vacuous);
        assert_eq!(closed_form_bound(4, 64), RatioBound::Vacuous);
    }

    #[test]
    fn fixture_isoperimetric_report() {
        // Single supertile type of area 16 and perimeter 16: ratio 1.
        let hier = fixture_hierarchy();
        let report = isoperimetric_report(&hier);
        assert_eq!(report.levels.len(), 1);
        let l = &report.levels[0];
        assert_eq!(l.max_area, 16);
        assert_eq!(l.max_perimeter, 16);
        assert_eq!(l.max_ratio, Ratio::new(1, 1));
        // N1 = 3 against N0 = 1: 144 / (3 - 144) is vacuous.
        assert_eq!(l.bound, RatioBound::Vacuous);
        assert_eq!(l.within_bound, None);
    }

    #[test]
    fn schedule_validation() {
        assert!(LevelSchedule::cubic(vec![2, 8, 512]).validate().is_ok());
        assert!(matches!(
            LevelSchedule::cubic(vec![4, 32]).validate(),
            Err(Error::ScheduleNotCubic { .. })
        ));
        assert!(matches!(
            LevelSchedule::custom(vec![4, 4]).validate(),
            Err(Error::ScheduleNotIncreasing(..))
        ));
    }

    #[test]
    fn isolated_square_is_censored() {
        // A lone square has no arms to attach, so it yields no P'.
        let b = Rect::new(0, 0, 8, 8);
        let dec = crate::decomposition::build_decomposition(
            b,
            3,
            0,
            vec![SquarePlacement {
                anchor: (2, 2),
                side: 3,
            }],
        )
        .unwrap();
        assert!(build_supertile_pprime(&dec, 0).is_none());
    }

    #[test]
    fn empty_schedule_gives_zero_level_hierarchy() {
        let window = blank_window(8, 8);
        let run = run_hierarchy(window, &LevelSchedule::custom(vec![])).unwrap();
        assert!(run.hierarchy.levels.is_empty());
        assert!(run.exhausted.is_none());
    }

    #[test]
    fn window_exhaustion_reports_level() {
        let window = blank_window(28, 28);
        let run = run_hierarchy(window, &LevelSchedule::custom(vec![3, 30])).unwrap();
        assert_eq!(run.hierarchy.levels.len(), 1);
        let ex = run.exhausted.expect("second level must exhaust");
        assert_eq!(ex.level, 2);
        assert_eq!(ex.n, 30);
    }

    #[test]
    fn too_small_window_exhausts_at_level_one() {
        // The margin rule leaves no trusted region below (6N)^2.
        let window = blank_window(18, 18);
        let run = run_hierarchy(window, &LevelSchedule::custom(vec![3])).unwrap();
        assert!(run.hierarchy.levels.is_empty());
        let ex = run.exhausted.unwrap();
        assert_eq!(ex.level, 1);
    }
}
