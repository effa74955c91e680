//! Hand-built windows, decompositions, and synthetic hierarchies used by the
//! test and verification suites.
//!
//! The synthetic hierarchies realize the canonical boundary configurations:
//! a two-end ribbon, a single four-exit virtual cross, a three-end tree, and
//! a two-root tree at a prescribed distance. The first two are produced by
//! the real inflation machinery over aligned square grids; the trees with
//! hand-shaped regions fabricate levels directly, since their supertile
//! regions are not unions of packed squares.

use crate::decomposition::{
    Arm, Cross, CrossKind, ExitPoint, ExitSign, Orientation, PartialDecomposition,
    SquarePlacement,
};
use crate::geom::{P2, Rect, Seg2};
use crate::inflation::{push_level_from_squares, InflationHierarchy, Level, Supertile};
use crate::tiling::TilingWindow;

pub fn blank_window(w: u32, h: u32) -> TilingWindow {
    TilingWindow::new((0, 0), w, h, vec![0; (w * h) as usize])
}

/// Four 3x3 squares at the corners of an 8x8 window with a regular 4-exit
/// cross in the middle.
pub fn four_square_squares() -> Vec<SquarePlacement> {
    [(0, 0), (5, 0), (0, 5), (5, 5)]
        .iter()
        .map(|&(x, y)| SquarePlacement {
            anchor: (x, y),
            side: 3,
        })
        .collect()
}

pub fn four_square_hierarchy() -> InflationHierarchy {
    let window = blank_window(8, 8);
    let mut hier = InflationHierarchy::new(window);
    let b = Rect::new(0, 0, 8, 8);
    push_level_from_squares(&mut hier, 3, b, 0, Some(b), four_square_squares()).unwrap();
    hier
}

/// Aligned grid of side-`s` squares filling the bounds exactly.
fn grid_squares(b: Rect, s: u32) -> Vec<SquarePlacement> {
    let mut v = Vec::new();
    let mut y = b.y0;
    while y + s as i32 <= b.y1 {
        let mut x = b.x0;
        while x + s as i32 <= b.x1 {
            v.push(SquarePlacement {
                anchor: (x, y),
                side: s,
            });
            x += s as i32;
        }
        y += s as i32;
    }
    v
}

/// Three aligned grid levels (4, 12, 36) over a 72x72 window. Every grid
/// vertex is a degenerate point cross; the only 36-grid vertex inside the
/// window interior is the center (36, 36), which persists across all levels:
/// a single virtual cross with four exits and an H4(0) root.
pub fn synthetic_cross_h40() -> InflationHierarchy {
    let window = blank_window(72, 72);
    let b = window.bounds();
    let mut hier = InflationHierarchy::new(window);
    for s in [4u32, 12, 36] {
        let squares = grid_squares(b, s);
        push_level_from_squares(&mut hier, s, b, 0, Some(b), squares).unwrap();
    }
    hier
}

/// Horizontal two-end ribbon: at every level two stacked touching squares
/// share the edge on the line y = 36, and the two supertiles are the lower
/// and upper halves of the window. The persistent boundary is that line.
pub fn synthetic_ribbon_h2() -> InflationHierarchy {
    let window = blank_window(72, 72);
    let b = window.bounds();
    let mut hier = InflationHierarchy::new(window.clone());
    let y_mid = 36i32;
    for (li, s) in [4u32, 12, 36].into_iter().enumerate() {
        let x0 = 36 - s as i32 / 2;
        let squares = vec![
            SquarePlacement {
                anchor: (x0, y_mid - s as i32),
                side: s,
            },
            SquarePlacement {
                anchor: (x0, y_mid),
                side: s,
            },
        ];
        let dec = crate::decomposition::build_decomposition(b, s, 0, squares).unwrap();
        let level = fabricate_level(
            &window,
            s,
            b,
            dec,
            &|_, y| if y < y_mid { 0 } else { 1 },
            2,
            li,
        );
        hier.levels.push(level);
    }
    hier
}

/// Three-end tree: regions A (left, above the line), B (right, above), and
/// C (below); the root sits at (36, 36). Each level carries a fabricated
/// degenerate point cross with three exits at the root.
pub fn synthetic_three_end() -> InflationHierarchy {
    let window = blank_window(72, 72);
    let b = window.bounds();
    let mut hier = InflationHierarchy::new(window.clone());
    let (xr, y_mid) = (36i32, 36i32);
    for (li, s) in [4u32, 12, 36].into_iter().enumerate() {
        let dec = point_cross_decomposition(b, s, &[(xr, y_mid, 3)]);
        let level = fabricate_level(
            &window,
            s,
            b,
            dec,
            &|x, y| {
                if y < y_mid {
                    2
                } else if x < xr {
                    0
                } else {
                    1
                }
            },
            3,
            li,
        );
        hier.levels.push(level);
    }
    hier
}

/// Two-root tree at distance 6 (the four-end, two-root configuration): a
/// horizontal line through both roots, an upward ray at x = 33, a downward
/// ray at x = 39. Each level carries two fabricated three-exit crosses.
pub fn synthetic_two_root_h4() -> InflationHierarchy {
    let window = blank_window(72, 72);
    let b = window.bounds();
    let mut hier = InflationHierarchy::new(window.clone());
    let (x1, x2, y_mid) = (33i32, 39i32, 36i32);
    for (li, s) in [4u32, 12, 36].into_iter().enumerate() {
        let dec = point_cross_decomposition(b, s, &[(x1, y_mid, 3), (x2, y_mid, 3)]);
        let level = fabricate_level(
            &window,
            s,
            b,
            dec,
            &|x, y| {
                if y >= y_mid {
                    if x < x1 {
                        0
                    } else {
                        1
                    }
                } else if x < x2 {
                    2
                } else {
                    3
                }
            },
            4,
            li,
        );
        hier.levels.push(level);
    }
    hier
}

/// A decomposition whose only content is degenerate arms meeting at the
/// given points, fabricated so that virtual-cross detection sees a
/// three-exit point cross at each.
fn point_cross_decomposition(
    bounds: Rect,
    n: u32,
    points: &[(i32, i32, u32)],
) -> PartialDecomposition {
    let mut arms = Vec::new();
    let mut crosses = Vec::new();
    let s = n as i64;
    for &(px, py, exits) in points {
        let p = P2::from_int(px, py);
        let arm_specs = [
            // left horizontal, right horizontal, up vertical
            (
                Seg2::new(P2::new(p.x - 2 * s, p.y), p),
                Orientation::Vertical,
            ),
            (
                Seg2::new(p, P2::new(p.x + 2 * s, p.y)),
                Orientation::Vertical,
            ),
            (
                Seg2::new(p, P2::new(p.x, p.y + 2 * s)),
                Orientation::Horizontal,
            ),
        ];
        let base = arms.len();
        let mut cross_exits = Vec::new();
        for (k, (axis, orientation)) in arm_specs.iter().enumerate().take(exits as usize) {
            let rect = match orientation {
                Orientation::Vertical => Rect::new(
                    (axis.a.x / 2) as i32,
                    (axis.a.y / 2) as i32,
                    (axis.b.x / 2) as i32,
                    (axis.a.y / 2) as i32,
                ),
                Orientation::Horizontal => Rect::new(
                    (axis.a.x / 2) as i32,
                    (axis.a.y / 2) as i32,
                    (axis.a.x / 2) as i32,
                    (axis.b.y / 2) as i32,
                ),
            };
            arms.push(Arm {
                between: (0, 0),
                rect,
                axis: *axis,
                orientation: *orientation,
                degenerate: true,
                trusted: true,
            });
            cross_exits.push(ExitPoint {
                point: p,
                sign: if k == 0 {
                    ExitSign::Positive
                } else {
                    ExitSign::Negative
                },
                arm: base + k,
                multiplicity: 1,
            });
        }
        crosses.push(Cross {
            rect: Rect::new(px, py, px, py),
            center: p,
            exits: cross_exits,
            kind: CrossKind::DegeneratePoint,
            trusted: true,
        });
    }
    PartialDecomposition {
        n,
        margin: 0,
        bounds,
        squares: Vec::new(),
        square_trusted: Vec::new(),
        arms,
        crosses,
        sectors: Vec::new(),
        censored_components: 0,
    }
}

/// Assemble a Level whose supertiles are the preimages of `region(x, y)`.
fn fabricate_level(
    window: &TilingWindow,
    n: u32,
    domain: Rect,
    decomposition: PartialDecomposition,
    region: &dyn Fn(i32, i32) -> u32,
    region_count: u32,
    level_index: usize,
) -> Level {
    let b = window.bounds();
    let mut assignment = vec![0u32; window.cell_count() as usize];
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); region_count as usize];
    let mut tr: Vec<(i32, i32)> = vec![(i32::MIN, i32::MIN); region_count as usize];
    for y in b.y0..b.y1 {
        for x in b.x0..b.x1 {
            let r = region(x, y);
            let i = window.cell_index(x, y) as usize;
            assignment[i] = r + 1;
            children[r as usize].push(i as u32);
            if (y, x) > (tr[r as usize].1, tr[r as usize].0) {
                tr[r as usize] = (x, y);
            }
        }
    }
    let mut perims = vec![0u64; region_count as usize];
    for y in b.y0..b.y1 {
        for x in b.x0..b.x1 {
            let s = assignment[window.cell_index(x, y) as usize];
            for (nx, ny) in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                let o = if b.contains_cell(nx, ny) {
                    assignment[window.cell_index(nx, ny) as usize]
                } else {
                    0
                };
                if o != s {
                    perims[(s - 1) as usize] += 1;
                }
            }
        }
    }
    let supertiles = (0..region_count)
        .map(|r| {
            let ch = std::mem::take(&mut children[r as usize]);
            Supertile {
                id: r,
                square: 0,
                anchor: window.cell_at_index(ch[0]),
                area: ch.len() as u64,
                perimeter: perims[r as usize],
                pprime_area_e8: ch.len() as i64 * 8,
                pprime_perimeter: perims[r as usize] as f64,
                pprime_region: Vec::new(),
                type_key: 0x1000 + level_index as u64 * 16 + r as u64,
                tr_cell: tr[r as usize],
                children: ch,
            }
        })
        .collect();
    Level {
        n,
        domain,
        guaranteed: domain,
        decomposition,
        supertiles,
        assignment,
    }
}
