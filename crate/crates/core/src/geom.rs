//! Exact integer geometry on the unit grid.
//!
//! Cells are half-open unit squares `[x, x+1) x [y, y+1)` addressed by their
//! lower-left corner. Derived features (arm axes, cross centers, exit points,
//! decoration segments) live on the half-integer lattice and are stored as
//! doubled integers so that no floating point enters any predicate. Cell
//! membership tests run on the quarter-integer lattice (coordinates scaled by
//! four).

use serde::{Deserialize, Serialize};

/// A point on the half-integer lattice, both coordinates doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct P2 {
    pub x: i64,
    pub y: i64,
}

impl P2 {
    pub const fn new(x: i64, y: i64) -> Self {
        P2 { x, y }
    }

    /// Lift an integer grid point.
    pub const fn from_int(x: i32, y: i32) -> Self {
        P2 {
            x: x as i64 * 2,
            y: y as i64 * 2,
        }
    }

    /// Scale to the quarter lattice.
    pub const fn to_q(self) -> P4 {
        P4 {
            x: self.x * 2,
            y: self.y * 2,
        }
    }
}

/// A point on the quarter-integer lattice, both coordinates quadrupled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct P4 {
    pub x: i64,
    pub y: i64,
}

impl P4 {
    /// The membership point of a cell: `(x + 3/4, y + 3/4)`.
    ///
    /// Assigning a cell to the region containing this point implements the
    /// "right / upward" tie rule for cells cut by half-integer or diagonal
    /// feature boundaries: the point is strictly right of and above any
    /// half-integer line through the cell interior.
    pub const fn membership_point(cx: i32, cy: i32) -> Self {
        P4 {
            x: cx as i64 * 4 + 3,
            y: cy as i64 * 4 + 3,
        }
    }
}

/// Axis-aligned half-open rectangle `[x0, x1) x [y0, y1)` in cell coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Rect {
    pub const fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i32 {
        self.y1 - self.y0
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }

    pub fn area(&self) -> i64 {
        if self.is_empty() {
            0
        } else {
            self.width() as i64 * self.height() as i64
        }
    }

    pub fn contains_cell(&self, x: i32, y: i32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    /// Whether `other` lies inside `self` (cellwise).
    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.is_empty()
            || (other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1)
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        }
    }

    /// Shrink by `m` cells on every side.
    pub fn shrink(&self, m: i32) -> Rect {
        Rect {
            x0: self.x0 + m,
            y0: self.y0 + m,
            x1: self.x1 - m,
            y1: self.y1 - m,
        }
    }

    /// Closure of `self` contains the closure of `other` with the closures
    /// taken in the plane (corner contact counts as inside).
    pub fn closure_contains(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let r = *self;
        (r.y0..r.y1).flat_map(move |y| (r.x0..r.x1).map(move |x| (x, y)))
    }

    /// Corners of the closed rectangle as doubled points, counterclockwise
    /// from the lower-left.
    pub fn corners2(&self) -> [P2; 4] {
        [
            P2::from_int(self.x0, self.y0),
            P2::from_int(self.x1, self.y0),
            P2::from_int(self.x1, self.y1),
            P2::from_int(self.x0, self.y1),
        ]
    }

    /// Center of mass, doubled (always exact).
    pub fn center2(&self) -> P2 {
        P2::new(self.x0 as i64 + self.x1 as i64, self.y0 as i64 + self.y1 as i64)
    }

    /// Counterclockwise polygon of the closed rectangle, doubled coordinates.
    pub fn polygon2(&self) -> Vec<P2> {
        self.corners2().to_vec()
    }
}

/// A closed segment with doubled endpoints. Degenerate (a == b) segments are
/// allowed and represent single points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Seg2 {
    pub a: P2,
    pub b: P2,
}

impl Seg2 {
    pub fn new(a: P2, b: P2) -> Self {
        Seg2 { a, b }
    }

    pub fn is_point(&self) -> bool {
        self.a == self.b
    }

    pub fn midpoint(&self) -> P2 {
        // Endpoints are half-integral, so the midpoint is quarter-integral in
        // general; axes and side intersections always have even sums.
        debug_assert!((self.a.x + self.b.x) % 2 == 0 && (self.a.y + self.b.y) % 2 == 0);
        P2::new((self.a.x + self.b.x) / 2, (self.a.y + self.b.y) / 2)
    }

    pub fn len_sq_x4(&self) -> i64 {
        let dx = self.b.x - self.a.x;
        let dy = self.b.y - self.a.y;
        dx * dx + dy * dy
    }
}

/// Intersection of two closed axis-aligned rectangles given by doubled
/// corner bounds; returns the (possibly degenerate) overlap, or None.
pub fn closed_rect_intersection2(
    a: (P2, P2), // (min corner, max corner), doubled
    b: (P2, P2),
) -> Option<(P2, P2)> {
    let x0 = a.0.x.max(b.0.x);
    let y0 = a.0.y.max(b.0.y);
    let x1 = a.1.x.min(b.1.x);
    let y1 = a.1.y.min(b.1.y);
    if x0 <= x1 && y0 <= y1 {
        Some((P2::new(x0, y0), P2::new(x1, y1)))
    } else {
        None
    }
}

pub fn cross(ax: i64, ay: i64, bx: i64, by: i64) -> i64 {
    ax * by - ay * bx
}

/// Pseudo-angle half: 0 for directions with angle in [0, pi), 1 otherwise.
/// The zero direction is not a valid input.
fn angle_half(x: i64, y: i64) -> u8 {
    debug_assert!(x != 0 || y != 0);
    if y > 0 || (y == 0 && x > 0) {
        0
    } else {
        1
    }
}

/// Compare two non-zero direction vectors by angle in [0, 2*pi), counted
/// counterclockwise from the positive x axis.
pub fn dir_cmp(a: (i64, i64), b: (i64, i64)) -> std::cmp::Ordering {
    let (ha, hb) = (angle_half(a.0, a.1), angle_half(b.0, b.1));
    ha.cmp(&hb).then_with(|| {
        let c = cross(a.0, a.1, b.0, b.1);
        // Same half-turn: c > 0 means a comes first.
        c.cmp(&0).reverse()
    })
}

/// Result of locating a direction among the sorted wedge rays of a cross
/// decoration.
pub enum WedgePos {
    /// Strictly inside the wedge that starts at ray `i` (counterclockwise).
    Inside(usize),
    /// Exactly on ray `i`.
    OnRay(usize),
}

/// Locate direction `q` among `rays` (non-zero vectors sorted strictly
/// counterclockwise starting anywhere). `q` must be non-zero.
pub fn locate_in_wedges(rays: &[(i64, i64)], q: (i64, i64)) -> WedgePos {
    debug_assert!(rays.len() >= 2);
    for (i, &r) in rays.iter().enumerate() {
        if cross(r.0, r.1, q.0, q.1) == 0 && r.0 * q.0 + r.1 * q.1 > 0 {
            return WedgePos::OnRay(i);
        }
    }
    // q is strictly between two consecutive rays (cyclically).
    for i in 0..rays.len() {
        let a = rays[i];
        let b = rays[(i + 1) % rays.len()];
        if dir_between_ccw(a, q, b) {
            return WedgePos::Inside(i);
        }
    }
    // Unreachable for a valid cyclic ray arrangement; attribute to wedge 0.
    WedgePos::Inside(0)
}

/// Whether `q` lies strictly inside the counterclockwise wedge from `a` to `b`.
fn dir_between_ccw(a: (i64, i64), q: (i64, i64), b: (i64, i64)) -> bool {
    let cab = cross(a.0, a.1, b.0, b.1);
    let caq = cross(a.0, a.1, q.0, q.1);
    let cqb = cross(q.0, q.1, b.0, b.1);
    let dot_ab = a.0 * b.0 + a.1 * b.1;
    if cab > 0 {
        caq > 0 && cqb > 0
    } else if cab < 0 {
        caq > 0 || cqb > 0
    } else if dot_ab < 0 {
        // Opposite rays: the wedge is an open half plane on the left of a.
        caq > 0
    } else {
        // Identical rays: full turn.
        true
    }
}

/// For a query exactly on a decoration ray, pick the sector per the
/// right / upward rule: rays pointing into the closed upper half plane
/// (angle in (0, pi]) send the point to the clockwise side, the rest to the
/// counterclockwise side.
pub fn on_ray_side_cw(dir: (i64, i64)) -> bool {
    dir.1 > 0 || (dir.1 == 0 && dir.0 < 0)
}

/// Twice the signed area of a polygon with doubled coordinates, i.e.
/// 8 x the real area. Counterclockwise polygons give positive values.
pub fn shoelace2(poly: &[P2]) -> i64 {
    let mut s = 0i64;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        s += cross(p.x, p.y, q.x, q.y);
    }
    s
}

/// Area of a counterclockwise polygon (doubled coords) in eighth-cell
/// units. Diagonal decoration edges between half-integer points make
/// eighths the finest granularity that occurs.
pub fn area_eighths(poly: &[P2]) -> i64 {
    let s = shoelace2(poly);
    debug_assert!(s >= 0, "polygon must be counterclockwise");
    s
}

/// A directed boundary edge of a region, doubled coordinates.
pub type DirEdge = (P2, P2);

/// Boundary of a union of interior-disjoint counterclockwise polygons.
///
/// Every edge shared (with opposite orientations) between two pieces cancels,
/// including partial overlaps, which are split at all endpoints involved.
/// The result is the set of directed boundary edges of the union.
pub fn union_boundary(pieces: &[Vec<P2>]) -> Vec<DirEdge> {
    use std::collections::BTreeMap;

    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    struct LineKey {
        ux: i64,
        uy: i64,
        off: i64,
    }

    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }

    // Per line: weighted intervals (t0, t1, w) with t0 < t1, plus the point
    // realizing each breakpoint t.
    type LineData = (Vec<(i64, i64, i64)>, BTreeMap<i64, P2>);
    let mut lines: BTreeMap<LineKey, LineData> = BTreeMap::new();

    for poly in pieces {
        let n = poly.len();
        for i in 0..n {
            let p = poly[i];
            let q = poly[(i + 1) % n];
            if p == q {
                continue;
            }
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            let g = gcd(dx, dy);
            let (mut ux, mut uy) = (dx / g, dy / g);
            let mut w = 1i64;
            if angle_half(ux, uy) == 1 {
                ux = -ux;
                uy = -uy;
                w = -1;
            }
            let off = cross(ux, uy, p.x, p.y);
            let (tp, tq) = (ux * p.x + uy * p.y, ux * q.x + uy * q.y);
            let (t0, t1, p0, p1) = if tp < tq { (tp, tq, p, q) } else { (tq, tp, q, p) };
            let entry = lines.entry(LineKey { ux, uy, off }).or_default();
            entry.0.push((t0, t1, w));
            entry.1.insert(t0, p0);
            entry.1.insert(t1, p1);
        }
    }

    let mut out = Vec::new();
    for (_, (intervals, pts)) in lines {
        let ts: Vec<(i64, P2)> = pts.into_iter().collect();
        for w in ts.windows(2) {
            let (t0, p0) = w[0];
            let (t1, p1) = w[1];
            let net: i64 = intervals
                .iter()
                .filter(|&&(a, b, _)| a <= t0 && b >= t1)
                .map(|&(_, _, w)| w)
                .sum();
            match net {
                0 => {}
                1 => out.push((p0, p1)),
                -1 => out.push((p1, p0)),
                _ => {
                    // Interior-disjoint pieces can never stack boundary in
                    // the same direction; treat as a single edge but keep the
                    // direction so downstream checks can flag the anomaly.
                    if net > 0 {
                        out.push((p0, p1));
                    } else {
                        out.push((p1, p0));
                    }
                }
            }
        }
    }
    out
}

/// Euclidean length of a set of doubled-coordinate edges, in cell units.
pub fn edges_length(edges: &[DirEdge]) -> f64 {
    edges
        .iter()
        .map(|&(a, b)| {
            let dx = (b.x - a.x) as f64;
            let dy = (b.y - a.y) as f64;
            (dx * dx + dy * dy).sqrt() / 2.0
        })
        .sum()
}

/// Chain directed boundary edges into closed rings. At vertices with more
/// than one outgoing edge the most-counterclockwise continuation is chosen,
/// which resolves pinch points deterministically.
pub fn chain_rings(edges: &[DirEdge]) -> Vec<Vec<P2>> {
    use std::collections::BTreeMap;
    let mut outgoing: BTreeMap<P2, Vec<usize>> = BTreeMap::new();
    for (i, &(a, _)) in edges.iter().enumerate() {
        outgoing.entry(a).or_default().push(i);
    }
    let mut used = vec![false; edges.len()];
    let mut rings = Vec::new();
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        let mut ring = Vec::new();
        let mut cur = start;
        loop {
            used[cur] = true;
            let (a, b) = edges[cur];
            ring.push(a);
            let cands = match outgoing.get(&b) {
                Some(c) => c,
                None => break, // open chain: malformed input, emit as-is
            };
            let incoming = (b.x - a.x, b.y - a.y);
            let back = (-incoming.0, -incoming.1);
            // Sharpest left turn: smallest clockwise angle from the reversed
            // incoming direction.
            let mut best: Option<(usize, (i64, i64))> = None;
            for &ci in cands {
                if used[ci] {
                    continue;
                }
                let (ca, cb) = edges[ci];
                debug_assert_eq!(ca, b);
                let d = (cb.x - ca.x, cb.y - ca.y);
                best = match best {
                    None => Some((ci, d)),
                    Some((bi, bd)) => {
                        if ccw_turn_rank(back, d, bd) {
                            Some((ci, d))
                        } else {
                            Some((bi, bd))
                        }
                    }
                };
            }
            match best {
                Some((ci, _)) => {
                    cur = ci;
                    if ci == start {
                        break;
                    }
                }
                None => break,
            }
        }
        if ring.len() >= 3 {
            rings.push(ring);
        }
    }
    rings
}

/// True if direction `d` is a tighter counterclockwise turn from `reference`
/// than `other` is.
fn ccw_turn_rank(reference: (i64, i64), d: (i64, i64), other: (i64, i64)) -> bool {
    // Rank directions by clockwise angle from `reference`, smallest first.
    let rank = |v: (i64, i64)| -> (u8, i64) {
        let c = cross(reference.0, reference.1, v.0, v.1);
        let dot = reference.0 * v.0 + reference.1 * v.1;
        // Clockwise from reference: c < 0 first (0..pi), then opposite, then
        // counterclockwise side.
        if c < 0 {
            (0, -dot)
        } else if c == 0 && dot < 0 {
            (1, 0)
        } else if c == 0 {
            (3, 0)
        } else {
            (2, dot)
        }
    };
    rank(d) < rank(other)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_poly(x0: i32, y0: i32, x1: i32, y1: i32) -> Vec<P2> {
        Rect::new(x0, y0, x1, y1).polygon2()
    }

    #[test]
    fn shoelace_unit_square() {
        let p = rect_poly(0, 0, 1, 1);
        assert_eq!(area_eighths(&p), 8);
    }

    #[test]
    fn union_two_squares_shared_edge() {
        let a = rect_poly(0, 0, 1, 1);
        let b = rect_poly(1, 0, 2, 1);
        let edges = union_boundary(&[a, b]);
        // Shared edge x=1 cancels; boundary length is the 2x1 rectangle's.
        let len = edges_length(&edges);
        assert_eq!(len, 6.0);
        let rings = chain_rings(&edges);
        assert_eq!(rings.len(), 1);
    }

    #[test]
    fn union_partial_edge_overlap() {
        // 3x3 square with a 1x1 square attached to part of its right side.
        let a = rect_poly(0, 0, 3, 3);
        let b = rect_poly(3, 1, 4, 2);
        let edges = union_boundary(&[a, b]);
        let len = edges_length(&edges);
        assert_eq!(len, 12.0 + 2.0);
    }

    #[test]
    fn wedge_location_cardinals() {
        // Rays east, north, west, south.
        let rays = [(1i64, 0i64), (0, 1), (-1, 0), (0, -1)];
        match locate_in_wedges(&rays, (1, 1)) {
            WedgePos::Inside(0) => {}
            _ => panic!("NE quadrant should be wedge 0"),
        }
        match locate_in_wedges(&rays, (0, 5)) {
            WedgePos::OnRay(1) => {}
            _ => panic!("on north ray"),
        }
        match locate_in_wedges(&rays, (-2, -1)) {
            WedgePos::Inside(2) => {}
            _ => panic!("SW-ish should be wedge 2"),
        }
    }

    #[test]
    fn on_ray_rule_matches_right_up() {
        // Up ray: cell goes right = clockwise side.
        assert!(on_ray_side_cw((0, 1)));
        // Right ray: cell goes above = counterclockwise side.
        assert!(!on_ray_side_cw((1, 0)));
        // Down ray: right side is the counterclockwise side.
        assert!(!on_ray_side_cw((0, -1)));
        // Left ray: above is the clockwise side.
        assert!(on_ray_side_cw((-1, 0)));
    }

    #[test]
    fn dir_cmp_orders_counterclockwise() {
        let mut dirs = vec![(0i64, -1i64), (1, 0), (-1, 0), (0, 1), (1, 1)];
        dirs.sort_by(|a, b| dir_cmp(*a, *b));
        assert_eq!(dirs, vec![(1, 0), (1, 1), (0, 1), (-1, 0), (0, -1)]);
    }
}
