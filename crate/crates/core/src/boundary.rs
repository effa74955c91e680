//! Boundary graphs of the supertile hierarchy: per-level graphs, the
//! persistent boundary, virtual arms and crosses, tree classification, roots,
//! and stratification.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::decomposition::Orientation;
use crate::error::{Error, Result};
use crate::geom::{P2, Rect, Seg2};
use crate::inflation::InflationHierarchy;

/// Set of unit grid edges over a window, as per-cell bit masks.
#[derive(Clone, Debug)]
pub struct EdgeSet {
    bounds: Rect,
    /// Bit per cell: vertical edge between (x, y) and (x+1, y).
    right: Vec<u64>,
    /// Bit per cell: horizontal edge between (x, y) and (x, y+1).
    top: Vec<u64>,
}

impl EdgeSet {
    pub fn empty(bounds: Rect) -> Self {
        let words = (bounds.area() as usize).div_ceil(64);
        EdgeSet {
            bounds,
            right: vec![0; words],
            top: vec![0; words],
        }
    }

    fn bit(&self, x: i32, y: i32) -> Option<(usize, u64)> {
        if !self.bounds.contains_cell(x, y) {
            return None;
        }
        let i = (y - self.bounds.y0) as usize * self.bounds.width() as usize
            + (x - self.bounds.x0) as usize;
        Some((i / 64, 1u64 << (i % 64)))
    }

    pub fn set_right(&mut self, x: i32, y: i32) {
        if let Some((w, m)) = self.bit(x, y) {
            self.right[w] |= m;
        }
    }

    pub fn set_top(&mut self, x: i32, y: i32) {
        if let Some((w, m)) = self.bit(x, y) {
            self.top[w] |= m;
        }
    }

    pub fn has_right(&self, x: i32, y: i32) -> bool {
        self.bit(x, y).is_some_and(|(w, m)| self.right[w] & m != 0)
    }

    pub fn has_top(&self, x: i32, y: i32) -> bool {
        self.bit(x, y).is_some_and(|(w, m)| self.top[w] & m != 0)
    }

    pub fn intersect(&self, other: &EdgeSet) -> EdgeSet {
        assert_eq!(self.bounds, other.bounds);
        EdgeSet {
            bounds: self.bounds,
            right: self
                .right
                .iter()
                .zip(&other.right)
                .map(|(a, b)| a & b)
                .collect(),
            top: self.top.iter().zip(&other.top).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &EdgeSet) -> bool {
        self.bounds == other.bounds
            && self
                .right
                .iter()
                .zip(&other.right)
                .all(|(a, b)| a & !b == 0)
            && self.top.iter().zip(&other.top).all(|(a, b)| a & !b == 0)
    }

    pub fn count(&self) -> u64 {
        self.right.iter().map(|w| w.count_ones() as u64).sum::<u64>()
            + self.top.iter().map(|w| w.count_ones() as u64).sum::<u64>()
    }

    /// Edges as cell pairs `((x, y), (x', y'))`, lower/left cell first.
    pub fn edges(&self) -> Vec<((i32, i32), (i32, i32))> {
        let mut out = Vec::new();
        for y in self.bounds.y0..self.bounds.y1 {
            for x in self.bounds.x0..self.bounds.x1 {
                if self.has_right(x, y) {
                    out.push(((x, y), (x + 1, y)));
                }
                if self.has_top(x, y) {
                    out.push(((x, y), (x, y + 1)));
                }
            }
        }
        out
    }
}

/// Which tiling a boundary graph separates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphLevel {
    /// Level n of the hierarchy; level 0 is the unit-cell tiling.
    Level(usize),
    Persistent,
}

/// Grid-edge graph separating distinct supertiles of one level, or the
/// intersection over all levels.
#[derive(Clone, Debug)]
pub struct BoundaryGraph {
    pub level: GraphLevel,
    pub edges: EdgeSet,
    /// Edges with both cells inside this rect are trusted.
    pub trusted: Rect,
}

impl BoundaryGraph {
    pub fn bounds(&self) -> Rect {
        self.edges.bounds
    }

    /// Degree of the grid vertex (x, y).
    pub fn degree(&self, x: i32, y: i32) -> u32 {
        let mut d = 0;
        if self.edges.has_right(x - 1, y - 1) {
            d += 1; // downward
        }
        if self.edges.has_right(x - 1, y) {
            d += 1; // upward
        }
        if self.edges.has_top(x - 1, y - 1) {
            d += 1; // leftward
        }
        if self.edges.has_top(x, y - 1) {
            d += 1; // rightward
        }
        d
    }

    /// Whether every incident edge of the vertex is inside the trusted rect.
    pub fn vertex_interior_trusted(&self, x: i32, y: i32) -> bool {
        let t = self.trusted;
        x > t.x0 && x < t.x1 && y > t.y0 && y < t.y1
    }

    /// Neighboring vertices along graph edges.
    pub fn vertex_neighbors(&self, x: i32, y: i32) -> Vec<(i32, i32)> {
        let mut out = Vec::new();
        if self.edges.has_right(x - 1, y - 1) {
            out.push((x, y - 1));
        }
        if self.edges.has_right(x - 1, y) {
            out.push((x, y + 1));
        }
        if self.edges.has_top(x - 1, y - 1) {
            out.push((x - 1, y));
        }
        if self.edges.has_top(x, y - 1) {
            out.push((x + 1, y));
        }
        out
    }

    /// Count of trusted edges.
    pub fn trusted_edge_count(&self) -> u64 {
        let mut n = 0;
        let t = self.trusted;
        for y in t.y0..t.y1 {
            for x in t.x0..t.x1 {
                if x + 1 < t.x1 && self.edges.has_right(x, y) {
                    n += 1;
                }
                if y + 1 < t.y1 && self.edges.has_top(x, y) {
                    n += 1;
                }
            }
        }
        n
    }
}

/// Grid edges separating two distinct level-n supertiles. Level 0 returns
/// every interior edge: each unit tile is its own class.
pub fn extract_boundary_graph(hier: &InflationHierarchy, level: usize) -> BoundaryGraph {
    let b = hier.window.bounds();
    let mut edges = EdgeSet::empty(b);
    if level == 0 {
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                if x + 1 < b.x1 {
                    edges.set_right(x, y);
                }
                if y + 1 < b.y1 {
                    edges.set_top(x, y);
                }
            }
        }
        return BoundaryGraph {
            level: GraphLevel::Level(0),
            edges,
            trusted: b,
        };
    }
    let lv = &hier.levels[level - 1];
    let at = |x: i32, y: i32| -> u32 {
        if b.contains_cell(x, y) {
            lv.assignment[hier.window.cell_index(x, y) as usize]
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
            let r = at(x + 1, y);
            if r != 0 && r != s {
                edges.set_right(x, y);
            }
            let t = at(x, y + 1);
            if t != 0 && t != s {
                edges.set_top(x, y);
            }
        }
    }
    BoundaryGraph {
        level: GraphLevel::Level(level),
        edges,
        trusted: lv.guaranteed,
    }
}

/// Edge-set intersection over all built levels; asserts the tree properties
/// (no terminal vertices, acyclic) on the trusted region.
pub fn persistent_boundary(hier: &InflationHierarchy) -> Result<BoundaryGraph> {
    let graphs: Vec<BoundaryGraph> = (1..=hier.levels.len())
        .map(|l| extract_boundary_graph(hier, l))
        .collect();
    let b = hier.window.bounds();
    let mut edges = match graphs.first() {
        Some(g) => g.edges.clone(),
        None => extract_boundary_graph(hier, 0).edges,
    };
    for g in graphs.iter().skip(1) {
        edges = edges.intersect(&g.edges);
    }
    let trusted = graphs.last().map(|g| g.trusted).unwrap_or(b);
    let graph = BoundaryGraph {
        level: GraphLevel::Persistent,
        edges,
        trusted,
    };
    validate_tree_properties(&graph)?;
    Ok(graph)
}

/// No terminal vertices, no cycles, among interior-trusted vertices.
fn validate_tree_properties(g: &BoundaryGraph) -> Result<()> {
    let t = g.trusted;
    if t.is_empty() {
        return Ok(());
    }
    // Terminal vertices.
    for y in t.y0 + 1..t.y1 {
        for x in t.x0 + 1..t.x1 {
            if g.degree(x, y) == 1 {
                return Err(Error::TerminalVertex { x, y });
            }
        }
    }
    // Cycles within the interior-trusted subgraph (DFS with parent edges).
    let mut visited: BTreeSet<(i32, i32)> = BTreeSet::new();
    for y in t.y0 + 1..t.y1 {
        for x in t.x0 + 1..t.x1 {
            if g.degree(x, y) == 0 || visited.contains(&(x, y)) {
                continue;
            }
            // Iterative DFS.
            let mut stack = vec![((x, y), (i32::MIN, i32::MIN))];
            visited.insert((x, y));
            while let Some(((cx, cy), parent)) = stack.pop() {
                for nb in g.vertex_neighbors(cx, cy) {
                    if !g.vertex_interior_trusted(nb.0, nb.1) {
                        continue;
                    }
                    if nb == parent {
                        continue;
                    }
                    if visited.contains(&nb) {
                        return Err(Error::BoundaryCycle { x: nb.0, y: nb.1 });
                    }
                    visited.insert(nb);
                    stack.push((nb, (cx, cy)));
                }
            }
        }
    }
    Ok(())
}

/// Connected components of the trusted cells with adjacency blocked by the
/// graph's edges.
pub fn count_components(g: &BoundaryGraph) -> u32 {
    let t = g.trusted;
    if t.is_empty() {
        return 0;
    }
    let w = t.width() as usize;
    let idx = |x: i32, y: i32| (y - t.y0) as usize * w + (x - t.x0) as usize;
    let mut seen = vec![false; w * t.height() as usize];
    let mut comps = 0;
    for y in t.y0..t.y1 {
        for x in t.x0..t.x1 {
            if seen[idx(x, y)] {
                continue;
            }
            comps += 1;
            let mut queue = VecDeque::new();
            queue.push_back((x, y));
            seen[idx(x, y)] = true;
            while let Some((cx, cy)) = queue.pop_front() {
                let mut push = |nx: i32, ny: i32, blocked: bool| {
                    if !blocked && t.contains_cell(nx, ny) && !seen[idx(nx, ny)] {
                        seen[idx(nx, ny)] = true;
                        queue.push_back((nx, ny));
                    }
                };
                push(cx + 1, cy, g.edges.has_right(cx, cy));
                push(cx - 1, cy, g.edges.has_right(cx - 1, cy));
                push(cx, cy + 1, g.edges.has_top(cx, cy));
                push(cx, cy - 1, g.edges.has_top(cx, cy - 1));
            }
        }
    }
    comps
}

// ---------------------------------------------------------------------------
// Virtual features
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VirtualKind {
    Arm,
    Cross,
}

/// A sequence of per-level witnesses confined to a constant-size ribbon or
/// box.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VirtualFeature {
    pub kind: VirtualKind,
    /// (level, witness): axis segments for arms, centers (degenerate
    /// segments) for crosses. Levels are 1-based.
    pub witnesses: Vec<(usize, Seg2)>,
    /// Bounding box of the witnesses, doubled coordinates.
    pub bbox: (P2, P2),
    pub levels_observed: usize,
    /// Minimum total exit multiplicity over witness crosses (crosses only).
    pub min_exit_multiplicity: u32,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundaryConfig {
    /// Side of the confinement box / width of the ribbon, in cells.
    pub box_size: u32,
    /// Witnesses must persist over at least this many consecutive levels.
    pub min_levels: usize,
}

impl BoundaryConfig {
    pub fn for_first_side(n1: u32) -> Self {
        BoundaryConfig {
            box_size: 2 * n1,
            min_levels: 3,
        }
    }
}

fn linf(a: P2, b: P2) -> i64 {
    (a.x - b.x).abs().max((a.y - b.y).abs())
}

/// Detect virtual arms and crosses by checking per-level axes and centers
/// against constant-size ribbons and boxes seeded from the top level.
pub fn detect_virtual_features(
    hier: &InflationHierarchy,
    config: &BoundaryConfig,
) -> Vec<VirtualFeature> {
    let mut features = Vec::new();
    if hier.levels.len() < config.min_levels {
        return features;
    }
    let top = hier.levels.last().unwrap();
    let max_spread = 2 * config.box_size as i64; // doubled coordinates

    // Virtual crosses.
    let mut seen_cross: BTreeSet<Vec<P2>> = BTreeSet::new();
    for seed in top.decomposition.crosses.iter().filter(|c| c.trusted) {
        let mut witnesses = Vec::new();
        let mut centers = Vec::new();
        let mut min_mult = u32::MAX;
        let mut ok = true;
        for (li, level) in hier.levels.iter().enumerate() {
            let best = level
                .decomposition
                .crosses
                .iter()
                .filter(|c| c.trusted)
                .min_by_key(|c| (linf(c.center, seed.center), c.center));
            match best {
                Some(c) => {
                    witnesses.push((li + 1, Seg2::new(c.center, c.center)));
                    centers.push(c.center);
                    min_mult = min_mult.min(c.total_exit_multiplicity());
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let xs: Vec<i64> = centers.iter().map(|p| p.x).collect();
        let ys: Vec<i64> = centers.iter().map(|p| p.y).collect();
        let bbox = (
            P2::new(*xs.iter().min().unwrap(), *ys.iter().min().unwrap()),
            P2::new(*xs.iter().max().unwrap(), *ys.iter().max().unwrap()),
        );
        if (bbox.1.x - bbox.0.x).max(bbox.1.y - bbox.0.y) > max_spread {
            continue;
        }
        if seen_cross.insert(centers) {
            features.push(VirtualFeature {
                kind: VirtualKind::Cross,
                witnesses,
                bbox,
                levels_observed: hier.levels.len(),
                min_exit_multiplicity: min_mult,
            });
        }
    }

    // Virtual arms: vertical axes confined to vertical ribbons, horizontal
    // axes to horizontal ribbons.
    let mut seen_arm: BTreeSet<Vec<Seg2>> = BTreeSet::new();
    for seed in top.decomposition.arms.iter().filter(|a| a.trusted) {
        let seed_line = match seed.orientation {
            Orientation::Horizontal => seed.axis.a.x,
            Orientation::Vertical => seed.axis.a.y,
        };
        let mut witnesses = Vec::new();
        let mut axes = Vec::new();
        let mut lines = Vec::new();
        let mut ok = true;
        for (li, level) in hier.levels.iter().enumerate() {
            let best = level
                .decomposition
                .arms
                .iter()
                .filter(|a| a.trusted && a.orientation == seed.orientation)
                .min_by_key(|a| {
                    let line = match a.orientation {
                        Orientation::Horizontal => a.axis.a.x,
                        Orientation::Vertical => a.axis.a.y,
                    };
                    ((line - seed_line).abs(), a.axis.a, a.axis.b)
                });
            match best {
                Some(a) => {
                    let line = match a.orientation {
                        Orientation::Horizontal => a.axis.a.x,
                        Orientation::Vertical => a.axis.a.y,
                    };
                    witnesses.push((li + 1, a.axis));
                    axes.push(a.axis);
                    lines.push(line);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let spread = lines.iter().max().unwrap() - lines.iter().min().unwrap();
        if spread > max_spread {
            continue;
        }
        let bbox = witness_bbox(&axes);
        if seen_arm.insert(axes) {
            features.push(VirtualFeature {
                kind: VirtualKind::Arm,
                witnesses,
                bbox,
                levels_observed: hier.levels.len(),
                min_exit_multiplicity: 0,
            });
        }
    }
    features
}

fn witness_bbox(axes: &[Seg2]) -> (P2, P2) {
    let mut x0 = i64::MAX;
    let mut y0 = i64::MAX;
    let mut x1 = i64::MIN;
    let mut y1 = i64::MIN;
    for s in axes {
        for p in [s.a, s.b] {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
    }
    (P2::new(x0, y0), P2::new(x1, y1))
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    /// Neither axes nor virtual crosses: the boundary misses this window.
    Case1,
    /// A virtual arm only: two ends.
    Case2,
    /// A single virtual cross with three exits.
    Case3ThreeExits,
    /// A single virtual cross with four exits.
    Case3FourExits,
    /// Two virtual crosses: four ends, two roots.
    Case4,
    /// Too few levels to distinguish; never guessed.
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryClass {
    pub case_tag: CaseTag,
    /// Expected number of ends of the boundary tree (absent when
    /// undetermined; 0 for case 1).
    pub ends: Option<u32>,
    /// Measured components of the trusted window minus the persistent
    /// boundary.
    pub component_count: u32,
}

impl BoundaryClass {
    pub fn expected_components(&self) -> Option<u32> {
        self.ends.map(|e| e.max(1))
    }
}

/// Classify the boundary configuration from the persistent graph and the
/// detected virtual features.
pub fn classify_boundary(
    hier: &InflationHierarchy,
    features: &[VirtualFeature],
    config: &BoundaryConfig,
) -> Result<BoundaryClass> {
    let pb = persistent_boundary(hier)?;
    let component_count = count_components(&pb);
    if pb.trusted_edge_count() == 0 {
        return Ok(BoundaryClass {
            case_tag: CaseTag::Case1,
            ends: Some(0),
            component_count,
        });
    }
    if hier.levels.len() < config.min_levels {
        return Ok(BoundaryClass {
            case_tag: CaseTag::Undetermined,
            ends: None,
            component_count,
        });
    }
    let crosses: Vec<&VirtualFeature> = features
        .iter()
        .filter(|f| f.kind == VirtualKind::Cross)
        .collect();
    let arms = features.iter().any(|f| f.kind == VirtualKind::Arm);
    let (case_tag, ends) = match crosses.len() {
        0 if arms => (CaseTag::Case2, Some(2)),
        0 => (CaseTag::Undetermined, None),
        1 => {
            if crosses[0].min_exit_multiplicity >= 4 {
                (CaseTag::Case3FourExits, Some(4))
            } else {
                (CaseTag::Case3ThreeExits, Some(3))
            }
        }
        2 => (CaseTag::Case4, Some(4)),
        _ => (CaseTag::Undetermined, None),
    };
    Ok(BoundaryClass {
        case_tag,
        ends,
        component_count,
    })
}

// ---------------------------------------------------------------------------
// Roots and strata
// ---------------------------------------------------------------------------

/// Roots of the persistent tree with their basic patches and degree data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootData {
    /// One or two grid points of degree >= 3.
    pub roots: Vec<(i32, i32)>,
    /// Per level (1-based index = position + 1): the supertile ids of the
    /// basic patch around the root(s), merged when the two roots' patches
    /// intersect.
    pub basic_patches: Vec<Vec<u32>>,
    /// Per level: D, the number of tiles of the basic patch.
    pub degree_sequence: Vec<u8>,
    /// Tree distance between the two roots, when there are two.
    pub root_distance: Option<u32>,
}

/// Locate the degree->=3 vertices of the trusted persistent boundary and
/// compute the per-level basic patches around them.
pub fn find_roots(hier: &InflationHierarchy) -> Result<RootData> {
    let pb = persistent_boundary(hier)?;
    let t = pb.trusted;
    let mut roots = Vec::new();
    for y in t.y0 + 1..t.y1 {
        for x in t.x0 + 1..t.x1 {
            if pb.degree(x, y) >= 3 {
                roots.push((x, y));
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::NoRoot);
    }
    if roots.len() > 2 {
        return Err(Error::TooManyRoots { count: roots.len() });
    }

    let mut basic_patches = Vec::new();
    let mut degree_sequence = Vec::new();
    for level in 1..=hier.levels.len() {
        let lv = &hier.levels[level - 1];
        let patch_of = |root: (i32, i32)| -> Vec<u32> {
            let (x, y) = root;
            let mut ids = BTreeSet::new();
            for (cx, cy) in [(x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)] {
                if hier.window.bounds().contains_cell(cx, cy) {
                    let v = lv.assignment[hier.window.cell_index(cx, cy) as usize];
                    if v != 0 {
                        ids.insert(v - 1);
                    }
                }
            }
            ids.into_iter().collect()
        };
        let p0: Vec<u32> = patch_of(roots[0]);
        let patch: Vec<u32> = if roots.len() == 2 {
            let p1 = patch_of(roots[1]);
            let s0: BTreeSet<u32> = p0.iter().copied().collect();
            let s1: BTreeSet<u32> = p1.iter().copied().collect();
            if s0.intersection(&s1).next().is_some() {
                s0.union(&s1).copied().collect()
            } else {
                // Disjoint patches at this level: each root sees its own
                // three tiles.
                p0
            }
        } else {
            p0
        };
        degree_sequence.push(patch.len() as u8);
        basic_patches.push(patch);
    }

    let root_distance = if roots.len() == 2 {
        Some(tree_distance(&pb, roots[0], roots[1])?)
    } else {
        None
    };
    Ok(RootData {
        roots,
        basic_patches,
        degree_sequence,
        root_distance,
    })
}

fn tree_distance(g: &BoundaryGraph, a: (i32, i32), b: (i32, i32)) -> Result<u32> {
    let mut dist: BTreeMap<(i32, i32), u32> = BTreeMap::new();
    let mut queue = VecDeque::new();
    dist.insert(a, 0);
    queue.push_back(a);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if v == b {
            return Ok(d);
        }
        for nb in g.vertex_neighbors(v.0, v.1) {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(nb) {
                e.insert(d + 1);
                queue.push_back(nb);
            }
        }
    }
    Err(Error::InvalidConfig(
        "roots are not connected in the persistent boundary".into(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratumLabel {
    /// Two ends.
    H2,
    /// Degree sequence constant 3 from level m+1 on (m is 0-based after
    /// level one).
    H3 { m: u32 },
    /// One root of degree four at all observed levels (ell = 0), or two
    /// roots at tree distance ell.
    H4 { ell: u32 },
    /// The boundary misses the window.
    Interior,
    /// Not enough levels observed; the blocking level is named.
    Undetermined { blocking_level: u32 },
}

/// Assign the stratum from a classification and (for >= 3 ends) root data.
pub fn stratify(
    class: &BoundaryClass,
    roots: Option<&RootData>,
    levels_observed: usize,
) -> StratumLabel {
    match class.case_tag {
        CaseTag::Case1 => return StratumLabel::Interior,
        CaseTag::Case2 => return StratumLabel::H2,
        CaseTag::Undetermined => {
            return StratumLabel::Undetermined {
                blocking_level: levels_observed as u32 + 1,
            }
        }
        _ => {}
    }
    let rd = match roots {
        Some(rd) => rd,
        None => {
            return StratumLabel::Undetermined {
                blocking_level: levels_observed as u32 + 1,
            }
        }
    };
    if rd.roots.len() == 2 {
        return StratumLabel::H4 {
            ell: rd.root_distance.unwrap_or(0),
        };
    }
    let seq = &rd.degree_sequence;
    if seq.is_empty() || levels_observed < 3 {
        return StratumLabel::Undetermined {
            blocking_level: levels_observed as u32 + 1,
        };
    }
    if seq.iter().all(|&d| d == 4) {
        return StratumLabel::H4 { ell: 0 };
    }
    // Minimal m with D = 3 for all observed n >= m (1-based levels); the
    // stratum index is 0-based after level one.
    let mut first_stable = None;
    for i in (0..seq.len()).rev() {
        if seq[i] == 3 {
            first_stable = Some(i);
        } else {
            break;
        }
    }
    match first_stable {
        Some(i) if seq[i..].iter().all(|&d| d == 3) => StratumLabel::H3 { m: i as u32 },
        _ => StratumLabel::Undetermined {
            blocking_level: levels_observed as u32 + 1,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::SquarePlacement;
    use crate::inflation::push_level_from_squares;
    use crate::tiling::TilingWindow;

    fn blank_window(w: u32, h: u32) -> TilingWindow {
        TilingWindow::new((0, 0), w, h, vec![0; (w * h) as usize])
    }

    fn four_square_hierarchy() -> InflationHierarchy {
        let window = blank_window(8, 8);
        let mut hier = InflationHierarchy::new(window);
        let squares: Vec<SquarePlacement> = [(0, 0), (5, 0), (0, 5), (5, 5)]
            .iter()
            .map(|&(x, y)| SquarePlacement {
                anchor: (x, y),
                side: 3,
            })
            .collect();
        push_level_from_squares(
            &mut hier,
            3,
            Rect::new(0, 0, 8, 8),
            0,
            Some(Rect::new(0, 0, 8, 8)),
            squares,
        )
        .unwrap();
        hier
    }

    #[test]
    fn four_square_boundary_is_plus() {
        let hier = four_square_hierarchy();
        let g = extract_boundary_graph(&hier, 1);
        // Supertiles are the four 4x4 quadrants, so the boundary is the
        // "+" on the lines x = 4 and y = 4.
        let mut expected = 0;
        for y in 0..8 {
            assert!(g.edges.has_right(3, y), "vertical line at x=4, y={y}");
            expected += 1;
        }
        for x in 0..8 {
            assert!(g.edges.has_top(x, 3), "horizontal line at y=4, x={x}");
            expected += 1;
        }
        assert_eq!(g.edges.count(), expected);
        assert_eq!(g.degree(4, 4), 4);
    }

    #[test]
    fn zero_level_graph_has_all_interior_edges() {
        let window = blank_window(3, 3);
        let hier = InflationHierarchy::new(window);
        let g = extract_boundary_graph(&hier, 0);
        // 2 vertical lines x 3 + 2 horizontal lines x 3.
        assert_eq!(g.edges.count(), 12);
    }

    #[test]
    fn persistent_of_single_level_equals_level_graph() {
        let hier = four_square_hierarchy();
        let g1 = extract_boundary_graph(&hier, 1);
        let pb = persistent_boundary(&hier).unwrap();
        assert!(pb.edges.is_subset_of(&g1.edges) && g1.edges.is_subset_of(&pb.edges));
    }

    #[test]
    fn four_square_root_and_patch() {
        let hier = four_square_hierarchy();
        let roots = find_roots(&hier).unwrap();
        assert_eq!(roots.roots, vec![(4, 4)]);
        assert_eq!(roots.degree_sequence, vec![4]);
        assert_eq!(roots.root_distance, None);
    }

    #[test]
    fn components_of_plus_graph() {
        let hier = four_square_hierarchy();
        let pb = persistent_boundary(&hier).unwrap();
        assert_eq!(count_components(&pb), 4);
    }

    #[test]
    fn stratify_examples() {
        let class3 = BoundaryClass {
            case_tag: CaseTag::Case3FourExits,
            ends: Some(4),
            component_count: 4,
        };
        let rd = |seq: Vec<u8>, two_roots: bool, ell: Option<u32>| RootData {
            roots: if two_roots {
                vec![(0, 0), (6, 0)]
            } else {
                vec![(0, 0)]
            },
            basic_patches: vec![],
            degree_sequence: seq,
            root_distance: ell,
        };
        assert_eq!(
            stratify(&class3, Some(&rd(vec![4, 4, 4], false, None)), 3),
            StratumLabel::H4 { ell: 0 }
        );
        assert_eq!(
            stratify(&class3, Some(&rd(vec![4, 3, 3], false, None)), 3),
            StratumLabel::H3 { m: 1 }
        );
        assert_eq!(
            stratify(&class3, Some(&rd(vec![4, 4, 4], true, Some(6))), 3),
            StratumLabel::H4 { ell: 6 }
        );
        let class2 = BoundaryClass {
            case_tag: CaseTag::Case2,
            ends: Some(2),
            component_count: 2,
        };
        assert_eq!(stratify(&class2, None, 3), StratumLabel::H2);
    }
}
