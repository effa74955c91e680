//! Bratteli diagrams of the supertile hierarchy: tail equivalence on
//! truncated path spaces, the Vershik successor, tile frequency measures,
//! and the boundary measure bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inflation::InflationHierarchy;
use crate::ratio::Ratio;
use crate::tiling::SquareSubstitution;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BVertex {
    /// Supertile type key; labels use their id, the root uses 0.
    pub type_key: u64,
    /// Area of the type in unit cells (1 for labels and the root).
    pub area: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BEdge {
    /// Vertex index in the lower level.
    pub source: usize,
    /// Vertex index in the upper level.
    pub range: usize,
    /// Position in the linear order of the fiber `r^{-1}(range)`.
    pub order: u32,
}

/// Leveled vertex/edge structure; `edges[i]` joins `levels[i]` to
/// `levels[i+1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BratteliDiagram {
    pub levels: Vec<Vec<BVertex>>,
    pub edges: Vec<Vec<BEdge>>,
}

impl BratteliDiagram {
    pub fn depth(&self) -> usize {
        self.edges.len()
    }

    /// Edge indices of the fiber `r^{-1}(v)` at layer `i`, sorted by order.
    pub fn fiber(&self, layer: usize, range_vertex: usize) -> Vec<usize> {
        let mut f: Vec<usize> = self.edges[layer]
            .iter()
            .enumerate()
            .filter(|(_, e)| e.range == range_vertex)
            .map(|(i, _)| i)
            .collect();
        f.sort_by_key(|&i| self.edges[layer][i].order);
        f
    }

    /// The base-`b` odometer truncated at `depth`: singleton vertices and
    /// `b` parallel edges per layer.
    pub fn odometer(base: u32, depth: usize) -> Self {
        let levels = (0..=depth).map(|_| vec![BVertex { type_key: 0, area: 1 }]).collect();
        let edges = (0..depth)
            .map(|_| {
                (0..base)
                    .map(|k| BEdge {
                        source: 0,
                        range: 0,
                        order: k,
                    })
                    .collect()
            })
            .collect();
        BratteliDiagram { levels, edges }
    }
}

/// Extract the diagram from a hierarchy: vertices are supertile types per
/// level, prepended by the prototile labels and a single root.
pub fn build_diagram(hier: &InflationHierarchy, label_count: usize) -> BratteliDiagram {
    let label_level: Vec<BVertex> = (0..label_count)
        .map(|l| BVertex {
            type_key: l as u64,
            area: 1,
        })
        .collect();
    if hier.levels.is_empty() {
        return BratteliDiagram {
            levels: vec![label_level],
            edges: vec![],
        };
    }

    let mut levels = Vec::new();
    let mut edges = Vec::new();
    // Root, then labels, one edge per label.
    levels.push(vec![BVertex {
        type_key: 0,
        area: 1,
    }]);
    levels.push(label_level);
    edges.push(
        (0..label_count)
            .map(|l| BEdge {
                source: 0,
                range: l,
                order: l as u32,
            })
            .collect::<Vec<_>>(),
    );

    // For each hierarchy level: distinct types (sorted by key) with one
    // representative each; edges from the representative's children.
    let mut prev_type_index: Vec<usize> = Vec::new(); // supertile id -> vertex index at previous layer
    for (li, level) in hier.levels.iter().enumerate() {
        let mut keys: Vec<u64> = level.supertiles.iter().map(|s| s.type_key).collect();
        keys.sort_unstable();
        keys.dedup();
        let vertex_of_key = |k: u64| keys.binary_search(&k).unwrap();
        let mut verts = vec![
            BVertex {
                type_key: 0,
                area: 0
            };
            keys.len()
        ];
        let mut reps: Vec<Option<&crate::inflation::Supertile>> = vec![None; keys.len()];
        for st in &level.supertiles {
            let v = vertex_of_key(st.type_key);
            if reps[v].is_none() {
                reps[v] = Some(st);
                verts[v] = BVertex {
                    type_key: st.type_key,
                    area: st.area,
                };
            }
        }
        let mut layer_edges = Vec::new();
        for (v, rep) in reps.iter().enumerate() {
            let rep = rep.unwrap();
            for (k, &child) in rep.children.iter().enumerate() {
                let source = if li == 0 {
                    // Children are window cells; their type is the label.
                    let (x, y) = hier.window.cell_at_index(child);
                    hier.window.label(x, y) as usize
                } else {
                    prev_type_index[child as usize]
                };
                layer_edges.push(BEdge {
                    source,
                    range: v,
                    order: k as u32,
                });
            }
        }
        edges.push(layer_edges);
        prev_type_index = level
            .supertiles
            .iter()
            .map(|s| vertex_of_key(s.type_key))
            .collect();
        levels.push(verts);
    }
    BratteliDiagram { levels, edges }
}

/// Standardness and simplicity of the finite diagram.
pub fn check_standard_simple(d: &BratteliDiagram) -> (bool, bool) {
    let standard = d.levels.first().is_some_and(|l| l.len() == 1)
        && (1..d.levels.len()).all(|i| {
            (0..d.levels[i].len()).all(|v| d.edges[i - 1].iter().any(|e| e.range == v))
        });

    // Simple: from every vertex below the top, some later level is fully
    // reachable.
    let top = d.levels.len().saturating_sub(1);
    let mut simple = true;
    for i in 0..top {
        for v in 0..d.levels[i].len() {
            let mut reach: Vec<bool> = vec![false; d.levels[i].len()];
            reach[v] = true;
            let mut found = false;
            let mut cur = reach;
            for m in i + 1..=top {
                let mut next = vec![false; d.levels[m].len()];
                for e in &d.edges[m - 1] {
                    if cur[e.source] {
                        next[e.range] = true;
                    }
                }
                cur = next;
                if cur.iter().all(|&b| b) {
                    found = true;
                    break;
                }
            }
            if !found {
                simple = false;
            }
        }
    }
    (standard, simple)
}

/// A composable edge path from the first level, one edge index per layer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FinitePath {
    pub edges: Vec<usize>,
}

impl FinitePath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Check composability against the diagram.
    pub fn is_valid(&self, d: &BratteliDiagram) -> bool {
        if self.edges.len() > d.depth() {
            return false;
        }
        let mut at = None;
        for (i, &e) in self.edges.iter().enumerate() {
            let edge = match d.edges[i].get(e) {
                Some(edge) => edge,
                None => return false,
            };
            if let Some(v) = at {
                if edge.source != v {
                    return false;
                }
            }
            at = Some(edge.range);
        }
        true
    }

    /// Endpoint vertex at the top of the path.
    pub fn range_vertex(&self, d: &BratteliDiagram) -> Option<usize> {
        self.edges
            .last()
            .map(|&e| d.edges[self.edges.len() - 1][e].range)
    }
}

/// All full-depth paths, or None if there would be more than `cap`.
pub fn enumerate_paths(d: &BratteliDiagram, cap: usize) -> Option<Vec<FinitePath>> {
    let mut paths: Vec<Vec<usize>> = vec![vec![]];
    let mut at: Vec<usize> = vec![0];
    if d.levels[0].len() != 1 {
        // Start from every vertex of the first level by allowing any source.
        at = (0..d.levels[0].len()).collect();
        paths = at.iter().map(|_| vec![]).collect();
    }
    for layer in 0..d.depth() {
        let mut next_paths = Vec::new();
        let mut next_at = Vec::new();
        for (p, &v) in paths.iter().zip(&at) {
            for (ei, e) in d.edges[layer].iter().enumerate() {
                if e.source == v {
                    let mut q = p.clone();
                    q.push(ei);
                    next_paths.push(q);
                    next_at.push(e.range);
                    if next_paths.len() > cap {
                        return None;
                    }
                }
            }
        }
        paths = next_paths;
        at = next_at;
    }
    Some(paths.into_iter().map(|edges| FinitePath { edges }).collect())
}

/// Tail (cofinal) equivalence on equal-length truncated paths: the paths
/// agree from some index on.
pub fn tail_equivalent(d: &BratteliDiagram, p: &FinitePath, q: &FinitePath) -> Result<bool> {
    if p.len() != q.len() {
        return Err(Error::PathLengthMismatch(p.len(), q.len()));
    }
    let _ = d;
    let n = p.len();
    for m in 0..n {
        if p.edges[m..] == q.edges[m..] {
            return Ok(true);
        }
    }
    Ok(n == 0)
}

/// Linear orders on the edge fibers. The default is the construction order,
/// which for hierarchy diagrams is row-major over child anchors.
#[derive(Clone, Debug)]
pub struct EdgeOrder {
    /// fibers[layer][vertex] = edge indices sorted by order.
    fibers: Vec<Vec<Vec<usize>>>,
}

impl EdgeOrder {
    pub fn from_diagram(d: &BratteliDiagram) -> Self {
        let mut fibers = Vec::new();
        for layer in 0..d.depth() {
            let upper = d.levels[layer + 1].len();
            let mut per_vertex = Vec::with_capacity(upper);
            for v in 0..upper {
                per_vertex.push(d.fiber(layer, v));
            }
            fibers.push(per_vertex);
        }
        EdgeOrder { fibers }
    }

    fn fiber(&self, layer: usize, v: usize) -> &[usize] {
        &self.fibers[layer][v]
    }
}

/// Lexicographic successor on the truncated path space with fixed endpoint:
/// the least incrementable edge advances in its fiber and everything below
/// resets to the minimal path; the unique maximal path wraps to the unique
/// minimal path.
pub fn vershik_successor(
    d: &BratteliDiagram,
    ord: &EdgeOrder,
    p: &FinitePath,
) -> Result<FinitePath> {
    if !p.is_valid(d) || p.is_empty() {
        return Err(Error::ImproperOrder("invalid path".into()));
    }
    let n = p.len();
    for layer in 0..n {
        let e = p.edges[layer];
        let range = d.edges[layer][e].range;
        let fiber = ord.fiber(layer, range);
        let pos = fiber
            .iter()
            .position(|&f| f == e)
            .ok_or_else(|| Error::ImproperOrder("edge missing from its fiber".into()))?;
        if pos + 1 < fiber.len() {
            let new_edge = fiber[pos + 1];
            // Reset everything below the increment to the minimal path
            // ending at the new edge's source.
            let mut edges = if layer == 0 {
                Vec::new()
            } else {
                minimal_path_to(d, ord, d.edges[layer][new_edge].source, layer - 1)?
            };
            edges.push(new_edge);
            edges.extend_from_slice(&p.edges[layer + 1..]);
            return Ok(FinitePath { edges });
        }
    }
    // Unique maximal path: wrap to the minimal path with the same endpoint.
    let top_vertex = p.range_vertex(d).unwrap();
    let edges = minimal_path_to(d, ord, top_vertex, n - 1)?;
    let last = *ord
        .fiber(n - 1, top_vertex)
        .first()
        .ok_or_else(|| Error::ImproperOrder("empty fiber".into()))?;
    // minimal_path_to(.., n - 1) already chose the minimal last edge.
    debug_assert_eq!(edges.last(), Some(&last));
    Ok(FinitePath { edges })
}

/// Minimal path from the diagram bottom to `vertex` at the given layer's
/// upper level (inclusive).
fn minimal_path_to(
    d: &BratteliDiagram,
    ord: &EdgeOrder,
    vertex: usize,
    layer_inclusive: usize,
) -> Result<Vec<usize>> {
    // Build from the top down.
    let mut rev = Vec::new();
    let mut v = vertex;
    let mut layer = layer_inclusive as isize;
    while layer >= 0 {
        let fiber = ord.fiber(layer as usize, v);
        let e = *fiber
            .first()
            .ok_or_else(|| Error::ImproperOrder(format!("empty fiber at layer {layer}")))?;
        rev.push(e);
        v = d.edges[layer as usize][e].source;
        layer -= 1;
    }
    rev.reverse();
    Ok(rev)
}

/// Minimal path ending at `vertex` of the top level.
pub fn minimal_path(d: &BratteliDiagram, ord: &EdgeOrder, vertex: usize) -> Result<FinitePath> {
    Ok(FinitePath {
        edges: minimal_path_to(d, ord, vertex, d.depth() - 1)?,
    })
}

/// Maximal path ending at `vertex` of the top level.
pub fn maximal_path(d: &BratteliDiagram, ord: &EdgeOrder, vertex: usize) -> Result<FinitePath> {
    let mut rev = Vec::new();
    let mut v = vertex;
    let mut layer = d.depth() as isize - 1;
    while layer >= 0 {
        let fiber = ord.fiber(layer as usize, v);
        let e = *fiber
            .last()
            .ok_or_else(|| Error::ImproperOrder(format!("empty fiber at layer {layer}")))?;
        rev.push(e);
        v = d.edges[layer as usize][e].source;
        layer -= 1;
    }
    rev.reverse();
    Ok(FinitePath { edges: rev })
}

// ---------------------------------------------------------------------------
// Frequencies and measure bounds
// ---------------------------------------------------------------------------

/// Normalized tile frequencies: the Perron eigenvector of the incidence
/// matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrequencyMeasure {
    /// Per prototile, in prototile order; sums to 1.
    pub frequencies: Vec<f64>,
}

/// Power iteration on the incidence matrix to relative tolerance 1e-12.
pub fn tile_frequencies(sub: &SquareSubstitution) -> Result<FrequencyMeasure> {
    if !sub.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let m = sub.incidence();
    let n = m.len();
    let k2 = (sub.expansion() as f64).powi(2);
    let mut f = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[i] += m[i][j] as f64 * f[j];
            }
        }
        let sum: f64 = next.iter().sum();
        for v in &mut next {
            *v /= sum;
        }
        let delta = next
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        f = next;
        if delta < 1e-12 {
            break;
        }
    }
    let _ = k2;
    Ok(FrequencyMeasure { frequencies: f })
}

/// Max over level-n supertiles of (boundary cells) / (cells): the exact
/// upper bound for the measure of the level-n boundary under any invariant
/// probability measure.
pub fn boundary_measure_bound(hier: &InflationHierarchy, level: usize) -> Ratio {
    let lv = &hier.levels[level - 1];
    let b = hier.window.bounds();
    let at = |x: i32, y: i32| -> u32 {
        if b.contains_cell(x, y) {
            lv.assignment[hier.window.cell_index(x, y) as usize]
        } else {
            0
        }
    };
    let mut boundary = vec![0u64; lv.supertiles.len()];
    for y in b.y0..b.y1 {
        for x in b.x0..b.x1 {
            let s = at(x, y);
            if s == 0 {
                continue;
            }
            let on_boundary = [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
                .iter()
                .any(|&(nx, ny)| at(nx, ny) != s);
            if on_boundary {
                boundary[(s - 1) as usize] += 1;
            }
        }
    }
    lv.supertiles
        .iter()
        .map(|st| Ratio::new(boundary[st.id as usize] as i64, st.area as i64))
        .max()
        .unwrap_or_else(Ratio::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::SquareSubstitution;

    fn thue_morse() -> SquareSubstitution {
        SquareSubstitution::from_json(include_str!("../assets/thue_morse.json")).unwrap()
    }

    #[test]
    fn odometer_successor_examples() {
        let d = BratteliDiagram::odometer(2, 3);
        let ord = EdgeOrder::from_diagram(&d);
        let succ = |e: Vec<usize>| {
            vershik_successor(&d, &ord, &FinitePath { edges: e })
                .unwrap()
                .edges
        };
        assert_eq!(succ(vec![1, 1, 0]), vec![0, 0, 1]);
        assert_eq!(succ(vec![1, 1, 1]), vec![0, 0, 0]);
        assert_eq!(succ(vec![0, 0, 0]), vec![1, 0, 0]);
    }

    #[test]
    fn odometer_successor_matches_lexicographic_enumeration() {
        // Reverse-lexicographic order on (e1, e2, e3): the successor is the
        // next tuple with the most significant digit last.
        let d = BratteliDiagram::odometer(2, 3);
        let ord = EdgeOrder::from_diagram(&d);
        let all = enumerate_paths(&d, 10_000).unwrap();
        assert_eq!(all.len(), 8);
        let value = |p: &FinitePath| p.edges[0] + 2 * p.edges[1] + 4 * p.edges[2];
        for p in &all {
            let s = vershik_successor(&d, &ord, p).unwrap();
            assert_eq!(value(&s), (value(p) + 1) % 8);
        }
    }

    #[test]
    fn tail_equivalence_examples() {
        let d = BratteliDiagram::odometer(2, 3);
        let p = |e: Vec<usize>| FinitePath { edges: e };
        assert!(tail_equivalent(&d, &p(vec![0, 1, 1]), &p(vec![1, 1, 1])).unwrap());
        assert!(!tail_equivalent(&d, &p(vec![0, 0, 1]), &p(vec![0, 1, 0])).unwrap());
        assert!(matches!(
            tail_equivalent(&d, &p(vec![0, 1]), &p(vec![0, 1, 0])),
            Err(Error::PathLengthMismatch(2, 3))
        ));
    }

    #[test]
    fn tail_equivalence_is_equivalence_relation() {
        let d = BratteliDiagram::odometer(2, 3);
        let all = enumerate_paths(&d, 10_000).unwrap();
        for p in &all {
            assert!(tail_equivalent(&d, p, p).unwrap());
            for q in &all {
                let pq = tail_equivalent(&d, p, q).unwrap();
                let qp = tail_equivalent(&d, q, p).unwrap();
                assert_eq!(pq, qp);
                for r in &all {
                    let qr = tail_equivalent(&d, q, r).unwrap();
                    let pr = tail_equivalent(&d, p, r).unwrap();
                    if pq && qr {
                        assert!(pr);
                    }
                }
            }
        }
    }

    #[test]
    fn odometer_is_standard_and_simple() {
        let d = BratteliDiagram::odometer(2, 3);
        assert_eq!(check_standard_simple(&d), (true, true));
    }

    #[test]
    fn disjoint_chains_are_not_simple() {
        let d = BratteliDiagram {
            levels: vec![
                vec![
                    BVertex { type_key: 0, area: 1 },
                    BVertex { type_key: 1, area: 1 },
                ],
                vec![
                    BVertex { type_key: 0, area: 1 },
                    BVertex { type_key: 1, area: 1 },
                ],
            ],
            edges: vec![vec![
                BEdge {
                    source: 0,
                    range: 0,
                    order: 0,
                },
                BEdge {
                    source: 1,
                    range: 1,
                    order: 0,
                },
            ]],
        };
        let (standard, simple) = check_standard_simple(&d);
        assert!(!standard);
        assert!(!simple);
    }

    #[test]
    fn hierarchy_diagram_has_root_labels_and_parallel_edges() {
        // The four-square fixture over one label: a single level-1 type
        // containing sixteen cells, i.e. sixteen parallel edges.
        let hier = crate::fixtures::four_square_hierarchy();
        let d = build_diagram(&hier, 1);
        assert_eq!(d.levels.len(), 3); // root, labels, level-1 types
        assert_eq!(d.levels[0].len(), 1);
        assert_eq!(d.levels[1].len(), 1);
        assert_eq!(d.levels[2].len(), 1);
        assert_eq!(d.edges[0].len(), 1);
        assert_eq!(d.edges[1].len(), 16);
        assert!(d.edges[1].iter().all(|e| e.source == 0 && e.range == 0));
        let (ok, _, detail) = crate::verify::check_diagram_conservation(&d);
        assert!(ok, "{detail:?}");
        assert_eq!(check_standard_simple(&d), (true, true));
    }

    #[test]
    fn zero_level_hierarchy_diagram_is_labels_only() {
        let window = crate::fixtures::blank_window(4, 4);
        let hier = crate::inflation::InflationHierarchy::new(window);
        let d = build_diagram(&hier, 2);
        assert_eq!(d.levels.len(), 1);
        assert_eq!(d.levels[0].len(), 2);
        assert!(d.edges.is_empty());
    }

    #[test]
    fn thue_morse_frequencies_are_half() {
        let f = tile_frequencies(&thue_morse()).unwrap();
        assert!((f.frequencies[0] - 0.5).abs() < 1e-12);
        assert!((f.frequencies[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_frequencies_match_closed_form() {
        // Incidence [[2,1],[2,3]]: eigenvector (1/3, 2/3) at eigenvalue 4.
        let json = r#"{
            "expansion": 2,
            "prototiles": [{"name":"a","mark":"0"},{"name":"b","mark":"1"}],
            "rules": {
                "a": [["a","a"],["b","b"]],
                "b": [["a","b"],["b","b"]]
            }
        }"#;
        let sub = SquareSubstitution::from_json(json).unwrap();
        let m = sub.incidence();
        assert_eq!(m, vec![vec![2, 1], vec![2, 3]]);
        // Closed form for the 2x2 Perron eigenvector at eigenvalue 4:
        // (A - 4I) v = 0 with v normalized to sum 1.
        let f = tile_frequencies(&sub).unwrap();
        assert!((f.frequencies[0] - 1.0 / 3.0).abs() < 1e-9);
        assert!((f.frequencies[1] - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn non_primitive_substitution_rejected() {
        let json = r#"{
            "expansion": 2,
            "prototiles": [{"name":"a","mark":"0"},{"name":"b","mark":"1"}],
            "rules": {
                "a": [["a","a"],["a","a"]],
                "b": [["a","b"],["b","a"]]
            }
        }"#;
        let sub = SquareSubstitution::from_json(json).unwrap();
        assert!(matches!(tile_frequencies(&sub), Err(Error::NotPrimitive)));
    }
}
