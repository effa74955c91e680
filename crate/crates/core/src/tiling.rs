//! Marked-square prototiles, block substitutions, and finite tiling windows.
//!
//! A window is a total coloring of a rectangular block of unit cells by
//! prototile labels; the lower-left cell sits at `origin`. Windows are the
//! finite stand-in for a tiling together with its set of tile base points.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Rect;

/// Default cap on window sizes, overridable via `TIL_CELL_BUDGET`.
pub const DEFAULT_CELL_BUDGET: u64 = 64_000_000;

/// Effective cell budget: environment override or the default.
pub fn cell_budget() -> u64 {
    std::env::var("TIL_CELL_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_CELL_BUDGET)
}

/// Index of a prototile label within its `PrototileSet`.
pub type LabelId = u16;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Prototile {
    pub name: String,
    /// Opaque mark identifier (the "marked square" decoration).
    pub mark: String,
}

/// Ordered set of distinct marked-square prototiles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrototileSet {
    labels: Vec<Prototile>,
}

impl PrototileSet {
    pub fn new(labels: Vec<Prototile>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSubstitution("no prototiles".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &labels {
            if !seen.insert(p.name.clone()) {
                return Err(Error::InvalidSubstitution(format!(
                    "duplicate prototile `{}`",
                    p.name
                )));
            }
        }
        Ok(PrototileSet { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, id: LabelId) -> &Prototile {
        &self.labels[id as usize]
    }

    pub fn id_of(&self, name: &str) -> Result<LabelId> {
        self.labels
            .iter()
            .position(|p| p.name == name)
            .map(|i| i as LabelId)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (LabelId, &Prototile)> {
        self.labels.iter().enumerate().map(|(i, p)| (i as LabelId, p))
    }
}

/// JSON shape of a substitution spec file.
#[derive(Serialize, Deserialize)]
struct SubstitutionSpec {
    expansion: u32,
    prototiles: Vec<Prototile>,
    /// Rules listed row-major, top row first.
    rules: BTreeMap<String, Vec<Vec<String>>>,
}

/// A k x k block substitution on marked squares.
#[derive(Clone, Debug)]
pub struct SquareSubstitution {
    prototiles: PrototileSet,
    expansion: u32,
    /// `rules[label][row][col]`, rows stored top-first as in the JSON spec.
    rules: Vec<Vec<LabelId>>,
}

impl SquareSubstitution {
    pub fn new(
        prototiles: PrototileSet,
        expansion: u32,
        rules_by_name: &BTreeMap<String, Vec<Vec<String>>>,
    ) -> Result<Self> {
        if expansion < 2 {
            return Err(Error::InvalidSubstitution(format!(
                "expansion must be >= 2, got {expansion}"
            )));
        }
        let k = expansion as usize;
        let mut rules = Vec::with_capacity(prototiles.len());
        for (_, proto) in prototiles.iter() {
            let rows = rules_by_name.get(&proto.name).ok_or_else(|| {
                Error::InvalidSubstitution(format!("no rule for `{}`", proto.name))
            })?;
            if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                return Err(Error::InvalidSubstitution(format!(
                    "rule for `{}` is not {k}x{k}",
                    proto.name
                )));
            }
            let mut flat = Vec::with_capacity(k * k);
            for row in rows {
                for name in row {
                    flat.push(prototiles.id_of(name)?);
                }
            }
            rules.push(flat);
        }
        if rules_by_name.len() != prototiles.len() {
            return Err(Error::InvalidSubstitution(
                "rules mention labels outside the prototile set".into(),
            ));
        }
        Ok(SquareSubstitution {
            prototiles,
            expansion,
            rules,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SubstitutionSpec = serde_json::from_str(text)
            .map_err(|e| Error::InvalidSubstitution(format!("bad JSON: {e}")))?;
        let protos = PrototileSet::new(spec.prototiles)?;
        SquareSubstitution::new(protos, spec.expansion, &spec.rules)
    }

    pub fn prototiles(&self) -> &PrototileSet {
        &self.prototiles
    }

    pub fn expansion(&self) -> u32 {
        self.expansion
    }

    /// Child label at (row, col) of the rule image, rows top-first.
    pub fn rule(&self, label: LabelId, row: usize, col: usize) -> LabelId {
        self.rules[label as usize][row * self.expansion as usize + col]
    }

    /// Incidence matrix: `m[i][j]` counts occurrences of label `i` in the
    /// image of label `j`.
    pub fn incidence(&self) -> Vec<Vec<u64>> {
        let n = self.prototiles.len();
        let mut m = vec![vec![0u64; n]; n];
        for j in 0..n {
            for &child in &self.rules[j] {
                m[child as usize][j] += 1;
            }
        }
        m
    }

    /// Whether some power of the incidence matrix is entrywise positive.
    pub fn is_primitive(&self) -> bool {
        let n = self.prototiles.len();
        let m = self.incidence();
        // Boolean reachability powers up to the Wielandt bound.
        let mut reach: Vec<Vec<bool>> = m
            .iter()
            .map(|row| row.iter().map(|&v| v > 0).collect())
            .collect();
        let bound = (n - 1) * (n - 1) + 1;
        let mut power = 1usize;
        loop {
            if reach.iter().all(|row| row.iter().all(|&b| b)) {
                return true;
            }
            if power >= bound {
                return false;
            }
            let base: Vec<Vec<bool>> = m
                .iter()
                .map(|row| row.iter().map(|&v| v > 0).collect())
                .collect();
            let mut next = vec![vec![false; n]; n];
            for i in 0..n {
                for k in 0..n {
                    if reach[i][k] {
                        for j in 0..n {
                            if base[k][j] {
                                next[i][j] = true;
                            }
                        }
                    }
                }
            }
            reach = next;
            power += 1;
        }
    }
}

/// A finite rectangular coloring of grid cells by prototile labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingWindow {
    origin: (i32, i32),
    width: u32,
    height: u32,
    cells: Vec<LabelId>,
}

/// Serialized window: cells row-major from the bottom row (the row holding
/// the origin cell) upward.
#[derive(Serialize, Deserialize)]
pub struct WindowJson {
    pub origin: [i32; 2],
    pub width: u32,
    pub height: u32,
    pub cells: Vec<String>,
}

impl TilingWindow {
    pub fn new(origin: (i32, i32), width: u32, height: u32, cells: Vec<LabelId>) -> Self {
        assert_eq!(cells.len() as u64, width as u64 * height as u64);
        TilingWindow {
            origin,
            width,
            height,
            cells,
        }
    }

    pub fn origin(&self) -> (i32, i32) {
        self.origin
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(
            self.origin.0,
            self.origin.1,
            self.origin.0 + self.width as i32,
            self.origin.1 + self.height as i32,
        )
    }

    pub fn cell_count(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    /// Label at absolute cell coordinates; panics outside the window.
    pub fn label(&self, x: i32, y: i32) -> LabelId {
        debug_assert!(self.bounds().contains_cell(x, y));
        let dx = (x - self.origin.0) as usize;
        let dy = (y - self.origin.1) as usize;
        self.cells[dy * self.width as usize + dx]
    }

    pub fn label_checked(&self, x: i32, y: i32) -> Option<LabelId> {
        if self.bounds().contains_cell(x, y) {
            Some(self.label(x, y))
        } else {
            None
        }
    }

    /// Linear index of a cell, row-major from the origin row.
    pub fn cell_index(&self, x: i32, y: i32) -> u32 {
        let dx = (x - self.origin.0) as u32;
        let dy = (y - self.origin.1) as u32;
        dy * self.width + dx
    }

    pub fn cell_at_index(&self, idx: u32) -> (i32, i32) {
        (
            self.origin.0 + (idx % self.width) as i32,
            self.origin.1 + (idx / self.width) as i32,
        )
    }

    /// Copy of the window translated so its origin moves by `(dx, dy)`.
    pub fn translated(&self, dx: i32, dy: i32) -> TilingWindow {
        TilingWindow {
            origin: (self.origin.0 + dx, self.origin.1 + dy),
            ..self.clone()
        }
    }

    /// Extract a sub-window; `rect` must lie inside the bounds.
    pub fn subwindow(&self, rect: Rect) -> TilingWindow {
        assert!(self.bounds().contains_rect(&rect) && !rect.is_empty());
        let mut cells = Vec::with_capacity(rect.area() as usize);
        for y in rect.y0..rect.y1 {
            for x in rect.x0..rect.x1 {
                cells.push(self.label(x, y));
            }
        }
        TilingWindow::new((rect.x0, rect.y0), rect.width() as u32, rect.height() as u32, cells)
    }

    pub fn to_json(&self, protos: &PrototileSet) -> WindowJson {
        WindowJson {
            origin: [self.origin.0, self.origin.1],
            width: self.width,
            height: self.height,
            cells: self
                .cells
                .iter()
                .map(|&id| protos.get(id).name.clone())
                .collect(),
        }
    }

    pub fn from_json(json: &WindowJson, protos: &PrototileSet) -> Result<Self> {
        if json.cells.len() as u64 != json.width as u64 * json.height as u64 {
            return Err(Error::InvalidConfig(format!(
                "window cell array has {} entries, expected {}",
                json.cells.len(),
                json.width as u64 * json.height as u64
            )));
        }
        let cells = json
            .cells
            .iter()
            .map(|name| protos.id_of(name))
            .collect::<Result<Vec<_>>>()?;
        Ok(TilingWindow::new(
            (json.origin[0], json.origin[1]),
            json.width,
            json.height,
            cells,
        ))
    }
}

/// An occurrence of a patch inside a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occurrence {
    /// Position of the patch origin cell, absolute coordinates.
    pub position: (i32, i32),
    /// Identifier of the searched patch (its translation-invariant hash).
    pub pattern_id: u64,
}

/// FNV-1a over the canonical (translation-normalized) content of a window.
pub fn patch_key(patch: &TilingWindow) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(patch.width as u64);
    eat(patch.height as u64);
    for &c in &patch.cells {
        eat(c as u64);
    }
    h
}

/// Expand a single label `level` times under the substitution.
///
/// Level 0 is the 1x1 window of the label itself; level n is the
/// k^n x k^n window obtained by applying the rules n times. The result is
/// anchored at the origin (0, 0).
pub fn expand_substitution(
    sub: &SquareSubstitution,
    label: &str,
    level: u32,
) -> Result<TilingWindow> {
    let id = sub.prototiles().id_of(label)?;
    let k = sub.expansion() as u64;
    let side = k.checked_pow(level).filter(|s| *s <= i32::MAX as u64 / 2);
    let side = match side {
        Some(s) => s,
        None => {
            return Err(Error::CellBudgetExceeded {
                cells: u64::MAX,
                budget: cell_budget(),
            })
        }
    };
    let cells_total = side * side;
    let budget = cell_budget();
    if cells_total > budget {
        return Err(Error::CellBudgetExceeded {
            cells: cells_total,
            budget,
        });
    }

    let mut cur: Vec<LabelId> = vec![id];
    let mut cur_side = 1usize;
    for _ in 0..level {
        let k = sub.expansion() as usize;
        let next_side = cur_side * k;
        let mut next = vec![0 as LabelId; next_side * next_side];
        for y in 0..cur_side {
            for x in 0..cur_side {
                let parent = cur[y * cur_side + x];
                for r in 0..k {
                    for c in 0..k {
                        let child = sub.rule(parent, r, c);
                        // Row 0 of the rule is the top row of the block.
                        let cy = y * k + (k - 1 - r);
                        let cx = x * k + c;
                        next[cy * next_side + cx] = child;
                    }
                }
            }
        }
        cur = next;
        cur_side = next_side;
    }
    Ok(TilingWindow::new((0, 0), cur_side as u32, cur_side as u32, cur))
}

/// All positions where `patch` matches `window` exactly, by exhaustive scan.
pub fn occurrences(window: &TilingWindow, patch: &TilingWindow) -> Vec<Occurrence> {
    let id = patch_key(patch);
    let (pw, ph) = (patch.width() as i32, patch.height() as i32);
    let b = window.bounds();
    if pw > b.width() || ph > b.height() {
        return Vec::new();
    }
    let ys: Vec<i32> = (b.y0..=b.y1 - ph).collect();
    let mut rows: Vec<Vec<Occurrence>> = Vec::new();
    ys.par_iter()
        .map(|&y| {
            let mut row = Vec::new();
            'pos: for x in b.x0..=b.x1 - pw {
                for py in 0..ph {
                    for px in 0..pw {
                        let want = patch.label(patch.origin().0 + px, patch.origin().1 + py);
                        if window.label(x + px, y + py) != want {
                            continue 'pos;
                        }
                    }
                }
                row.push(Occurrence {
                    position: (x, y),
                    pattern_id: id,
                });
            }
            row
        })
        .collect_into_vec(&mut rows);
    rows.into_iter().flatten().collect()
}

/// Outcome of a repetitivity estimate on a finite window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepetitivityRadius {
    Observed(u32),
    /// No radius that fits inside the window works.
    NotObserved,
}

/// Least `R` such that every `R x R` subwindow contains every `patch_size`
/// patch occurring anywhere in the window.
pub fn repetitivity_radius(window: &TilingWindow, patch_size: u32) -> Result<RepetitivityRadius> {
    let (w, h) = (window.width(), window.height());
    if patch_size == 0 || patch_size > w.min(h) {
        return Err(Error::PatchTooLarge {
            patch: patch_size,
            width: w,
            height: h,
        });
    }
    let b = window.bounds();
    let p = patch_size as i32;

    // Collect the distinct patches as label tuples.
    let mut patches = std::collections::BTreeSet::new();
    for y in b.y0..=b.y1 - p {
        for x in b.x0..=b.x1 - p {
            patches.insert(read_patch(window, x, y, p));
        }
    }
    let all: Vec<Vec<LabelId>> = patches.into_iter().collect();

    'radius: for r in patch_size..=w.min(h) {
        let r = r as i32;
        // A ball that fits at a single position witnesses nothing.
        if ((b.width() - r + 1) as i64) * ((b.height() - r + 1) as i64) < 2 {
            continue;
        }
        for y in b.y0..=b.y1 - r {
            for x in b.x0..=b.x1 - r {
                // Does the R x R subwindow at (x, y) contain every patch?
                let mut missing = vec![true; all.len()];
                let mut left = all.len();
                for py in y..=y + r - p {
                    for px in x..=x + r - p {
                        let here = read_patch(window, px, py, p);
                        if let Ok(i) = all.binary_search(&here) {
                            if missing[i] {
                                missing[i] = false;
                                left -= 1;
                                if left == 0 {
                                    break;
                                }
                            }
                        }
                    }
                    if left == 0 {
                        break;
                    }
                }
                if left != 0 {
                    continue 'radius;
                }
            }
        }
        return Ok(RepetitivityRadius::Observed(r as u32));
    }
    Ok(RepetitivityRadius::NotObserved)
}

fn read_patch(window: &TilingWindow, x: i32, y: i32, p: i32) -> Vec<LabelId> {
    let mut v = Vec::with_capacity((p * p) as usize);
    for py in 0..p {
        for px in 0..p {
            v.push(window.label(x + px, y + py));
        }
    }
    v
}

/// Deterministically sample `count` sub-windows of the given size, origins
/// drawn from a ChaCha stream seeded with `seed`.
pub fn sample_windows(
    window: &TilingWindow,
    size: (u32, u32),
    count: usize,
    seed: u64,
) -> Vec<TilingWindow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = window.bounds();
    let max_x = b.x1 - size.0 as i32;
    let max_y = b.y1 - size.1 as i32;
    assert!(max_x >= b.x0 && max_y >= b.y0, "sample size exceeds window");
    (0..count)
        .map(|_| {
            let x = rng.gen_range(b.x0..=max_x);
            let y = rng.gen_range(b.y0..=max_y);
            window.subwindow(Rect::new(x, y, x + size.0 as i32, y + size.1 as i32))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn thue_morse() -> SquareSubstitution {
        SquareSubstitution::from_json(include_str!("../assets/thue_morse.json")).unwrap()
    }

    #[test]
    fn expand_level_zero_is_identity() {
        let sub = thue_morse();
        let w = expand_substitution(&sub, "a", 0).unwrap();
        assert_eq!((w.width(), w.height()), (1, 1));
        assert_eq!(w.label(0, 0), sub.prototiles().id_of("a").unwrap());
    }

    #[test]
    fn expand_level_one_matches_rule() {
        let sub = thue_morse();
        let w = expand_substitution(&sub, "a", 1).unwrap();
        let a = sub.prototiles().id_of("a").unwrap();
        let b = sub.prototiles().id_of("b").unwrap();
        // Rule rows top-first [[a,b],[b,a]] place `a` at top-left = (0, 1).
        assert_eq!(w.label(0, 1), a);
        assert_eq!(w.label(1, 1), b);
        assert_eq!(w.label(0, 0), b);
        assert_eq!(w.label(1, 0), a);
    }

    #[test]
    fn unknown_label_is_rejected() {
        let sub = thue_morse();
        assert!(matches!(
            expand_substitution(&sub, "zz", 1),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn budget_guard_triggers() {
        let sub = thue_morse();
        // 2^40 cells per side blows any budget long before allocation.
        assert!(matches!(
            expand_substitution(&sub, "a", 40),
            Err(Error::CellBudgetExceeded { .. })
        ));
    }

    #[test]
    fn thue_morse_is_primitive() {
        assert!(thue_morse().is_primitive());
    }

    #[test]
    fn occurrences_single_cell() {
        let sub = thue_morse();
        let w = expand_substitution(&sub, "a", 1).unwrap();
        let patch = expand_substitution(&sub, "a", 0).unwrap();
        let occ = occurrences(&w, &patch);
        let positions: Vec<_> = occ.iter().map(|o| o.position).collect();
        // `a` sits at the top-left and bottom-right of the expanded block.
        assert_eq!(positions, vec![(1, 0), (0, 1)]);
    }

    #[test]
    fn occurrences_self_match() {
        let sub = thue_morse();
        let w = expand_substitution(&sub, "a", 1).unwrap();
        let occ = occurrences(&w, &w);
        assert_eq!(occ.len(), 1);
        assert_eq!(occ[0].position, (0, 0));
    }

    #[test]
    fn repetitivity_constant_window() {
        let protos = PrototileSet::new(vec![Prototile {
            name: "a".into(),
            mark: "0".into(),
        }])
        .unwrap();
        let a = protos.id_of("a").unwrap();
        let w = TilingWindow::new((0, 0), 3, 3, vec![a; 9]);
        assert_eq!(
            repetitivity_radius(&w, 1).unwrap(),
            RepetitivityRadius::Observed(1)
        );
    }

    #[test]
    fn repetitivity_degenerate_window() {
        let sub = thue_morse();
        let w = expand_substitution(&sub, "a", 1).unwrap();
        assert_eq!(
            repetitivity_radius(&w, 2).unwrap(),
            RepetitivityRadius::NotObserved
        );
    }
}
