//! On-disk artifact formats and their round-trip with the in-memory types.
//!
//! Every format is plain JSON with stable field order; half-integer
//! coordinates are stored as doubled integers.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use robinson_core::decomposition::PartialDecomposition;
use robinson_core::geom::Rect;
use robinson_core::inflation::{InflationHierarchy, Level, Supertile};
use robinson_core::tiling::{PrototileSet, TilingWindow, WindowJson};

#[derive(Serialize, Deserialize)]
pub struct LevelDump {
    pub side: u32,
    pub domain: Rect,
    pub guaranteed: Rect,
    pub decomposition: PartialDecomposition,
    pub supertiles: Vec<Supertile>,
}

#[derive(Serialize, Deserialize)]
pub struct HierarchyDump {
    pub schedule_sides: Vec<u32>,
    pub levels: Vec<LevelDump>,
    pub exhausted: Option<robinson_core::inflation::ExhaustionReport>,
}

impl HierarchyDump {
    pub fn from_hierarchy(
        hier: &InflationHierarchy,
        exhausted: Option<robinson_core::inflation::ExhaustionReport>,
    ) -> Self {
        HierarchyDump {
            schedule_sides: hier.levels.iter().map(|l| l.n).collect(),
            levels: hier
                .levels
                .iter()
                .map(|l| LevelDump {
                    side: l.n,
                    domain: l.domain,
                    guaranteed: l.guaranteed,
                    decomposition: l.decomposition.clone(),
                    supertiles: l.supertiles.clone(),
                })
                .collect(),
            exhausted,
        }
    }

    /// Rebuild the hierarchy; assignments are repainted from the children
    /// chains.
    pub fn into_hierarchy(self, window: TilingWindow) -> InflationHierarchy {
        let cell_total = window.cell_count() as usize;
        let mut hier = InflationHierarchy::new(window);
        let mut prev: Option<Vec<u32>> = None;
        for ld in self.levels {
            let mut assignment = vec![0u32; cell_total];
            match &prev {
                None => {
                    for st in &ld.supertiles {
                        for &c in &st.children {
                            assignment[c as usize] = st.id + 1;
                        }
                    }
                }
                Some(prev_assignment) => {
                    let prev_count = hier
                        .levels
                        .last()
                        .map(|l| l.supertiles.len())
                        .unwrap_or(0);
                    let mut map = vec![0u32; prev_count];
                    for st in &ld.supertiles {
                        for &c in &st.children {
                            map[c as usize] = st.id + 1;
                        }
                    }
                    for i in 0..cell_total {
                        let p = prev_assignment[i];
                        if p != 0 {
                            assignment[i] = map[(p - 1) as usize];
                        }
                    }
                }
            }
            prev = Some(assignment.clone());
            hier.levels.push(Level {
                n: ld.side,
                domain: ld.domain,
                guaranteed: ld.guaranteed,
                decomposition: ld.decomposition,
                supertiles: ld.supertiles,
                assignment,
            });
        }
        hier
    }
}

#[derive(Serialize, Deserialize)]
pub struct BoundaryDump {
    pub levels: Vec<BoundaryGraphDump>,
    pub persistent: BoundaryGraphDump,
    /// None when the truncated intersection is not tree-like.
    pub tree_ok: Option<String>,
    pub class: Option<robinson_core::boundary::BoundaryClass>,
    pub features: Vec<robinson_core::boundary::VirtualFeature>,
    pub roots: Option<robinson_core::boundary::RootData>,
    pub stratum: Option<robinson_core::boundary::StratumLabel>,
}

pub type CellEdge = ((i32, i32), (i32, i32));

#[derive(Serialize, Deserialize)]
pub struct BoundaryGraphDump {
    pub level: robinson_core::boundary::GraphLevel,
    pub edge_count: u64,
    /// Unit edges as cell pairs, capped for very large graphs.
    pub edges: Option<Vec<CellEdge>>,
}

pub const EDGE_DUMP_CAP: u64 = 2_000_000;

pub fn graph_dump(g: &robinson_core::boundary::BoundaryGraph) -> BoundaryGraphDump {
    let count = g.edges.count();
    BoundaryGraphDump {
        level: g.level,
        edge_count: count,
        edges: if count <= EDGE_DUMP_CAP {
            Some(g.edges.edges())
        } else {
            None
        },
    }
}

#[derive(Serialize, Deserialize)]
pub struct DiagramDump {
    pub levels: Vec<Vec<robinson_core::bratteli::BVertex>>,
    /// Per layer, one record per edge (multiplicity one each; parallel edges
    /// share source and range).
    pub edges: Vec<Vec<DiagramEdgeDump>>,
    pub standard: bool,
    pub simple: bool,
}

#[derive(Serialize, Deserialize)]
pub struct DiagramEdgeDump {
    pub source: usize,
    pub range: usize,
    pub multiplicity: u32,
    pub order: u32,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_window(path: &Path, window: &TilingWindow, protos: &PrototileSet) -> Result<()> {
    write_json(path, &window.to_json(protos))
}

pub fn read_window(path: &Path, protos: &PrototileSet) -> Result<TilingWindow> {
    let json: WindowJson = read_json(path)?;
    Ok(TilingWindow::from_json(&json, protos)?)
}
