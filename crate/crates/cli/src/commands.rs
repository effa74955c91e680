//! Stage implementations behind the subcommands. Every stage reads its
//! inputs from the output directory when present and recomputes them
//! otherwise, so the commands compose in any order.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use robinson_core::boundary::{
    classify_boundary, detect_virtual_features, extract_boundary_graph, find_roots,
    persistent_boundary, stratify, BoundaryConfig,
};
use robinson_core::bratteli::{
    boundary_measure_bound, build_diagram, check_standard_simple, tile_frequencies,
};
use robinson_core::decomposition::{decompose, PlacementRule};
use robinson_core::inflation::{run_hierarchy_with, InflationHierarchy};
use robinson_core::tiling::{expand_substitution, sample_windows, SquareSubstitution, TilingWindow};
use robinson_core::verify::{recount_boundary_ratio, verify_hierarchy, VerifyOptions};
use robinson_core::Error as CoreError;

use crate::artifacts::{
    graph_dump, read_json, read_window, write_json, write_window, BoundaryDump, DiagramDump,
    DiagramEdgeDump, HierarchyDump,
};
use crate::config::{RuleSpec, RunConfig, SampleMode};
use crate::svg::{Layer, SvgScene};

pub struct Stage<'a> {
    pub config: &'a RunConfig,
    pub base: &'a Path,
    pub out: PathBuf,
}

impl<'a> Stage<'a> {
    pub fn new(config: &'a RunConfig, base: &'a Path, out_override: Option<&Path>) -> Result<Self> {
        let out = out_override
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| base.join(&config.out_dir));
        std::fs::create_dir_all(&out)
            .with_context(|| format!("creating output dir {}", out.display()))?;
        Ok(Stage {
            config,
            base,
            out,
        })
    }

    pub fn substitution(&self) -> Result<SquareSubstitution> {
        self.config.load_substitution(self.base)
    }

    fn window_path(&self) -> PathBuf {
        self.out.join("window.json")
    }

    /// Generate (or reload) the run's window.
    pub fn window(&self, sub: &SquareSubstitution) -> Result<TilingWindow> {
        let path = self.window_path();
        if path.exists() {
            return read_window(&path, sub.prototiles());
        }
        let full = expand_substitution(sub, &self.config.label, self.config.level)?;
        let window = match &self.config.window {
            None => full,
            Some(spec) => {
                let (w, h) = (spec.size[0], spec.size[1]);
                match spec.sample {
                    SampleMode::Aligned => full.subwindow(robinson_core::geom::Rect::new(
                        full.bounds().x0,
                        full.bounds().y0,
                        full.bounds().x0 + w as i32,
                        full.bounds().y0 + h as i32,
                    )),
                    SampleMode::Seeded => sample_windows(&full, (w, h), 1, self.config.seed)
                        .pop()
                        .ok_or_else(|| anyhow!("sampling produced no window"))?,
                }
            }
        };
        Ok(window)
    }

    pub fn marker(&self, sub: &SquareSubstitution) -> Result<Option<TilingWindow>> {
        match &self.config.rule {
            RuleSpec::Greedy => Ok(None),
            RuleSpec::Pattern {
                marker_label,
                marker_level,
            } => {
                let label = marker_label
                    .clone()
                    .unwrap_or_else(|| sub.prototiles().get(0).name.clone());
                Ok(Some(expand_substitution(sub, &label, *marker_level)?))
            }
        }
    }

    pub fn cmd_generate(&self) -> Result<()> {
        let sub = self.substitution()?;
        let window = self.window(&sub)?;
        write_window(&self.window_path(), &window, sub.prototiles())?;
        write_json(&self.out.join("config.json"), self.config)?;
        println!(
            "window {}x{} at ({}, {}) -> {}",
            window.width(),
            window.height(),
            window.origin().0,
            window.origin().1,
            self.window_path().display()
        );
        Ok(())
    }

    pub fn cmd_decompose(&self) -> Result<()> {
        let sub = self.substitution()?;
        let window = self.window(&sub)?;
        let n1 = *self
            .config
            .schedule
            .sides
            .first()
            .ok_or_else(|| anyhow!("schedule has no sides; nothing to decompose"))?;
        let margin = self.config.margin.unwrap_or(3 * n1);
        let marker = self.marker(&sub)?;
        let rule = match &marker {
            Some(m) => PlacementRule::PatternAnchored { marker: m },
            None => PlacementRule::GreedyLex,
        };
        let dec = decompose(&window, n1, margin, rule)?;
        write_json(&self.out.join("decomposition.json"), &dec)?;
        println!(
            "decomposition: {} squares, {} arms, {} crosses, {} censored components",
            dec.squares.len(),
            dec.arms.len(),
            dec.crosses.len(),
            dec.censored_components
        );
        Ok(())
    }

    /// Build the hierarchy (or reload it from the artifact).
    pub fn hierarchy(
        &self,
        sub: &SquareSubstitution,
        window: &TilingWindow,
    ) -> Result<(InflationHierarchy, Option<robinson_core::inflation::ExhaustionReport>)> {
        let path = self.out.join("hierarchy.json");
        if path.exists() {
            let dump: HierarchyDump = read_json(&path)?;
            let ex = dump.exhausted.clone();
            return Ok((dump.into_hierarchy(window.clone()), ex));
        }
        let marker = self.marker(sub)?;
        let run = run_hierarchy_with(window.clone(), &self.config.schedule(), marker.as_ref())?;
        Ok((run.hierarchy, run.exhausted))
    }

    pub fn cmd_inflate(&self) -> Result<()> {
        let sub = self.substitution()?;
        let window = self.window(&sub)?;
        write_window(&self.window_path(), &window, sub.prototiles())?;
        write_json(&self.out.join("config.json"), self.config)?;
        let (hier, exhausted) = self.hierarchy(&sub, &window)?;
        let dump = HierarchyDump::from_hierarchy(&hier, exhausted.clone());
        write_json(&self.out.join("hierarchy.json"), &dump)?;
        let iso = robinson_core::inflation::isoperimetric_report(&hier);
        write_json(&self.out.join("isoperimetry.json"), &iso)?;
        for (i, level) in hier.levels.iter().enumerate() {
            let li = &iso.levels[i];
            println!(
                "level {}: side {}, {} supertiles, {} squares, A={} L={} ratio {}",
                i + 1,
                level.n,
                level.supertiles.len(),
                level.decomposition.squares.len(),
                li.max_area,
                li.max_perimeter,
                li.max_ratio,
            );
        }
        if let Some(ex) = exhausted {
            println!(
                "window exhausted at level {} (side {}, needs > {} cells per axis)",
                ex.level, ex.n, ex.min_side
            );
        }
        Ok(())
    }

    pub fn boundary_config(&self) -> BoundaryConfig {
        let n1 = self.config.schedule.sides.first().copied().unwrap_or(2);
        BoundaryConfig {
            box_size: self.config.virtual_feature.box_size.unwrap_or(2 * n1),
            min_levels: self.config.virtual_feature.min_levels,
        }
    }

    pub fn cmd_boundary(&self) -> Result<()> {
        let sub = self.substitution()?;
        let window = self.window(&sub)?;
        let (hier, _) = self.hierarchy(&sub, &window)?;
        let bc = self.boundary_config();

        let levels: Vec<_> = (1..=hier.levels.len())
            .map(|l| graph_dump(&extract_boundary_graph(&hier, l)))
            .collect();
        let features = detect_virtual_features(&hier, &bc);

        let (persistent, tree_ok, class, roots, stratum) = match persistent_boundary(&hier) {
            Ok(pb) => {
                let class = classify_boundary(&hier, &features, &bc)?;
                let roots = match find_roots(&hier) {
                    Ok(r) => Some(r),
                    Err(CoreError::NoRoot) => None,
                    Err(e) => return Err(e.into()),
                };
                let stratum = stratify(&class, roots.as_ref(), hier.levels.len());
                (graph_dump(&pb), None, Some(class), roots, Some(stratum))
            }
            Err(e @ (CoreError::BoundaryCycle { .. } | CoreError::TerminalVertex { .. })) => {
                // The truncation is too shallow for the tree view; report an
                // undetermined classification instead of failing the stage.
                let top = extract_boundary_graph(&hier, hier.levels.len());
                (graph_dump(&top), Some(e.to_string()), None, None, None)
            }
            Err(e) => return Err(e.into()),
        };

        let dump = BoundaryDump {
            levels,
            persistent,
            tree_ok,
            class,
            features,
            roots,
            stratum,
        };
        write_json(&self.out.join("boundary.json"), &dump)?;
        match (&dump.class, &dump.stratum) {
            (Some(c), Some(s)) => println!(
                "class {:?}, ends {:?}, components {}; stratum {:?}",
                c.case_tag, c.ends, c.component_count, s
            ),
            _ => println!(
                "boundary not tree-like at this depth: {}",
                dump.tree_ok.as_deref().unwrap_or("?")
            ),
        }
        Ok(())
    }

    pub fn cmd_bratteli(&self) -> Result<()> {
        let sub = self.substitution()?;
        let window = self.window(&sub)?;
        let (hier, _) = self.hierarchy(&sub, &window)?;
        let d = build_diagram(&hier, sub.prototiles().len());
        let (standard, simple) = check_standard_simple(&d);
        let dump = DiagramDump {
            levels: d.levels.clone(),
            edges: d
                .edges
                .iter()
                .map(|layer| {
                    layer
                        .iter()
                        .map(|e| DiagramEdgeDump {
                            source: e.source,
                            range: e.range,
                            multiplicity: 1,
                            order: e.order,
                        })
                        .collect()
                })
                .collect(),
            standard,
            simple,
        };
        write_json(&self.out.join("diagram.json"), &dump)?;
        let freq = tile_frequencies(&sub)?;
        write_json(&self.out.join("frequencies.json"), &freq)?;
        for l in 1..=hier.levels.len() {
            let bound = boundary_measure_bound(&hier, l);
            println!("level {l} boundary measure bound {bound}");
        }
        println!("diagram: standard={standard} simple={simple}");
        Ok(())
    }

    /// Re-run every module invariant against the dumped artifacts.
    pub fn cmd_verify(&self) -> Result<bool> {
        let sub = self.substitution()?;
        let window_path = self.window_path();
        if !window_path.exists() {
            bail!("no window.json in {}; run `inflate` first", self.out.display());
        }
        let window = read_window(&window_path, sub.prototiles())?;
        let hier_path = self.out.join("hierarchy.json");
        if !hier_path.exists() {
            bail!("no hierarchy.json in {}; run `inflate` first", self.out.display());
        }
        let dump: HierarchyDump = read_json(&hier_path)?;
        let hier = dump.into_hierarchy(window);

        // The every-label-in-every-supertile proxy is guaranteed only when
        // every rule image already contains every label and the squares are
        // large enough to swallow a full aligned block.
        let incidence_positive = sub
            .incidence()
            .iter()
            .all(|row| row.iter().all(|&v| v > 0));
        let n1 = hier.levels.first().map(|l| l.n).unwrap_or(0);
        let report = verify_hierarchy(
            &hier,
            &VerifyOptions {
                check_label_minimality: incidence_positive && n1 >= 2 * sub.expansion() - 1,
                label_count: sub.prototiles().len(),
            },
        );
        report.print();

        // Measure arithmetic: the dumped assignment-based ratio must equal
        // the children-chain recount exactly.
        let mut all_ok = report.passed();
        for l in 1..=hier.levels.len() {
            let a = boundary_measure_bound(&hier, l);
            let b = recount_boundary_ratio(&hier, l);
            let ok = a == b;
            println!(
                "{}  level {l} measure-bound recount ({a} vs {b})",
                if ok { "pass" } else { "FAIL" }
            );
            all_ok &= ok;
        }

        // Frequencies normalize.
        let freq = tile_frequencies(&sub)?;
        let sum: f64 = freq.frequencies.iter().sum();
        let ok = (sum - 1.0).abs() < 1e-9 && freq.frequencies.iter().all(|&f| f > 0.0);
        println!(
            "{}  frequency measure normalization (sum {sum})",
            if ok { "pass" } else { "FAIL" }
        );
        all_ok &= ok;

        write_json(&self.out.join("verification.json"), &report)?;
        Ok(all_ok)
    }

    pub fn cmd_render(&self, layers: &[Layer], file: &str) -> Result<()> {
        let sub = self.substitution()?;
        let window = self.window(&sub)?;
        let (hier, _) = self.hierarchy(&sub, &window)?;
        let mut scene = SvgScene::new(window.bounds(), self.config.cell_px);
        if let Some(level) = hier.levels.first() {
            scene.add_decomposition(&level.decomposition, layers);
        }
        if layers.contains(&Layer::Supertiles) {
            if let Some(level) = hier.levels.last() {
                scene.add_supertiles(&level.supertiles);
            }
        }
        if layers.contains(&Layer::Boundary) {
            match persistent_boundary(&hier) {
                Ok(pb) => scene.add_boundary(&pb),
                Err(_) => {
                    if !hier.levels.is_empty() {
                        let top = extract_boundary_graph(&hier, hier.levels.len());
                        scene.add_boundary(&top);
                    }
                }
            }
        }
        let svg = scene.finish();
        let path = self.out.join(file);
        std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    /// The whole pipeline: artifacts plus the verification report. Returns
    /// whether every hard invariant passed.
    pub fn cmd_run(&self) -> Result<bool> {
        self.cmd_generate()?;
        self.cmd_inflate()?;
        self.cmd_boundary()?;
        self.cmd_bratteli()?;
        self.cmd_verify()
    }
}
