//! Run configuration: one JSON file drives every stage; flags override.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use robinson_core::inflation::{LevelSchedule, ScheduleMode};
use robinson_core::tiling::SquareSubstitution;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    /// Path to the substitution spec, relative to the config file.
    pub substitution: String,
    /// Seed prototile for the expansion.
    pub label: String,
    /// Expansion level of the generated window.
    pub level: u32,
    /// Optional sub-window: sampled at a seeded origin when `sample` is set,
    /// anchored at the expansion origin otherwise.
    #[serde(default)]
    pub window: Option<WindowSpec>,
    /// Single seed for all randomness (sub-window sampling).
    #[serde(default)]
    pub seed: u64,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub rule: RuleSpec,
    /// Margin in cells; defaults to 3 * N1 and must be at least that.
    #[serde(default)]
    pub margin: Option<u32>,
    /// Virtual-feature detection parameters.
    #[serde(default)]
    pub virtual_feature: VirtualFeatureSpec,
    #[serde(default = "default_out")]
    pub out_dir: String,
    /// Pixels per cell in rendered figures (must be even).
    #[serde(default = "default_cell_px")]
    pub cell_px: u32,
}

fn default_out() -> String {
    "out".into()
}

fn default_cell_px() -> u32 {
    8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowSpec {
    pub size: [u32; 2],
    /// "seeded" draws the origin from the seed; "aligned" anchors at the
    /// expansion origin.
    #[serde(default)]
    pub sample: SampleMode,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    #[default]
    Aligned,
    Seeded,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub mode: ScheduleModeSpec,
    pub sides: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleModeSpec {
    Cubic,
    Custom,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[derive(Default)]
pub enum RuleSpec {
    #[default]
    Greedy,
    Pattern {
        /// Marker = expansion of this label to this level.
        #[serde(default)]
        marker_label: Option<String>,
        #[serde(default = "default_marker_level")]
        marker_level: u32,
    },
}

fn default_marker_level() -> u32 {
    1
}


#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VirtualFeatureSpec {
    /// Ribbon width / box side in cells; defaults to 2 * N1.
    #[serde(default)]
    pub box_size: Option<u32>,
    #[serde(default = "default_min_levels")]
    pub min_levels: usize,
}

fn default_min_levels() -> usize {
    3
}

impl Default for VirtualFeatureSpec {
    fn default() -> Self {
        VirtualFeatureSpec {
            box_size: None,
            min_levels: default_min_levels(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        config.validate()?;
        Ok((config, base))
    }

    pub fn schedule(&self) -> LevelSchedule {
        LevelSchedule {
            sides: self.schedule.sides.clone(),
            mode: match self.schedule.mode {
                ScheduleModeSpec::Cubic => ScheduleMode::Cubic,
                ScheduleModeSpec::Custom => ScheduleMode::Custom,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.sides.is_empty() {
            // A zero-level run is legal: just the window.
        }
        self.schedule()
            .validate()
            .map_err(|e| anyhow::anyhow!("invalid schedule: {e}"))?;
        if let (Some(m), Some(&n1)) = (self.margin, self.schedule.sides.first()) {
            if m < 3 * n1 {
                bail!("margin {m} is below 3 * N1 = {}", 3 * n1);
            }
        }
        if self.cell_px == 0 || !self.cell_px.is_multiple_of(2) {
            bail!("cell_px must be a positive even number");
        }
        Ok(())
    }

    pub fn load_substitution(&self, base: &Path) -> Result<SquareSubstitution> {
        let path = base.join(&self.substitution);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading substitution {}", path.display()))?;
        Ok(SquareSubstitution::from_json(&text)?)
    }
}
