mod artifacts;
mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};

use commands::Stage;
use config::{RuleSpec, RunConfig, ScheduleModeSpec, ScheduleSpec};
use svg::Layer;

/// Inflation hierarchies on marked-square tiling windows.
#[derive(Parser)]
#[command(name = "robinson", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed override for randomized test windows.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Schedule override, comma separated: "4,64".
    #[arg(long, global = true)]
    schedule: Option<String>,
    /// Placement rule override: greedy | pattern.
    #[arg(long, global = true)]
    rule: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Expand the substitution into a window artifact.
    Generate(Common),
    /// One level of maximal packing with arms, crosses, and sectors.
    Decompose(Common),
    /// Build the full hierarchy under the schedule.
    Inflate(Common),
    /// Boundary graphs, classification, roots, and stratum.
    Boundary(Common),
    /// Bratteli diagram, frequencies, and measure bounds.
    Bratteli(Common),
    /// Re-check every invariant against the dumped artifacts.
    Verify(Common),
    /// Emit an SVG figure of selected layers.
    Render {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of squares,arms,crosses,decorations,boundary,supertiles.
        #[arg(long, default_value = "squares,arms,crosses")]
        layers: String,
        /// Output file name inside the output directory.
        #[arg(long, default_value = "render.svg")]
        file: String,
    },
    /// Full pipeline: generate, inflate, boundary, bratteli, verify.
    Run(Common),
}

fn load_config(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| anyhow!("--config is required"))?;
    let (mut config, base) = RunConfig::load(path)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(s) = &common.schedule {
        let sides = s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| anyhow!("bad --schedule: {e}"))?;
        config.schedule = ScheduleSpec {
            mode: ScheduleModeSpec::Custom,
            sides,
        };
    }
    if let Some(r) = &common.rule {
        config.rule = match r.as_str() {
            "greedy" => RuleSpec::Greedy,
            "pattern" => RuleSpec::Pattern {
                marker_label: None,
                marker_level: 1,
            },
            other => return Err(anyhow!("unknown rule `{other}` (greedy | pattern)")),
        };
    }
    config.validate()?;
    Ok((config, base))
}

fn parse_layers(csv: &str) -> Result<Vec<Layer>> {
    csv.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| Layer::parse(t).ok_or_else(|| anyhow!("unknown layer `{t}`")))
        .collect()
}

fn init_threads(common: &Common) {
    if let Some(n) = common.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Exit codes: 0 pass, 1 invariant failure, 2 usage error.
fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate(c) => run_stage(c, |s| s.cmd_generate().map(|_| true)),
        Command::Decompose(c) => run_stage(c, |s| s.cmd_decompose().map(|_| true)),
        Command::Inflate(c) => run_stage(c, |s| s.cmd_inflate().map(|_| true)),
        Command::Boundary(c) => run_stage(c, |s| s.cmd_boundary().map(|_| true)),
        Command::Bratteli(c) => run_stage(c, |s| s.cmd_bratteli().map(|_| true)),
        Command::Verify(c) => run_stage(c, |s| s.cmd_verify()),
        Command::Render {
            common,
            layers,
            file,
        } => {
            let parsed = match parse_layers(layers) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            run_stage(common, |s| s.cmd_render(&parsed, file).map(|_| true))
        }
        Command::Run(c) => run_stage(c, |s| s.cmd_run()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageOrFailure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(UsageOrFailure::Failure(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

enum UsageOrFailure {
    Usage(anyhow::Error),
    Failure(anyhow::Error),
}

fn run_stage(
    common: &Common,
    f: impl FnOnce(&Stage<'_>) -> Result<bool>,
) -> std::result::Result<bool, UsageOrFailure> {
    init_threads(common);
    let (config, base) = load_config(common).map_err(UsageOrFailure::Usage)?;
    let stage =
        Stage::new(&config, &base, common.out.as_deref()).map_err(UsageOrFailure::Usage)?;
    f(&stage).map_err(|e| {
        // Invariant violations and exhausted windows are run failures; bad
        // inputs are usage errors.
        if e.downcast_ref::<robinson_core::Error>().is_some() {
            UsageOrFailure::Failure(e)
        } else if e.to_string().contains("reading") || e.to_string().contains("parsing") {
            UsageOrFailure::Usage(e)
        } else {
            UsageOrFailure::Failure(e)
        }
    })
}
