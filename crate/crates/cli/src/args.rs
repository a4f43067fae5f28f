use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use semmap_core::pipeline::PipelineConfig;

use crate::manifest::Preset;

#[derive(Debug, Parser)]
#[command(name = "semmap", version, about = "Semantic topological mapping and place categorization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay sequences, train, and write maps, state, assignments and scores.
    Run(RunArgs),
    /// Score each sequence right after its own training and after all training.
    Overtime(OvertimeArgs),
    /// Latin Hypercube plans and searches.
    #[command(subcommand)]
    Lhs(LhsCommand),
    /// Generate a synthetic labeled sequence.
    Synth(SynthArgs),
    /// Replay one sequence and export its topological map.
    Export(ExportArgs),
}

/// Parameter overrides. Unset flags keep the preset (or manifest) value.
#[derive(Debug, Default, Clone, Args)]
pub struct ConfigArgs {
    /// Categorizer preset used as the base configuration.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub at: Option<f64>,
    #[arg(long)]
    pub lp: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub maxcomp: Option<u32>,
    #[arg(long)]
    pub eb: Option<f64>,
    #[arg(long)]
    pub en: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Summation limit of the node evidence accumulators.
    #[arg(long)]
    pub st: Option<f64>,
    #[arg(long = "semmap-at")]
    pub semmap_at: Option<f64>,
    #[arg(long = "semmap-e")]
    pub semmap_e: Option<f64>,
}

impl ConfigArgs {
    pub fn apply(&self, mut cfg: PipelineConfig) -> PipelineConfig {
        if let Some(p) = self.preset {
            cfg.som = p.som();
        }
        let som = &mut cfg.som;
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut som.activation_threshold, self.at);
        set(&mut som.lowest_win_fraction, self.lp);
        set(&mut som.relevance_rate, self.beta);
        set(&mut som.winner_rate, self.eb);
        set(&mut som.neighbor_rate, self.en);
        set(&mut som.relevance_smoothness, self.s);
        set(&mut som.connection_threshold, self.c);
        if let Some(v) = self.maxcomp {
            som.max_competitions = v;
        }
        if let Some(v) = self.nmax {
            som.max_nodes = v;
        }
        set(&mut cfg.semmap.summation_limit, self.st);
        set(&mut cfg.semmap.activation_threshold, self.semmap_at);
        set(&mut cfg.semmap.learning_rate, self.semmap_e);
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct OrderArgs {
    /// Train in a seeded random order instead of the given order.
    #[arg(long)]
    pub shuffle: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run manifest; flags given here override it.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Sequence files, used when no manifest is given.
    #[arg(long = "input", short = 'i')]
    pub inputs: Vec<PathBuf>,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub shuffle: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Float encoding of the categorizer state: decimal or hex.
    #[arg(long = "float-format")]
    pub float_format: Option<String>,
    /// Also write the two-checkpoint table.
    #[arg(long)]
    pub overtime: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Level {
    #[default]
    Node,
    Frame,
}

#[derive(Debug, Args)]
pub struct OvertimeArgs {
    #[arg(long = "input", short = 'i', required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output table; standard output when omitted.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Level::Node)]
    pub level: Level,
    #[command(flatten)]
    pub order: OrderArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Subcommand)]
pub enum LhsCommand {
    /// Draw a plan over the searched parameter ranges.
    Plan(LhsPlanArgs),
    /// Replay a corpus under every plan row and rank the rows.
    Search(LhsSearchArgs),
}

#[derive(Debug, Args)]
pub struct LhsPlanArgs {
    #[arg(long, short = 'k', default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LhsSearchArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long = "input", short = 'i', required = true)]
    pub inputs: Vec<PathBuf>,
    /// Ranked results table; standard output when omitted.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Per-parameter spread table.
    #[arg(long)]
    pub sensitivity: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = Level::Node)]
    pub level: Level,
    #[command(flatten)]
    pub order: OrderArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Built-in layout: loop4, rooms5 or rooms5-shuffled.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub demo: Option<String>,
    /// TOML layout description.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the layout's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    #[default]
    Text,
    Dot,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long = "input", short = 'i')]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ExportFormat::Text)]
    pub format: ExportFormat,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}
