use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "docrec", version, about = "Evaluate, convert and assemble reconstructed documents")]
pub struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "DOCREC_JOBS", default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check documents against the model invariants.
    Validate(ValidateArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Rewrite documents into another representation.
    Convert(ConvertArgs),
    /// Reorder elements by recursive XY-cut.
    Order(OrderArgs),
    /// Assemble ground-truth documents from layout boxes and text lines.
    Gtgen(GtgenArgs),
}

/// `-` reads stdin.
#[derive(Debug, Args)]
pub struct InputArg {
    #[arg(value_name = "INPUT", default_value = "-")]
    pub input: PathBuf,
}

/// Written to stdout when absent.
#[derive(Debug, Args)]
pub struct OutputArg {
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Newline-delimited document JSON.
    Json,
    /// Token text of a single document.
    Tokens,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArg,
    #[arg(long, value_enum, default_value_t = InputFormat::Json)]
    pub format: InputFormat,
    /// Page width for token input.
    #[arg(long, required_if_eq("format", "tokens"))]
    pub page_width: Option<f64>,
    /// Page height for token input.
    #[arg(long, required_if_eq("format", "tokens"))]
    pub page_height: Option<f64>,
    #[arg(long, default_value_t = docrec::model::DEFAULT_BINS)]
    pub bins: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Dsm,
    Ned,
    Both,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub gt: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub pred: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Both)]
    pub metric: Metric,
    /// Align documents by this field instead of by line.
    #[arg(long, value_name = "FIELD")]
    pub key: Option<String>,
    #[command(flatten)]
    pub output: OutputArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Markdown,
    Layout,
    Text,
    Tables,
    Formulas,
    Tokens,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub input: InputArg,
    #[arg(long, value_enum)]
    pub to: Target,
    #[arg(long, default_value_t = docrec::model::DEFAULT_BINS)]
    pub bins: u32,
    #[command(flatten)]
    pub output: OutputArg,
}

#[derive(Debug, Args)]
pub struct OrderFlags {
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub min_gap: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub y_tolerance: f64,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[command(flatten)]
    pub input: InputArg,
    #[command(flatten)]
    pub order: OrderFlags,
    #[command(flatten)]
    pub output: OutputArg,
}

#[derive(Debug, Args)]
pub struct GtgenArgs {
    #[command(flatten)]
    pub input: InputArg,
    #[command(flatten)]
    pub order: OrderFlags,
    /// Share of a line's area an element must cover to own it.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub iou_threshold: f64,
    /// Similarity above which overlapping lines are merged.
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub fuzzy_threshold: f64,
    #[command(flatten)]
    pub output: OutputArg,
}
