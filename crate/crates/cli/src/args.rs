use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "cqnc", version, about = "Noise spectra, sweeps and stability tables for optomechanical force sensing with an ancilla mode")]
pub struct Cli {
    /// Configuration file (TOML). Overrides --preset.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Built-in preset to load when no --config is given.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// Write the table here instead of stdout.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,

    /// Seed for commands that draw random parameters; recorded in the metadata.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Ancilla handling. Defaults to what the [ancilla] section describes.
    #[arg(long, global = true, value_enum)]
    pub control: Option<ControlArg>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControlArg {
    Off,
    Balanced,
    Imbalanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Force-noise spectrum and its components over a frequency grid.
    Spectrum(GridArgs),
    /// Run the [sweep] block of the configuration.
    Sweep,
    /// Characteristic polynomial, Hurwitz determinants and eigenvalues.
    Stability(StabilityArgs),
    /// Standard quantum limit and optimal coupling over a frequency grid.
    Sql(GridArgs),
    /// Normal-mode eigenfrequencies of the probe and the oscillator.
    Nms(NmsArgs),
    /// Spectra in SI units using the [si] block.
    Rescale(RescaleArgs),
    /// Built-in configurations.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

/// Frequency grid. Without any of these flags the command uses its default.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub min: Option<f64>,
    #[arg(long)]
    pub max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingArg>,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    /// Search the coupling threshold; the ancilla follows G.
    #[arg(long, conflicts_with_all = ["table1", "draws"])]
    pub find_gmax: bool,
    /// Working-range table for both g2 conventions.
    #[arg(long, conflicts_with = "draws")]
    pub table1: bool,
    /// Compare the Hurwitz and eigenvalue verdicts on N random draws.
    #[arg(long, value_name = "N")]
    pub draws: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct NmsArgs {
    /// Sweep G instead of using the configured value.
    #[arg(long, requires = "g_max")]
    pub g_min: Option<f64>,
    #[arg(long, requires = "g_min")]
    pub g_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Linear)]
    pub spacing: SpacingArg,
}

#[derive(Debug, Clone, Args)]
pub struct RescaleArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Add the torque sensitivity column (needs mirror_arm_r).
    #[arg(long)]
    pub torque: bool,
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    List,
    Show { name: String },
}
