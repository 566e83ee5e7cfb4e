use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "fidmoments",
    version,
    about = "Moments of the gate fidelity of quantum channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check complete positivity and trace preservation.
    Validate(ValidateArgs),
    /// Average fidelity, second moment and variance in closed form.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimates compared against the closed forms.
    Sample(SampleArgs),
    /// Variance of random channels across dimensions.
    Sweep(SweepArgs),
    /// Coefficient form of the variance and its magnitude bounds.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    Identity,
    Depolarizing,
    Dephasing,
    AmplitudeDamping,
    PauliX,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Named channel instead of a file.
    #[arg(
        long,
        value_enum,
        conflicts_with = "file",
        required_unless_present = "file"
    )]
    pub fixture: Option<Fixture>,
    /// Channel JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Ideal unitary (JSON matrix); the analysis uses U† composed with the channel.
    #[arg(long)]
    pub ideal: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Error probability for depolarizing and dephasing fixtures.
    #[arg(long)]
    pub p: Option<f64>,
    /// Damping rate for the amplitude-damping fixture.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Choi rank of the random fixture.
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    /// Seed of the random fixture (defaults to --seed).
    #[arg(long)]
    pub channel_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Highest moment order; orders above 2 use the Kraus/permutation sum.
    #[arg(long, default_value_t = 2)]
    pub moments: usize,
    /// Also evaluate the second moment by direct basis summation (d ≤ 4).
    #[arg(long)]
    pub direct_sum: bool,
    /// Report the single-qubit closed form as the variance.
    #[arg(long)]
    pub qubit_form: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    #[arg(long, default_value_t = 2)]
    pub moments: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub dims: Vec<usize>,
    /// `random` (default) or `depolarizing`.
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
