use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "tdmd", version, about = "Tucker-DMD channel prediction toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a channel sequence from a scenario config and write it as CTS1.
    Generate(GenerateArgs),
    /// Predict one snapshot `tau` periods past the end of a CTS1 sequence.
    Predict(PredictArgs),
    /// Run a Monte-Carlo sweep and write the NMSE table as CSV.
    Sweep(SweepArgs),
    /// Compare the full-space and core-space reduced DMD operators.
    Equivalence(EquivalenceArgs),
    /// Print a one-line summary of a CT1, CTS1, TKM1 or DMD1 file.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario config (`key = value` lines); defaults apply to omitted keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CTS1 file.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the noiseless sequence here.
    #[arg(long)]
    pub clean_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictorArgs {
    /// Snapshots of history fed to the predictor.
    #[arg(long, default_value_t = tdmd_core::predictors::DEFAULT_HISTORY)]
    pub history: usize,
    /// Relative singular-value threshold for the Tucker ranks.
    #[arg(long, default_value_t = tdmd_core::predictors::DEFAULT_TUCKER_THRESHOLD)]
    pub threshold: f64,
    /// AR model order.
    #[arg(long, default_value_t = tdmd_core::predictors::DEFAULT_AR_ORDER)]
    pub ar_order: usize,
    /// DMD truncation: `auto`, `auto:<threshold>` or a fixed rank.
    #[arg(long, default_value = "auto")]
    pub dmd_rank: String,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Input CTS1 sequence.
    pub sequence: PathBuf,
    /// zoh, ar, t_ar, full_dmd or t_dmd.
    #[arg(long, short)]
    pub method: String,
    /// Prediction horizon in periods.
    #[arg(long)]
    pub tau: usize,
    #[command(flatten)]
    pub predictor: PredictorArgs,
    /// Output CT1 file for the predicted snapshot.
    #[arg(long, short)]
    pub out: PathBuf,
    /// CT1 ground truth; enables the NMSE in the summary line.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Write the Tucker factors (t_ar, t_dmd) as TKM1.
    #[arg(long)]
    pub save_tucker: Option<PathBuf>,
    /// Write the DMD model (full_dmd, t_dmd) as DMD1.
    #[arg(long)]
    pub save_dmd: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Experiment file: scenario keys plus methods, n_trials, base_seed,
    /// horizons, snrs_db, periods_ms, history, ar_order, threshold, dmd_rank.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Output CSV.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Preset grid: 1 horizon, 2 SNR, 3 measurement period.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub figure: Option<u8>,
    /// Overrides the number of Monte-Carlo trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Use 4 x 64 x 1632 channels instead of the desk-scale defaults.
    #[arg(long)]
    pub paper_dims: bool,
}

#[derive(Debug, Args)]
pub struct EquivalenceArgs {
    /// Input CTS1 sequence.
    pub sequence: PathBuf,
    #[arg(long, default_value_t = tdmd_core::predictors::DEFAULT_TUCKER_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = tdmd_core::predictors::DEFAULT_HISTORY)]
    pub history: usize,
    /// DMD truncation: `auto`, `auto:<threshold>` or a fixed rank.
    #[arg(long, default_value = "auto")]
    pub dmd_rank: String,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub file: PathBuf,
}
