use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sfharris::simstudy::Method;

#[derive(Debug, Parser)]
#[command(name = "sfharris", version, about = "SF-Harris process simulation, estimation and volatility forecasting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate SF-Harris, semi-Markov or mixture paths to a skeleton CSV.
    Simulate(SimulateArgs),
    /// Estimate the process parameters from an observation CSV.
    Estimate(EstimateArgs),
    /// Forward paths, pointwise HPD bands and first-jump summaries.
    Predict(PredictArgs),
    /// Synthetic minute bars from the GIG-Harris volatility model.
    SvSynth(SvSynthArgs),
    /// Run the volatility pipeline on minute bars.
    SvFit(SvFitArgs),
    /// HPD coverage of a fitted run on holdout bars.
    SvForecast(SvForecastArgs),
    /// Randomized estimation study.
    Study(StudyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap on the worker pool.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fresh output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON configuration or a previous run manifest. Flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Harris,
    SemiMarkov,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Gig,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HoldingKind {
    Exponential,
    Lomax,
    Pareto,
    Gamma,
}

#[derive(Debug, Clone, Args)]
pub struct MarginalFlags {
    /// Marginal law of the states.
    #[arg(long)]
    pub marginal: Option<FamilyKind>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Support of a discrete uniform marginal, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub support: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[command(flatten)]
    pub marginal: MarginalFlags,
    /// Jump rate.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Uniformization: keep the current state with this probability at each event.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Holding-time law of the semi-Markov model.
    #[arg(long)]
    pub holding: Option<HoldingKind>,
    #[arg(long)]
    pub shape: Option<f64>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub rate: Option<f64>,
    /// Long-memory exponent of the mixture model, in (1/2, 1).
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Also write the first path observed on this grid step.
    #[arg(long)]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LatentArg {
    Observed,
    Sampled,
}

#[derive(Debug, Clone, Args)]
pub struct GibbsFlags {
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Treatment of repeated observations in the Gibbs samplers.
    #[arg(long)]
    pub latent: Option<LatentArg>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Observation CSV with header `time,value`.
    #[arg(long)]
    pub input: PathBuf,
    /// Methods, comma separated: ndnj, mle, em, gibbs-a, gibbs-b.
    #[arg(long = "method", value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long)]
    pub family: Option<FamilyKind>,
    #[arg(long, value_delimiter = ',')]
    pub support: Option<Vec<f64>>,
    #[command(flatten)]
    pub gibbs: GibbsFlags,
    /// Independent Gibbs chains per method.
    #[arg(long)]
    pub chains: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    A,
    B,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    /// Observation CSV with header `time,value`.
    #[arg(long)]
    pub input: PathBuf,
    /// Chains CSV written by `estimate`.
    #[arg(long)]
    pub chains: PathBuf,
    #[arg(long)]
    pub family: Option<FamilyKind>,
    #[arg(long, value_delimiter = ',')]
    pub support: Option<Vec<f64>>,
    /// Sampler that produced the chains.
    #[arg(long)]
    pub variant: Option<VariantArg>,
    /// Forecast length past the last observation.
    #[arg(long)]
    pub ahead: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Points of the HPD grid.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// HPD mass.
    #[arg(long)]
    pub prob: Option<f64>,
    /// Delays for the first-jump probabilities, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub within: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SvSynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub days: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Trading days per model time unit.
    #[arg(long)]
    pub time_unit_days: Option<f64>,
    /// Injected price jumps.
    #[arg(long)]
    pub jumps: Option<usize>,
    /// Amplitude of a U-shaped intraday volatility pattern.
    #[arg(long)]
    pub u_shape: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterKind {
    Collapse,
    ChangePoint,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VolArg {
    Filtered,
    Realized,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SvFitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Bar CSV with header `timestamp,open,high,low,close,volume`.
    #[arg(long)]
    pub bars: PathBuf,
    #[arg(long)]
    pub time_unit_days: Option<f64>,
    #[arg(long)]
    pub filter: Option<FilterKind>,
    /// Tolerance of the collapse filter.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Penalty multiplier of the change-point filter.
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub no_jumps: bool,
    #[arg(long)]
    pub no_periodicity: bool,
    /// Volatility increments of the drift and risk-premium update.
    #[arg(long)]
    pub volatility: Option<VolArg>,
    #[command(flatten)]
    pub gibbs: GibbsFlags,
    /// Fit on this leading fraction of days and keep the rest as holdout.
    #[arg(long)]
    pub split: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Returns,
    LogPrice,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SvForecastArgs {
    #[command(flatten)]
    pub common: Common,
    /// Output directory of `sv-fit`.
    #[arg(long)]
    pub run: PathBuf,
    /// Holdout bars; defaults to the holdout written by `sv-fit --split`.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub target: Option<TargetArg>,
    /// HPD masses, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKindArg {
    ProcessUniform,
    ProcessGig,
    Sv,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct StudyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub kind: Option<StudyKindArg>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sample_sizes: Option<Vec<usize>>,
    #[arg(long = "method", value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// 100 replications.
    #[arg(long)]
    pub full: bool,
}
