use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Run configuration. Serialized verbatim into the provenance block of every
/// artifact.
#[derive(Debug, Parser, Serialize)]
#[command(name = "strain-decomp", version, about = "Strain-space decompositions and diagnostics on the periodic box")]
pub struct Cli {
    /// Worker threads. Accepted for interface stability; all commands run on
    /// one thread.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = ToleranceProfile::Default)]
    pub tolerance_profile: ToleranceProfile,

    /// One JSON object per log line on stderr.
    #[arg(long, global = true)]
    pub json_logs: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    /// The documented acceptance tolerances.
    Default,
    /// Tolerances ten times tighter.
    Strict,
}

impl ToleranceProfile {
    pub fn scale(self) -> f64 {
        match self {
            ToleranceProfile::Default => 1.0,
            ToleranceProfile::Strict => 0.1,
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Split a symmetric (or general) matrix field file into its orthogonal parts.
    Decompose(DecomposeArgs),
    /// Run the identity suite on random fields and report residuals.
    Verify(VerifyArgs),
    /// Estimate the max-mid supremum by constrained ascent.
    EstimateSup(EstimateArgs),
    /// Build a near-maximizer of the fixed-direction problem.
    NearMax(NearMaxArgs),
    /// Integrate Navier-Stokes in velocity and/or matrix-potential form.
    Evolve(EvolveArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random fields per identity.
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintArg {
    Free,
    Fixed,
    Plane,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ConstraintArg::Free)]
    pub constraint: ConstraintArg,
    /// Direction for `--constraint fixed`, as `x,y,z`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "0,0,1")]
    pub direction: Vec<f64>,
    /// Weight on the new iterate, in (0, 1]; 1 is the full step.
    #[arg(long, default_value_t = 1.0)]
    pub damping: f64,
    /// Start the first restart from the Gaussian family with this sharpness.
    #[arg(long)]
    pub warm_start: Option<f64>,
    /// Score only the dealiased band of the strain projection.
    #[arg(long)]
    pub band_limited: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NearMaxFamily {
    /// Random spectrum on the shell near the critical angle.
    Shell,
    /// Periodized anisotropic Gaussian.
    Gaussian,
    /// Strain field maximizing the diagonal-component ratio.
    Diag,
}

#[derive(Debug, Args, Serialize)]
pub struct NearMaxArgs {
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = NearMaxFamily::Shell)]
    pub family: NearMaxFamily,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gaussian sharpness.
    #[arg(long, default_value_t = 64.0)]
    pub sharpness: f64,
    /// Fixed direction as `x,y,z` (a coordinate axis for the Gaussian family).
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "0,0,1")]
    pub direction: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Velocity,
    Potential,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[arg(long, value_enum, default_value_t = Form::Both)]
    pub form: Form,
    /// `taylor-green`, `random` or `file:<path>`.
    #[arg(long, default_value = "taylor-green")]
    pub init: String,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long = "T", default_value_t = 0.1)]
    pub t_final: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
    /// Seed for `--init random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
