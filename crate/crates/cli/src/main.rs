#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Cavity electromechanics from the command line. Frequencies and rates are
/// ordinary frequencies in Hz; data go to files or standard output, all
/// diagnostics to standard error.
#[derive(Debug, Parser)]
#[command(name = "emcavity", version, about, max_term_width = 100)]
pub struct Cli {
    /// Cap on worker threads for parallel sweeps.
    #[arg(long, global = true, env = "EMCAVITY_THREADS")]
    pub threads: Option<usize>,

    /// Write the run manifest here instead of standard error.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bose-Einstein occupation of a mode.
    Thermal {
        #[arg(long)]
        f_hz: f64,
        #[arg(long)]
        t_k: f64,
    },
    /// Reflection spectrum of the configured cavity.
    Reflect(ReflectArgs),
    /// OMIT spectra around the mechanical feature for several photon numbers.
    Omit(OmitArgs),
    /// Optomechanical damping rate against detuning.
    Damping(DampingArgs),
    /// Cavity-magnon-mechanics entanglement and stability.
    #[command(subcommand)]
    Tripartite(TripartiteCommand),
    /// Fit measured reflection traces.
    #[command(subcommand)]
    Fit(FitCommand),
    /// Synthesize a reflection trace with optional seeded noise.
    Synth(SynthArgs),
    /// Design integrals over exported field samples.
    #[command(subcommand)]
    Device(DeviceCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Bare,
    Omit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[value(name = "re_im")]
    ReIm,
    #[value(name = "db_phase")]
    DbPhase,
}

impl From<Format> for emcavity::fitting::TraceFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::ReIm => Self::ReIm,
            Format::DbPhase => Self::DbPhase,
        }
    }
}

/// Pump overrides shared by the spectrum commands.
#[derive(Debug, Clone, Args)]
pub struct PumpOverride {
    /// Cavity-minus-pump detuning; defaults to the config pump, then to the
    /// mechanical frequency.
    #[arg(long, allow_hyphen_values = true)]
    pub detuning_hz: Option<f64>,
    /// Pump-enhanced coupling; defaults to g0 sqrt(n_cavity) from the config.
    #[arg(long)]
    pub g_hz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReflectArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Probe grid in the lab frame.
    #[arg(long)]
    pub f_start_hz: f64,
    #[arg(long)]
    pub f_stop_hz: f64,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Model::Bare)]
    pub model: Model,
    #[command(flatten)]
    pub pump: PumpOverride,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OmitArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated intracavity photon numbers.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_cavity: Vec<f64>,
    /// Full probe span centred on pump + Omega; defaults to a quarter linewidth.
    #[arg(long)]
    pub span_hz: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub detuning_hz: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DampingArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub detuning_start_hz: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub detuning_stop_hz: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    #[arg(long)]
    pub g_hz: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TripartiteCommand {
    /// Entanglement and stability over a grid of couplings or detunings.
    Sweep(SweepArgs),
    /// Coupling at which the system turns unstable.
    Critical(CriticalArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// `name=start:stop:points` with name one of g_b_hz, g_c_hz,
    /// delta_a_hz, delta_c_hz.
    #[arg(long, allow_hyphen_values = true)]
    pub axis: String,
    /// Second axis; the first varies slowest.
    #[arg(long, allow_hyphen_values = true)]
    pub axis2: Option<String>,
    /// Evaluation frequency in the rotating frame.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub omega_hz: f64,
    /// Report E_N in bits instead of nats.
    #[arg(long)]
    pub log2: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "g_b")]
    GB,
    #[value(name = "g_c")]
    GC,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// `lo,hi` with opposite stability verdicts.
    #[arg(long, allow_hyphen_values = true)]
    pub bracket_hz: String,
}

#[derive(Debug, Subcommand)]
pub enum FitCommand {
    /// Fit all seven reflection parameters.
    Reflect(FitReflectArgs),
    /// Fit g, gamma and Omega with the cavity fixed.
    Omit(FitOmitArgs),
}

#[derive(Debug, Args)]
pub struct FitReflectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::ReIm)]
    pub format: Format,
    /// Start from a previous fit instead of the automatic guess.
    #[arg(long)]
    pub guess: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Free {
    #[value(name = "omega_m")]
    OmegaM,
    Detuning,
}

#[derive(Debug, Args)]
pub struct FitOmitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::ReIm)]
    pub format: Format,
    /// Cavity fit from `fit reflect`.
    #[arg(long)]
    pub cavity: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub detuning_hz: f64,
    /// Which of Omega and the detuning moves; the data fix only their
    /// difference.
    #[arg(long, value_enum, default_value_t = Free::OmegaM)]
    pub free: Free,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Noise level; omit for a clean trace.
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub f_start_hz: Option<f64>,
    #[arg(long)]
    pub f_stop_hz: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Model::Bare)]
    pub model: Model,
    #[arg(long, value_enum, default_value_t = Format::ReIm)]
    pub format: Format,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub tau_s: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi_rad: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta_hz: f64,
    #[command(flatten)]
    pub pump: PumpOverride,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DeviceCommand {
    /// Moving-boundary coupling rate g0.
    G0(G0Args),
    /// Effective mass and maximum displacement.
    Meff(VolumeArgs),
    /// Capacitance from field energy, with participation ratio and LC
    /// frequency when a lumped resonator is given.
    Cap(CapArgs),
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    #[arg(long)]
    pub volume: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CapArgs {
    #[arg(long)]
    pub volume: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub voltage: f64,
    /// Lumped resonator JSON; omega_c = 1/sqrt(L (C_s + C_m)), no 2 pi.
    #[arg(long)]
    pub lumped: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct G0Args {
    #[arg(long)]
    pub volume: PathBuf,
    /// One file per material interface.
    #[arg(long, required = true)]
    pub surface: Vec<PathBuf>,
    /// JSON with `inductance_h` and `stray_capacitance_f`. The cavity
    /// frequency is omega_c = 1/sqrt(L (C_s + C_m)), with no 2 pi.
    #[arg(long)]
    pub lumped: PathBuf,
    /// Voltage the electrostatic solution was computed at.
    #[arg(long, default_value_t = 1.0)]
    pub voltage: f64,
    /// Mechanical frequency, for x_zpf from the effective mass.
    #[arg(long, required_unless_present = "x_zpf_m")]
    pub f_m_hz: Option<f64>,
    #[arg(long, conflicts_with = "f_m_hz")]
    pub x_zpf_m: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Lib(emcavity::error::Error),
}

impl From<emcavity::error::Error> for CliError {
    fn from(e: emcavity::error::Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    /// 1 usage or config, 2 data, 3 numerical.
    pub fn exit_code(&self) -> u8 {
        use emcavity::error::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Lib(e) => match e {
                E::Config { .. } => 1,
                E::Load { .. } | E::Io(_) | E::Guess(_) | E::Degenerate(_) | E::Domain(_) => 2,
                E::NearPole { .. } | E::Computation(_) | E::Bracket { .. } | E::Inconsistent(_) => 3,
            },
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
