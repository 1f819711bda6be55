//! Command-line flags, the optional TOML config file and their resolution
//! into a fully specified [`RunConfig`].

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nonconvex_ftpl::adversary::ADVERSARY_IDS;
use nonconvex_ftpl::{schedule_params, Execution};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "ftpl", version, about = "Reproducible experiments for non-convex Follow-the-Perturbed-Leader")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run FTPL against an adversary and log every round.
    RunFtpl,
    /// Run FTRL (l2 or l1 regularizer) against an adversary.
    RunFtrl,
    /// Probe the stability relations on randomized instances.
    Stability,
    /// Fit the power law of average regret against the horizon.
    Scaling,
    /// FTPL self-play on a zero-sum game with certified equilibrium gaps.
    Game,
    /// Online-to-batch conversion on a synthetic ReLU regression task.
    Batch,
    /// FTPL on the hypercube embedding of an experts problem.
    Experts,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::RunFtpl => "run-ftpl",
            Command::RunFtrl => "run-ftrl",
            Command::Stability => "stability",
            Command::Scaling => "scaling",
            Command::Game => "game",
            Command::Batch => "batch",
            Command::Experts => "experts",
        }
    }
}

/// A rate or margin given either as a number or as `auto`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Auto,
    Value(f64),
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Param::Auto);
        }
        s.parse::<f64>()
            .map(Param::Value)
            .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Param::Value(v as f64)),
            Raw::Float(v) => Ok(Param::Value(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseArg {
    /// A fresh perturbation every round.
    Fresh,
    /// One perturbation drawn up front and reused.
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameArg {
    Bilinear,
    DoubleWell,
    ToyGan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularizerArg {
    L2,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionArg {
    Sequential,
    Parallel,
}

macro_rules! value_enum_display {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let v = self.to_possible_value().expect("no skipped variants");
                f.write_str(v.get_name())
            }
        }
    )*};
}
value_enum_display!(NoiseArg, GameArg, RegularizerArg, ExecutionArg);

/// Flags shared by every command. All are optional so that the config file
/// can supply them; anything given here wins over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat TOML file with `key = value` settings (same names as the flags).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dimension of the decision set [-1, 1]^d.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Horizon (number of rounds, or sample size for `batch`).
    #[arg(long = "T", global = true)]
    pub horizon: Option<usize>,
    /// Noise rate: a positive number or `auto`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta: Option<Param>,
    /// Stability margin for d >= 2: a positive number or `auto`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<Param>,
    /// Adversary id.
    #[arg(long, global = true)]
    pub adversary: Option<String>,
    /// Grid spacing of the offline oracle.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub resolution: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Independent trials (run in parallel, written in trial order).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// CSV output path; the summary is written beside it.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub noise: Option<NoiseArg>,
    /// Candidate pairs certified by `game` (confidence amplification).
    #[arg(long, global = true)]
    pub amplification: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub game: Option<GameArg>,
    /// Target of the toy GAN game, in [-0.5, 0.5].
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub target: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub regularizer: Option<RegularizerArg>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub reg_weight: Option<f64>,
    /// Number of experts for `experts`.
    #[arg(long, global = true)]
    pub experts: Option<usize>,
    /// Perturbation draws per instance for `stability`.
    #[arg(long, global = true)]
    pub draws: Option<usize>,
    /// Comma-separated horizons for `scaling`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    #[arg(long, global = true, value_enum)]
    pub execution: Option<ExecutionArg>,
}

/// Contents of a config file. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub dim: Option<usize>,
    #[serde(rename = "T")]
    pub horizon: Option<usize>,
    pub eta: Option<Param>,
    pub delta: Option<Param>,
    pub adversary: Option<String>,
    pub resolution: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub output: Option<PathBuf>,
    pub noise: Option<NoiseArg>,
    pub amplification: Option<usize>,
    pub game: Option<GameArg>,
    pub target: Option<f64>,
    pub regularizer: Option<RegularizerArg>,
    pub reg_weight: Option<f64>,
    pub experts: Option<usize>,
    pub draws: Option<usize>,
    pub horizons: Option<Vec<usize>>,
    pub execution: Option<ExecutionArg>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }
}

/// A value together with whether it was derived from the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub value: f64,
    pub auto: bool,
}

impl fmt::Display for Resolved {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)?;
        if self.auto {
            f.write_str(" (auto)")?;
        }
        Ok(())
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dim: usize,
    pub horizon: usize,
    pub eta: Param,
    pub delta: Param,
    pub adversary: String,
    /// Oracle grid spacing; `None` picks a default from the dimension.
    pub resolution: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub output: PathBuf,
    pub noise: NoiseArg,
    pub amplification: usize,
    pub game: GameArg,
    pub target: f64,
    pub regularizer: RegularizerArg,
    pub reg_weight: f64,
    pub experts: usize,
    pub draws: usize,
    pub horizons: Vec<usize>,
    pub execution: ExecutionArg,
}

pub const DEFAULT_HORIZON: usize = 1024;
pub const DEFAULT_AMPLIFICATION: usize = 8;

impl RunConfig {
    /// Merges flags over the file over the defaults and validates ranges.
    pub fn resolve(command: Command, flags: Flags, file: FileConfig) -> Result<Self, CliError> {
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                flags.$field.or(file.$field).unwrap_or_else(|| $default)
            };
        }
        let dim = pick!(dim, 1);
        let game = pick!(game, GameArg::Bilinear);
        let cfg = RunConfig {
            command,
            dim,
            horizon: pick!(horizon, DEFAULT_HORIZON),
            eta: pick!(eta, Param::Auto),
            delta: pick!(delta, Param::Auto),
            adversary: pick!(adversary, "relu-cycle".to_string()),
            resolution: flags.resolution.or(file.resolution),
            seed: pick!(seed, 0),
            trials: pick!(trials, 1),
            output: pick!(output, PathBuf::from(format!("ftpl-{}.csv", command.name()))),
            noise: pick!(noise, NoiseArg::Fresh),
            amplification: pick!(amplification, DEFAULT_AMPLIFICATION),
            game,
            target: pick!(target, 0.25),
            regularizer: pick!(regularizer, RegularizerArg::L2),
            reg_weight: pick!(reg_weight, 1.0),
            experts: pick!(experts, 4),
            draws: pick!(draws, 1000),
            horizons: pick!(horizons, nonconvex_ftpl::harness::default_horizons()),
            execution: pick!(execution, ExecutionArg::Parallel),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        if self.horizon < 1 {
            return bad(format!("T must be at least 1, got {}", self.horizon));
        }
        for (name, p) in [("eta", self.eta), ("delta", self.delta)] {
            if let Param::Value(v) = p {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if !ADVERSARY_IDS.contains(&self.adversary.as_str()) {
            return bad(format!(
                "unknown adversary `{}` (expected one of {})",
                self.adversary,
                ADVERSARY_IDS.join(", ")
            ));
        }
        if let Some(h) = self.resolution {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("resolution must be positive, got {h}"));
            }
        }
        if self.trials < 1 || self.amplification < 1 || self.draws < 1 {
            return bad("trials, amplification and draws must be at least 1".into());
        }
        if !(-0.5..=0.5).contains(&self.target) {
            return bad(format!("target must lie in [-0.5, 0.5], got {}", self.target));
        }
        if !(self.reg_weight >= 0.0 && self.reg_weight.is_finite()) {
            return bad(format!("reg-weight must be nonnegative, got {}", self.reg_weight));
        }
        if self.experts < 1 {
            return bad("experts must be at least 1".into());
        }
        if self.horizons.len() < 4 || self.horizons.contains(&0) {
            return bad("horizons needs at least 4 positive values".into());
        }
        Ok(())
    }

    /// Noise rate for horizon `t` in dimension `d`.
    pub fn eta_for(&self, t: usize, d: usize) -> Resolved {
        match self.eta {
            Param::Value(value) => Resolved { value, auto: false },
            Param::Auto => Resolved {
                value: schedule_params(t, d).eta,
                auto: true,
            },
        }
    }

    /// Margin for horizon `t`; `auto` in one dimension falls back to `T^{-1/3}`.
    pub fn delta_for(&self, t: usize, d: usize) -> Resolved {
        match self.delta {
            Param::Value(value) => Resolved { value, auto: false },
            Param::Auto => Resolved {
                value: schedule_params(t, d).delta.unwrap_or((t as f64).powf(-1.0 / 3.0)),
                auto: true,
            },
        }
    }

    /// Grid spacing used in dimension `d`: the configured value, else
    /// `1e-3` on an interval and `1/32` on higher-dimensional boxes.
    pub fn resolution_for(&self, d: usize) -> f64 {
        self.resolution.unwrap_or(if d <= 1 { 1e-3 } else { 1.0 / 32.0 })
    }

    pub fn exec(&self) -> Execution {
        match self.execution {
            ExecutionArg::Sequential => Execution::Sequential,
            ExecutionArg::Parallel => Execution::Parallel,
        }
    }

    /// Where the summary goes: the CSV path with its extension replaced.
    pub fn summary_path(&self) -> PathBuf {
        self.output.with_extension("summary.txt")
    }
}

/// Parses `argv` (including the program name) and loads the config file.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Usage)?;
    let file = match &cli.flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    RunConfig::resolve(cli.command, cli.flags, file)
}
