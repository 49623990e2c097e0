//! Command-line and config-file parsing.
//!
//! A config file holds one `key = value` pair per line; `#` starts a comment.
//! Keys are the long flag names, with `-` or `_` as separator. Flags given on
//! the command line win over the file.

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use taxruin_core::mc::{EstimatorKind, McConfig};
use taxruin_core::constant::SupMode;
use taxruin_core::ModelParams;

use crate::{CliError, Result};

/// Environment variable naming a config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "TAXRUIN_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "taxruin", version, about = "Simultaneous ruin probabilities for a two-dimensional Brownian risk model with tax")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Estimate the ruin probability by Monte Carlo.
    Simulate(Opts),
    /// Estimate C(a), or evaluate it in closed form when a <= 0.
    Constant(Opts),
    /// Evaluate the large-u approximation only.
    Asymptotic(Opts),
    /// Tabulate Monte Carlo against the approximation over --u-list.
    Compare(Opts),
    /// Run built-in sanity checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Constant,
    Asymptotic,
    Compare,
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

/// Comma-separated list of barriers, e.g. `2,3,4`.
#[derive(Debug, Clone, PartialEq)]
pub struct UList(pub Vec<f64>);

impl FromStr for UList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|item| {
                item.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad number {item:?} in u list"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(UList)
    }
}

/// Every setting, all optional so that file and flags can be merged.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[arg(long)]
    pub gamma2: Option<f64>,
    /// Time horizon T.
    #[arg(long, alias = "T")]
    pub horizon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub u1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub u2: Option<f64>,
    /// First barrier; the second is a * u.
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub u_list: Option<UList>,
    #[arg(long)]
    pub n_paths: Option<usize>,
    #[arg(long)]
    pub n_grid: Option<usize>,
    /// Bridge-refine the running infimum (`--refine` alone means true).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub refine: Option<bool>,
    /// crude or tilted.
    #[arg(long)]
    pub estimator: Option<EstimatorKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub drift1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub drift2: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// exact or truncated.
    #[arg(long)]
    pub mode: Option<SupMode>,
    #[arg(long)]
    pub const_paths: Option<usize>,
    #[arg(long)]
    pub const_grid: Option<usize>,
    /// Use this value of C(a) instead of estimating it.
    #[arg(long)]
    pub constant: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_value<T>(key: &str, value: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("bad value {value:?} for {key}: {e}")))
}

macro_rules! settings {
    ($($field:ident),* $(,)?) => {
        impl Opts {
            fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $(stringify!($field) => {
                        if self.$field.is_some() {
                            return Err(CliError::Usage(format!("{key} given twice")));
                        }
                        self.$field = Some(parse_value(key, value)?);
                    })*
                    _ => return Err(CliError::Usage(format!("unknown key {key:?}"))),
                }
                Ok(())
            }

            /// Fields set here, otherwise those of `fallback`.
            pub fn or(self, fallback: Opts) -> Opts {
                Opts {
                    $($field: self.$field.or(fallback.$field),)*
                    config: self.config,
                }
            }
        }
    };
}

settings!(
    c1, c2, gamma1, gamma2, horizon, u1, u2, u, a, u_list, n_paths, n_grid, refine, estimator, drift1,
    drift2, lambda, mode, const_paths, const_grid, constant, seed, workers, output, format,
);

/// Parses `key = value` lines.
pub fn parse_config_text(text: &str) -> Result<Opts> {
    let mut opts = Opts::default();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value", number + 1)))?;
        let key = key.trim().replace('-', "_");
        let key = if key == "T" { "horizon".to_string() } else { key };
        opts.set(&key, value.trim())
            .map_err(|e| CliError::Usage(format!("line {}: {e}", number + 1)))?;
    }
    Ok(opts)
}

pub fn read_config_file(path: &Path) -> Result<Opts> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub c: [f64; 2],
    pub gamma: [f64; 2],
    pub horizon: f64,
    /// `(u1, u2)` when barriers were given.
    pub barriers: Option<[f64; 2]>,
    /// `u2 / u1`, from `--a` or from the barriers.
    pub ratio: Option<f64>,
    pub u_list: Vec<f64>,
    pub mc: McConfig,
    pub estimator: EstimatorKind,
    pub drift: Option<[f64; 2]>,
    pub lambda: f64,
    pub mode: SupMode,
    pub const_paths: usize,
    pub const_grid: Option<usize>,
    pub constant: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Defaults only; used by `selftest`.
    pub fn selftest() -> RunConfig {
        build(Command::Selftest, Opts::default()).expect("defaults are valid")
    }

    /// Model parameters; requires barriers.
    pub fn params(&self) -> Result<ModelParams> {
        let [u1, u2] = self
            .barriers
            .ok_or_else(|| CliError::Usage("barriers required: give --u1/--u2 or --u/--a".into()))?;
        Ok(ModelParams {
            c1: self.c[0],
            c2: self.c[1],
            gamma1: self.gamma[0],
            gamma2: self.gamma[1],
            horizon: self.horizon,
            u1,
            u2,
        })
    }
}

pub fn parse_cli<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Merges flags over the config file (from `--config`, else `default_config`)
/// and validates the result.
pub fn resolve(cli: Cli, default_config: Option<PathBuf>) -> Result<RunConfig> {
    let (command, flags) = match cli.command {
        CliCommand::Simulate(o) => (Command::Simulate, o),
        CliCommand::Constant(o) => (Command::Constant, o),
        CliCommand::Asymptotic(o) => (Command::Asymptotic, o),
        CliCommand::Compare(o) => (Command::Compare, o),
        CliCommand::Selftest => return Ok(RunConfig::selftest()),
    };
    let opts = match flags.config.clone().or(default_config) {
        Some(path) => flags.or(read_config_file(&path)?),
        None => flags,
    };
    build(command, opts)
}

/// Full parse from an argument list (program name first), honouring
/// [`CONFIG_ENV`].
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = parse_cli(args).map_err(|e| CliError::Usage(e.to_string()))?;
    resolve(cli, std::env::var_os(CONFIG_ENV).map(PathBuf::from))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn build(command: Command, o: Opts) -> Result<RunConfig> {
    let c = [o.c1.unwrap_or(0.0), o.c2.unwrap_or(0.0)];
    let gamma = [o.gamma1.unwrap_or(0.0), o.gamma2.unwrap_or(0.0)];
    let horizon = o.horizon.unwrap_or(1.0);

    let barriers = match (o.u1, o.u2, o.u, o.a) {
        (Some(_), _, Some(_), _) | (_, Some(_), Some(_), _) | (_, Some(_), _, Some(_)) => {
            return Err(usage("give either --u1/--u2 or --u/--a, not both"));
        }
        (Some(u1), Some(u2), None, None) => Some([u1, u2]),
        (Some(_), None, _, _) | (None, Some(_), _, _) => {
            return Err(usage("--u1 and --u2 must be given together"));
        }
        (None, None, Some(u), Some(a)) => Some([u, a * u]),
        (None, None, Some(_), None) => return Err(usage("--u needs --a")),
        _ => None,
    };
    let ratio = o.a.or_else(|| barriers.map(|[u1, u2]| u2 / u1));

    let mc = McConfig {
        n_paths: o.n_paths.unwrap_or(100_000),
        n_grid: o.n_grid.unwrap_or(taxruin_core::mc::DEFAULT_GRID),
        refine: o.refine.unwrap_or(false),
        seed: o.seed.unwrap_or(0),
        workers: o.workers.unwrap_or(1),
    };
    let drift = match (o.drift1, o.drift2) {
        (Some(d1), Some(d2)) => Some([d1, d2]),
        (None, None) => None,
        _ => return Err(usage("--drift1 and --drift2 must be given together")),
    };
    let cfg = RunConfig {
        command,
        c,
        gamma,
        horizon,
        barriers,
        ratio,
        u_list: o.u_list.map(|l| l.0).unwrap_or_default(),
        mc,
        estimator: o.estimator.unwrap_or(EstimatorKind::Tilted),
        drift,
        lambda: o.lambda.unwrap_or(8.0),
        mode: o.mode.unwrap_or(SupMode::ExactExponentialSup),
        const_paths: o.const_paths.unwrap_or(20_000),
        const_grid: o.const_grid,
        constant: o.constant,
        output: o.output,
        format: o.format.unwrap_or(if command == Command::Compare {
            Format::Csv
        } else {
            Format::Json
        }),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    // c, gamma and horizon go through the model checks with placeholder barriers
    let [u1, u2] = cfg.barriers.unwrap_or([1.0, cfg.ratio.unwrap_or(1.0)]);
    ModelParams {
        c1: cfg.c[0],
        c2: cfg.c[1],
        gamma1: cfg.gamma[0],
        gamma2: cfg.gamma[1],
        horizon: cfg.horizon,
        u1,
        u2,
    }
    .validate()?;
    cfg.mc.validate()?;
    if let Some(r) = cfg.ratio {
        if !r.is_finite() {
            return Err(usage(format!("barrier ratio must be finite, got {r}")));
        }
    }
    if cfg.drift.is_some_and(|d| !d.iter().all(|x| x.is_finite())) {
        return Err(usage("drifts must be finite"));
    }
    if !(cfg.lambda > 0.0 && cfg.lambda.is_finite()) {
        return Err(usage(format!("lambda must be positive, got {}", cfg.lambda)));
    }
    if cfg.const_paths < 2 || cfg.const_grid == Some(0) {
        return Err(usage("constant estimation needs --const-paths >= 2 and --const-grid >= 1"));
    }
    if cfg.constant.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
        return Err(usage("--constant must be positive and finite"));
    }
    match cfg.command {
        Command::Simulate | Command::Asymptotic if cfg.barriers.is_none() => {
            Err(usage("barriers required: give --u1/--u2 or --u/--a"))
        }
        Command::Constant if cfg.ratio.is_none() => Err(usage("--a (or --u1/--u2) required")),
        Command::Compare if cfg.ratio.is_none() => Err(usage("--a required for compare")),
        Command::Compare if cfg.u_list.is_empty() => Err(usage("--u-list required for compare")),
        Command::Compare if cfg.u_list.iter().any(|u| !(*u > 0.0 && u.is_finite())) => {
            Err(usage("every u in --u-list must be positive"))
        }
        Command::Compare if cfg.u_list.windows(2).any(|w| w[0] >= w[1]) => {
            Err(usage("--u-list must be strictly increasing"))
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse(args: &str) -> Result<RunConfig> {
        let cli = parse_cli(std::iter::once("taxruin").chain(args.split_whitespace()))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        resolve(cli, None)
    }

    #[test]
    fn simulate_round_trip() {
        let cfg = parse(
            "simulate --u 3 --a 0.5 --c1 1 --c2 1 --gamma1 1 --gamma2 1 --n-paths 100000 --seed 42",
        )
        .unwrap();
        assert_eq!(cfg.command, Command::Simulate);
        assert_eq!(cfg.barriers, Some([3.0, 1.5]));
        assert_eq!(cfg.ratio, Some(0.5));
        assert_eq!((cfg.c, cfg.gamma), ([1.0, 1.0], [1.0, 1.0]));
        assert_eq!((cfg.mc.n_paths, cfg.mc.seed), (100_000, 42));
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn flags_override_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# run settings\nn_paths = 1000\nseed = 7\nu = 2\na = 0.5").unwrap();
        let path = file.path().display().to_string();
        let cfg = parse(&format!("simulate --config {path} --n-paths 5000")).unwrap();
        assert_eq!(cfg.mc.n_paths, 5000);
        assert_eq!(cfg.mc.seed, 7);
        let cfg = parse(&format!("simulate --config {path}")).unwrap();
        assert_eq!(cfg.mc.n_paths, 1000);
    }

    #[test]
    fn tax_at_two_is_a_usage_error() {
        let err = parse("simulate --u 1 --a 1 --gamma1 2.0").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn file_errors() {
        assert!(matches!(parse_config_text("bogus = 1"), Err(CliError::Usage(_))));
        assert!(matches!(parse_config_text("seed = x"), Err(CliError::Usage(_))));
        assert!(matches!(parse_config_text("seed"), Err(CliError::Usage(_))));
        assert!(matches!(parse_config_text("seed = 1\nseed = 2"), Err(CliError::Usage(_))));
        let o = parse_config_text("n-paths = 10\nT = 4\nu_list = 2, 3,4\nrefine = true").unwrap();
        assert_eq!(o.n_paths, Some(10));
        assert_eq!(o.horizon, Some(4.0));
        assert_eq!(o.u_list, Some(UList(vec![2.0, 3.0, 4.0])));
        assert_eq!(o.refine, Some(true));
    }

    #[test]
    fn missing_or_conflicting_fields() {
        assert!(parse("simulate --c1 1").is_err());
        assert!(parse("simulate --u 1").is_err());
        assert!(parse("simulate --u1 1").is_err());
        assert!(parse("simulate --u 1 --a 1 --u1 2").is_err());
        assert!(parse("simulate --u 1 --a 1 --drift1 2").is_err());
        assert!(parse("compare --a 0.5").is_err());
        assert!(parse("compare --a 0.5 --u-list 3,2").is_err());
        assert!(parse("simulate --u 1 --a 1 --frobnicate 3").is_err());
    }

    #[test]
    fn negative_values_and_aliases() {
        let cfg = parse("asymptotic --u1 3 --u2 -1.5 --c1 -1 --T 2 --refine").unwrap();
        assert_eq!(cfg.barriers, Some([3.0, -1.5]));
        assert_eq!(cfg.ratio, Some(-0.5));
        assert_eq!((cfg.c[0], cfg.horizon, cfg.mc.refine), (-1.0, 2.0, true));
    }

    #[test]
    fn compare_defaults_to_csv() {
        let cfg = parse("compare --a 0.5 --u-list 2,3,4").unwrap();
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.u_list, vec![2.0, 3.0, 4.0]);
    }
}
