use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nodesel::scenario::Mode;

use crate::config::{ExperimentConfig, Preset, SweepParam};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "nodesel", version, about = "Eavesdropper and jammer selection experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a scenario file.
    Gen(GenArgs),
    /// Evaluate the objective of one selection mask.
    Eval(EvalArgs),
    /// Run the selection pipeline once.
    Select(SelectArgs),
    /// Sweep one parameter with Monte-Carlo replicates.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Eav,
    Jam,
    Joint,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Eav => Mode::Eav,
            ModeArg::Jam => Mode::Jam,
            ModeArg::Joint => Mode::Joint,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "paper")]
    pub preset: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Apply log-normal shadowing drawn from the same seed.
    #[arg(long)]
    pub shadowing: bool,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub anchors: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub candidates: Option<u64>,
    /// Targets on a (2h+1) x (2h+1) grid.
    #[arg(long)]
    pub grid_half_extent: Option<usize>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub jam_sigma2: Option<f64>,
    #[arg(long)]
    pub jam_power: Option<f64>,
    /// Total jammer power budget.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Gaussian-like target prior centred at the origin with spread nu.
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value = "eav")]
    pub mode: ModeArg,
    /// Comma-separated 0/1 selection over the candidates (eav and jam modes).
    #[arg(long)]
    pub mask: Option<String>,
    #[arg(long)]
    pub eav_mask: Option<String>,
    #[arg(long)]
    pub jam_mask: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: EvalFormat,
}

/// Flags shared by `select` and `sweep`. Unset flags keep the value from
/// `--config` or the default.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file; the preset generator is used when absent.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Row seed (select) or seed base (sweep).
    #[arg(long, alias = "seed-base")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub shadowing: bool,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub n_eav: Option<usize>,
    #[arg(long)]
    pub n_jam: Option<usize>,
    /// Joint-mode threshold on the eavesdropper CRLB (m^2).
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub jam_sigma2: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub max_swaps: Option<usize>,
    /// Also run exhaustive search.
    #[arg(long)]
    pub exhaustive: bool,
    /// Also run swap search from a random start.
    #[arg(long)]
    pub random_swap: bool,
    #[arg(long)]
    pub random_max_swaps: Option<usize>,
    /// Select on worst-case intensities.
    #[arg(long)]
    pub robust: bool,
    /// Uncertainty file with explicit error bounds.
    #[arg(long)]
    pub uncertainty: Option<PathBuf>,
    #[arg(long)]
    pub eps_seed: Option<u64>,
    #[arg(long)]
    pub kappa_seed: Option<u64>,
    /// True prior spread; selections assume the uniform prior.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Anchor-position error half-width assumed by the jammers.
    #[arg(long)]
    pub r: Option<f64>,
    /// Fill the wall_ms column.
    #[arg(long)]
    pub timings: bool,
    /// Results CSV file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format written to stdout when no output file takes it.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Replay row N (1-based, header excluded) of a results CSV, as
    /// `FILE:N`, and compare.
    #[arg(long)]
    pub verify_row: Option<String>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// JSON summary with the selected index sets.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// TOML experiment configuration; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub param: Option<SweepParam>,
    /// Comma-separated values of the swept parameter.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub values: Option<Vec<f64>>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Plot-data JSON file.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

impl RunArgs {
    pub fn apply(&self, c: &mut ExperimentConfig) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        fn set_opt<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        set_opt(&mut c.scenario, &self.scenario);
        set(&mut c.preset, &self.preset);
        set(&mut c.seed_base, &self.seed);
        c.shadowing |= self.shadowing;
        if let Some(m) = self.mode {
            c.mode = m.into();
        }
        set_opt(&mut c.n_eav, &self.n_eav);
        set(&mut c.n_jam, &self.n_jam);
        set_opt(&mut c.rho, &self.rho);
        set_opt(&mut c.sigma2, &self.sigma2);
        set_opt(&mut c.jam_sigma2, &self.jam_sigma2);
        set(&mut c.mu, &self.mu);
        set(&mut c.max_swaps, &self.max_swaps);
        c.exhaustive |= self.exhaustive;
        c.random_swap |= self.random_swap;
        set(&mut c.random_max_swaps, &self.random_max_swaps);
        c.robust |= self.robust;
        set_opt(&mut c.uncertainty, &self.uncertainty);
        set_opt(&mut c.eps_seed, &self.eps_seed);
        set_opt(&mut c.kappa_seed, &self.kappa_seed);
        set_opt(&mut c.nu, &self.nu);
        set_opt(&mut c.r, &self.r);
    }

    /// `FILE:N` split into its parts.
    pub fn verify_target(&self) -> CliResult<Option<(PathBuf, usize)>> {
        let Some(spec) = &self.verify_row else { return Ok(None) };
        let (file, n) = spec
            .rsplit_once(':')
            .ok_or_else(|| CliError::usage(format!("--verify-row expects FILE:N, got `{spec}`")))?;
        let n: usize = n
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| CliError::usage(format!("row number must be a positive integer, got `{n}`")))?;
        Ok(Some((PathBuf::from(file), n)))
    }
}

impl SweepArgs {
    pub fn config(&self) -> CliResult<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        self.run.apply(&mut c);
        if self.param.is_some() {
            c.param = self.param;
        }
        if let Some(v) = &self.values {
            c.values = v.clone();
        }
        if let Some(r) = self.replicates {
            c.replicates = r;
        }
        if c.param.is_none() {
            return Err(CliError::usage("sweep needs a parameter (--param or `param` in the config)"));
        }
        c.validate()?;
        Ok(c)
    }
}

impl SelectArgs {
    pub fn config(&self) -> CliResult<ExperimentConfig> {
        let mut c = ExperimentConfig::default();
        self.run.apply(&mut c);
        c.validate()?;
        Ok(c)
    }
}
