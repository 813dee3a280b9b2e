//! Experiment configuration shared by `select` and `sweep`.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use nodesel::scenario::{GeneratorParams, Mode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 121 targets, 10 anchors, 100 candidates.
    Paper,
    /// 49 targets, 6 anchors, 40 candidates.
    Desk,
}

impl Preset {
    pub fn params(self) -> GeneratorParams {
        match self {
            Preset::Paper => GeneratorParams::paper(),
            Preset::Desk => GeneratorParams::desk(),
        }
    }
}

/// Parameters a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepParam {
    NEav,
    NJam,
    /// Eavesdropper noise level (generator presets only).
    Sigma2,
    /// Anchor noise level.
    JamSigma2,
    Rho,
    /// Spread of the true target prior.
    Nu,
    /// Anchor-position error half-width.
    R,
    MaxSwaps,
    Mu,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::NEav => "n_eav",
            SweepParam::NJam => "n_jam",
            SweepParam::Sigma2 => "sigma2",
            SweepParam::JamSigma2 => "jam_sigma2",
            SweepParam::Rho => "rho",
            SweepParam::Nu => "nu",
            SweepParam::R => "r",
            SweepParam::MaxSwaps => "max_swaps",
            SweepParam::Mu => "mu",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scenario file; when absent the preset generator is used with the row
    /// seed.
    pub scenario: Option<PathBuf>,
    pub preset: Preset,
    pub shadowing: bool,
    pub mode: Mode,
    pub param: Option<SweepParam>,
    pub values: Vec<f64>,
    /// Defaults to 8 in eav mode and to the complement `N - n_jam` in
    /// joint mode.
    pub n_eav: Option<usize>,
    pub n_jam: usize,
    pub rho: Option<f64>,
    pub sigma2: Option<f64>,
    pub jam_sigma2: Option<f64>,
    pub mu: f64,
    pub max_swaps: usize,
    pub exhaustive: bool,
    pub random_swap: bool,
    pub random_max_swaps: usize,
    pub robust: bool,
    pub uncertainty: Option<PathBuf>,
    /// Seeds of the per-target relative error draws; the row seed when absent.
    pub eps_seed: Option<u64>,
    pub kappa_seed: Option<u64>,
    pub nu: Option<f64>,
    pub r: Option<f64>,
    pub replicates: usize,
    pub seed_base: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            preset: Preset::Paper,
            shadowing: false,
            mode: Mode::Eav,
            param: None,
            values: Vec::new(),
            n_eav: None,
            n_jam: 8,
            rho: None,
            sigma2: None,
            jam_sigma2: None,
            mu: 0.01,
            max_swaps: 5,
            exhaustive: false,
            random_swap: false,
            random_max_swaps: 1,
            robust: false,
            uncertainty: None,
            eps_seed: None,
            kappa_seed: None,
            nu: None,
            r: None,
            replicates: 1,
            seed_base: 0,
        }
    }
}

fn integer(param: SweepParam, v: f64) -> CliResult<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(CliError::usage(format!("{} needs nonnegative integer values, got {v}", param.as_str())))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("cannot parse {}: {e}", path.display())))
    }

    pub fn n_eav_for(&self, candidates: usize) -> usize {
        match (self.n_eav, self.mode) {
            (Some(n), _) => n,
            (None, Mode::Joint) => candidates.saturating_sub(self.n_jam),
            (None, _) => 8,
        }
    }

    pub fn mismatch(&self) -> bool {
        self.nu.is_some() || self.r.is_some()
    }

    /// Copy with the swept parameter set to `value`.
    pub fn at(&self, value: f64) -> CliResult<Self> {
        let mut c = self.clone();
        let Some(p) = self.param else { return Ok(c) };
        match p {
            SweepParam::NEav => c.n_eav = Some(integer(p, value)?),
            SweepParam::NJam => c.n_jam = integer(p, value)?,
            SweepParam::MaxSwaps => c.max_swaps = integer(p, value)?,
            SweepParam::Sigma2 => c.sigma2 = Some(value),
            SweepParam::JamSigma2 => c.jam_sigma2 = Some(value),
            SweepParam::Rho => c.rho = Some(value),
            SweepParam::Nu => c.nu = Some(value),
            SweepParam::R => c.r = Some(value),
            SweepParam::Mu => c.mu = value,
        }
        c.check_point()?;
        Ok(c)
    }

    /// Checks that do not depend on the swept value.
    pub fn validate(&self) -> CliResult<()> {
        if self.replicates == 0 {
            return Err(CliError::usage("replicates must be at least 1"));
        }
        if self.param.is_some() && self.values.is_empty() {
            return Err(CliError::usage("the swept parameter needs a nonempty value list"));
        }
        if self.param.is_none() && !self.values.is_empty() {
            return Err(CliError::usage("values given without a swept parameter"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::usage("sweep values must be finite"));
        }
        if self.uncertainty.is_some() && !self.robust {
            return Err(CliError::usage("--uncertainty requires --robust"));
        }
        let param = |p: SweepParam| self.param == Some(p);
        if self.robust && (self.mismatch() || param(SweepParam::Nu) || param(SweepParam::R)) {
            return Err(CliError::usage("--robust cannot be combined with model mismatch (nu, r)"));
        }
        if self.scenario.is_some() && (self.sigma2.is_some() || param(SweepParam::Sigma2)) {
            return Err(CliError::usage("sigma2 needs a generator preset; it is baked into scenario files"));
        }
        if self.mode != Mode::Joint && (self.rho.is_some() || param(SweepParam::Rho)) {
            return Err(CliError::usage("rho applies to joint mode only"));
        }
        match self.values.iter().try_for_each(|&v| self.at(v).map(|_| ())) {
            Ok(()) if self.param.is_none() => self.check_point(),
            other => other,
        }
    }

    fn check_point(&self) -> CliResult<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0) => Err(CliError::usage(format!("{name} must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("sigma2", self.sigma2)?;
        positive("jam_sigma2", self.jam_sigma2)?;
        positive("rho", self.rho)?;
        positive("nu", self.nu)?;
        if let Some(r) = self.r {
            if !(r >= 0.0) {
                return Err(CliError::usage(format!("r must be nonnegative, got {r}")));
            }
        }
        if !(self.mu >= 0.0) {
            return Err(CliError::usage(format!("mu must be nonnegative, got {}", self.mu)));
        }
        Ok(())
    }
}
