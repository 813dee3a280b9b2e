//! Binary selection: rounding of relaxed solutions, swap local search,
//! exhaustive enumeration, worst-case transforms and the end-to-end
//! pipeline.
//!
//! Every search works on a role vector over the candidate positions (free,
//! eavesdropper or jammer) and ranks selections by a [`Key`]: power-budget
//! excess first, then excess of the eavesdropper CRLB over the joint
//! threshold, then the objective in the direction of the problem.

mod exhaustive;
mod pipeline;
pub mod robust;
mod rounding;
mod swap;

use serde::Serialize;

use crate::eav::EavModel;
use crate::error::{Error, Result};
use crate::jam::JamModel;
use crate::scenario::{Mode, Scenario};
use crate::selection::SelectionVector;

pub use exhaustive::{binomial, exhaustive_select, DEFAULT_SUBSET_CAP};
pub use pipeline::{evaluate_selection, select_pipeline, Evaluation, PipelineParams};
pub use robust::{robust_eav_effective, robust_jam_effective};
pub use rounding::round_largest_m;
pub use swap::{swap_search, SwapResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    RelaxedBound,
    LargestM,
    Swap,
    Exhaustive,
    SwapRandom,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::RelaxedBound => "relaxed",
            Algorithm::LargestM => "largest-m",
            Algorithm::Swap => "swap",
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::SwapRandom => "swap-random",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "relaxed" => Algorithm::RelaxedBound,
            "largest-m" => Algorithm::LargestM,
            "swap" => Algorithm::Swap,
            "exhaustive" => Algorithm::Exhaustive,
            "swap-random" => Algorithm::SwapRandom,
            other => return Err(Error::Domain(format!("unknown algorithm `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Eav => Sense::Min,
            Mode::Jam | Mode::Joint => Sense::Max,
        }
    }

    /// `a` strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Min => a < b,
            Sense::Max => a > b,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectionOutcome {
    pub algorithm: Algorithm,
    pub mode: Mode,
    /// Eavesdropper selection (eav and joint modes).
    pub eav: Option<SelectionVector>,
    /// Jammer selection (jam and joint modes).
    pub jam: Option<SelectionVector>,
    /// `f` in eav mode, `f~` otherwise (m^2).
    pub objective: f64,
    /// `f(z_E)` in joint mode.
    pub eav_objective: Option<f64>,
    pub swaps: usize,
    pub feasible: bool,
    /// Cumulative wall time of the stages leading to this outcome.
    pub wall_ms: f64,
}

pub(crate) const FREE: u8 = 0;
pub(crate) const EAV: u8 = 1;
pub(crate) const JAM: u8 = 2;

/// Ranking of a role vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Key {
    pub budget_excess: f64,
    pub rho_excess: f64,
    pub value: f64,
    /// `f(z_E)` in joint mode.
    pub eav_value: f64,
}

impl Key {
    pub fn feasible(&self) -> bool {
        self.budget_excess == 0.0 && self.rho_excess == 0.0
    }
}

/// Objective of one selection problem over role vectors.
pub(crate) struct Evaluator<'a> {
    pub mode: Mode,
    pub eav: Option<&'a EavModel>,
    pub jam: Option<&'a JamModel>,
    pub powers: &'a [f64],
    pub budget: Option<f64>,
    pub rho: f64,
}

pub(crate) fn mask(roles: &[u8], role: u8) -> Vec<f64> {
    roles.iter().map(|&r| if r == role { 1.0 } else { 0.0 }).collect()
}

impl<'a> Evaluator<'a> {
    pub fn sense(&self) -> Sense {
        Sense::for_mode(self.mode)
    }

    pub fn key(&self, roles: &[u8]) -> Key {
        let mut key = Key {
            budget_excess: 0.0,
            rho_excess: 0.0,
            value: 0.0,
            eav_value: f64::NAN,
        };
        if let Some(eav) = self.eav {
            let f = eav.objective_fim(&mask(roles, EAV));
            key.eav_value = f;
            match self.mode {
                Mode::Eav => key.value = f,
                _ => key.rho_excess = if f <= self.rho { 0.0 } else { f - self.rho },
            }
        }
        if let Some(jam) = self.jam {
            let z = mask(roles, JAM);
            key.value = jam.objective(&z);
            if let Some(b) = self.budget {
                let used: f64 = z.iter().zip(self.powers).map(|(a, p)| a * p).sum();
                key.budget_excess = (used - b).max(0.0);
            }
        }
        key
    }

    /// `a` strictly better than `b`.
    pub fn better(&self, a: &Key, b: &Key) -> bool {
        if a.budget_excess != b.budget_excess {
            return a.budget_excess < b.budget_excess;
        }
        if a.rho_excess != b.rho_excess {
            return a.rho_excess < b.rho_excess;
        }
        self.sense().better(a.value, b.value)
    }
}

/// Models shared by the searches on one scenario.
pub(crate) struct Models {
    pub eav: Option<EavModel>,
    pub jam: Option<JamModel>,
}

impl Models {
    pub fn new(s: &Scenario, mode: Mode) -> Result<Self> {
        s.validate_for(mode)?;
        Ok(Self {
            eav: matches!(mode, Mode::Eav | Mode::Joint).then(|| EavModel::new(s)),
            jam: match mode {
                Mode::Jam | Mode::Joint => Some(JamModel::new(s)?),
                Mode::Eav => None,
            },
        })
    }

    pub fn evaluator<'a>(&'a self, s: &'a Scenario, mode: Mode, rho: f64) -> Evaluator<'a> {
        Evaluator {
            mode,
            eav: self.eav.as_ref(),
            jam: self.jam.as_ref(),
            powers: &s.jam_powers,
            budget: if mode == Mode::Eav { None } else { s.power_budget },
            rho: if mode == Mode::Joint { rho } else { f64::INFINITY },
        }
    }
}

/// Role vector from optional eavesdropper and jammer selections.
pub(crate) fn roles_from(n: usize, eav: Option<&[usize]>, jam: Option<&[usize]>) -> Result<Vec<u8>> {
    let mut roles = vec![FREE; n];
    for (set, role) in [(eav, EAV), (jam, JAM)] {
        for &k in set.unwrap_or(&[]) {
            if k >= n {
                return Err(Error::Domain(format!("index {k} out of range for {n} candidates")));
            }
            if roles[k] != FREE {
                return Err(Error::Domain(format!("position {k} assigned twice")));
            }
            roles[k] = role;
        }
    }
    Ok(roles)
}

pub(crate) fn outcome_from(
    algorithm: Algorithm,
    mode: Mode,
    roles: &[u8],
    key: &Key,
    swaps: usize,
    wall_ms: f64,
) -> SelectionOutcome {
    let eav = matches!(mode, Mode::Eav | Mode::Joint).then(|| {
        SelectionVector::binary(mask(roles, EAV)).expect("mask is binary")
    });
    let jam = matches!(mode, Mode::Jam | Mode::Joint).then(|| {
        SelectionVector::binary(mask(roles, JAM)).expect("mask is binary")
    });
    SelectionOutcome {
        algorithm,
        mode,
        eav,
        jam,
        objective: key.value,
        eav_objective: (mode == Mode::Joint).then_some(key.eav_value),
        swaps,
        feasible: key.feasible() && (mode == Mode::Joint || key.value.is_finite()),
        wall_ms,
    }
}
