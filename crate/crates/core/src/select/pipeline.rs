use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::exhaustive::{exhaustive_select, DEFAULT_SUBSET_CAP};
use super::rounding::largest_indices;
use super::swap::run_swaps;
use super::{outcome_from, Algorithm, Models, SelectionOutcome, EAV, FREE, JAM};
use crate::eav::EavModel;
use crate::error::{Error, Result};
use crate::jam::JamModel;
use crate::relax::{solve_relaxed_eav, solve_relaxed_jam, solve_relaxed_joint, SolverOptions, SolverReport};
use crate::rng::{streams, SeededRng};
use crate::scenario::{Mode, Scenario};
use crate::selection::SelectionVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub n_eav: usize,
    pub n_jam: usize,
    /// Joint-mode threshold on `f(z_E)`; `None` is unconstrained.
    pub rho: Option<f64>,
    pub mu: f64,
    pub max_swaps: usize,
    pub exhaustive: bool,
    pub exhaustive_cap: u128,
    /// Also run swap search from a uniformly random start.
    pub random_swap: bool,
    pub random_max_swaps: usize,
    pub random_seed: u64,
    pub solver: SolverOptions,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            n_eav: 8,
            n_jam: 8,
            rho: None,
            mu: 0.01,
            max_swaps: 5,
            exhaustive: false,
            exhaustive_cap: DEFAULT_SUBSET_CAP,
            random_swap: false,
            random_max_swaps: 1,
            random_seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

impl PipelineParams {
    pub fn rho_value(&self) -> f64 {
        self.rho.unwrap_or(f64::INFINITY)
    }

    fn check(&self, s: &Scenario, mode: Mode) -> Result<()> {
        let n = s.num_candidates();
        if !(self.mu >= 0.0) {
            return Err(Error::validation("mu", format!("must be nonnegative, got {}", self.mu)));
        }
        if let Some(r) = self.rho {
            if !(r > 0.0) {
                return Err(Error::validation("rho", format!("must be positive, got {r}")));
            }
        }
        let need_eav = matches!(mode, Mode::Eav | Mode::Joint);
        let need_jam = matches!(mode, Mode::Jam | Mode::Joint);
        if need_eav && !(1..=n).contains(&self.n_eav) {
            return Err(Error::validation("n_eav", format!("must lie in [1, {n}], got {}", self.n_eav)));
        }
        if need_jam && !(1..=n).contains(&self.n_jam) {
            return Err(Error::validation("n_jam", format!("must lie in [1, {n}], got {}", self.n_jam)));
        }
        if mode == Mode::Joint && self.n_eav + self.n_jam > n {
            return Err(Error::Infeasible(format!(
                "n_eav + n_jam = {} exceeds the {n} candidate positions",
                self.n_eav + self.n_jam
            )));
        }
        Ok(())
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn relaxed_outcome(mode: Mode, report: &SolverReport, rho: f64, wall_ms: f64) -> Result<SelectionOutcome> {
    let relaxed = |z: &[f64]| SelectionVector::relaxed(z.iter().map(|v| v.clamp(0.0, 1.0)).collect());
    let (eav, jam, eav_objective, feasible) = match mode {
        Mode::Eav => (Some(relaxed(&report.z)?), None, None, report.objective.is_finite()),
        Mode::Jam => (None, Some(relaxed(&report.z)?), None, report.objective.is_finite()),
        Mode::Joint => {
            let ze = report.z_eav.as_deref().expect("joint report carries z_E");
            let f = report.eav_objective.expect("joint report carries f(z_E)");
            (Some(relaxed(ze)?), Some(relaxed(&report.z)?), Some(f), f <= rho)
        }
    };
    Ok(SelectionOutcome {
        algorithm: Algorithm::RelaxedBound,
        mode,
        eav,
        jam,
        objective: report.objective,
        eav_objective,
        swaps: 0,
        feasible,
        wall_ms,
    })
}

/// Largest-m rounding of a relaxed report into a role vector.
fn round_roles(mode: Mode, report: &SolverReport, p: &PipelineParams, n: usize) -> Vec<u8> {
    let mut roles = vec![FREE; n];
    match mode {
        Mode::Eav => {
            for k in largest_indices(&report.z, p.n_eav, &[]) {
                roles[k] = EAV;
            }
        }
        Mode::Jam => {
            for k in largest_indices(&report.z, p.n_jam, &[]) {
                roles[k] = JAM;
            }
        }
        Mode::Joint => {
            for k in largest_indices(&report.z, p.n_jam, &[]) {
                roles[k] = JAM;
            }
            let taken: Vec<bool> = roles.iter().map(|&r| r == JAM).collect();
            let ze = report.z_eav.as_deref().expect("joint report carries z_E");
            for k in largest_indices(ze, p.n_eav, &taken) {
                roles[k] = EAV;
            }
        }
    }
    roles
}

fn random_roles(mode: Mode, p: &PipelineParams, n: usize, rng: &mut SeededRng) -> Vec<u8> {
    let mut roles = vec![FREE; n];
    let (n_jam, n_eav) = match mode {
        Mode::Eav => (0, p.n_eav),
        Mode::Jam => (p.n_jam, 0),
        Mode::Joint => (p.n_jam, p.n_eav),
    };
    let draw = rng.sample_without_replacement(n, n_jam + n_eav);
    for (i, k) in draw.into_iter().enumerate() {
        roles[k] = if i < n_jam { JAM } else { EAV };
    }
    roles
}

/// Relaxed solve, largest-m rounding and swap search, plus the optional
/// exhaustive and random-start baselines. Outcomes come back in the order
/// relaxed, largest-m, swap, exhaustive, swap-random. Errors carry the
/// stage that raised them.
pub fn select_pipeline(s: &Scenario, mode: Mode, p: &PipelineParams) -> Result<Vec<SelectionOutcome>> {
    s.validate_for(mode).map_err(|e| e.in_stage("input"))?;
    p.check(s, mode).map_err(|e| e.in_stage("input"))?;
    let n = s.num_candidates();
    let rho = p.rho_value();
    let models = Models::new(s, mode).map_err(|e| e.in_stage("input"))?;
    let ev = models.evaluator(s, mode, rho);
    let mut out = Vec::new();

    let t0 = Instant::now();
    let report = match mode {
        Mode::Eav => solve_relaxed_eav(s, p.n_eav, &p.solver),
        Mode::Jam => solve_relaxed_jam(s, p.n_jam, &p.solver),
        Mode::Joint => solve_relaxed_joint(s, p.n_eav, p.n_jam, rho, &p.solver),
    }
    .map_err(|e| e.in_stage("relaxed"))?;
    let relaxed_ms = elapsed_ms(t0);
    out.push(relaxed_outcome(mode, &report, rho, relaxed_ms).map_err(|e| e.in_stage("relaxed"))?);

    let t1 = Instant::now();
    let start = round_roles(mode, &report, p, n);
    let start_key = ev.key(&start);
    let rounded_ms = relaxed_ms + elapsed_ms(t1);
    out.push(outcome_from(Algorithm::LargestM, mode, &start, &start_key, 0, rounded_ms));

    let t2 = Instant::now();
    let run = run_swaps(&ev, start, report.objective, p.mu, p.max_swaps);
    out.push(outcome_from(Algorithm::Swap, mode, &run.roles, &run.key, run.swaps, rounded_ms + elapsed_ms(t2)));

    if p.exhaustive {
        let o = exhaustive_select(s, mode, p.n_eav, p.n_jam, rho, p.exhaustive_cap).map_err(|e| e.in_stage("exhaustive"))?;
        out.push(o);
    }

    if p.random_swap {
        let t3 = Instant::now();
        let mut rng = SeededRng::derived(p.random_seed, streams::RANDOM_INIT);
        let start = random_roles(mode, p, n, &mut rng);
        let run = run_swaps(&ev, start, report.objective, p.mu, p.random_max_swaps);
        out.push(outcome_from(Algorithm::SwapRandom, mode, &run.roles, &run.key, run.swaps, elapsed_ms(t3)));
    }
    Ok(out)
}

/// Objective of a selection on a (possibly different) scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub objective: f64,
    pub eav_objective: Option<f64>,
    pub feasible: bool,
}

/// Re-evaluates selection vectors, binary or relaxed, on `s`: `f` in eav
/// mode, `f~` in jam and joint mode, with the joint threshold `rho` and the
/// power budget of `s` deciding feasibility.
pub fn evaluate_selection(
    s: &Scenario,
    mode: Mode,
    eav: Option<&SelectionVector>,
    jam: Option<&SelectionVector>,
    rho: f64,
) -> Result<Evaluation> {
    s.validate_for(mode)?;
    let n = s.num_candidates();
    let get = |v: Option<&SelectionVector>, name: &str| -> Result<Vec<f64>> {
        let v = v.ok_or_else(|| Error::validation(name, format!("required in {} mode", mode.as_str())))?;
        if v.len() != n {
            return Err(Error::validation(name, format!("has length {} for {n} candidates", v.len())));
        }
        Ok(v.weights().to_vec())
    };
    let budget_ok = |z: &[f64]| match s.power_budget {
        Some(b) => z.iter().zip(&s.jam_powers).map(|(a, p)| a * p).sum::<f64>() <= b,
        None => true,
    };
    Ok(match mode {
        Mode::Eav => {
            let z = get(eav, "eav")?;
            let f = EavModel::new(s).objective_fim(&z);
            Evaluation {
                objective: f,
                eav_objective: None,
                feasible: f.is_finite(),
            }
        }
        Mode::Jam => {
            let z = get(jam, "jam")?;
            let f = JamModel::new(s)?.objective(&z);
            Evaluation {
                objective: f,
                eav_objective: None,
                feasible: f.is_finite() && budget_ok(&z),
            }
        }
        Mode::Joint => {
            let ze = get(eav, "eav")?;
            let zj = get(jam, "jam")?;
            let f = EavModel::new(s).objective_fim(&ze);
            Evaluation {
                objective: JamModel::new(s)?.objective(&zj),
                eav_objective: Some(f),
                feasible: f <= rho && budget_ok(&zj),
            }
        }
    })
}

