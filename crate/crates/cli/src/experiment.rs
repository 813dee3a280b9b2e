//! Scenario construction and pipeline runs for one (value, replicate) job.

use nodesel::rng::{streams, SeededRng};
use nodesel::scenario::{
    apply_shadowing, gaussian_like_prior, generate_paper_scenario, load_scenario, perturb_anchor_knowledge, Mode,
    ShadowingParams,
};
use nodesel::select::{
    evaluate_selection, robust_eav_effective, robust_jam_effective, select_pipeline, PipelineParams, SelectionOutcome,
};
use nodesel::{Point, Scenario, UncertaintyModel};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, Row};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Job {
    pub value: Option<f64>,
    pub replicate: usize,
    pub seed: u64,
}

/// Jobs in output order: by value, then replicate.
pub fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let values: Vec<Option<f64>> = if cfg.param.is_some() {
        cfg.values.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    values
        .into_iter()
        .flat_map(|value| {
            (0..cfg.replicates).map(move |replicate| Job {
                value,
                replicate,
                seed: cfg.seed_base.wrapping_add(replicate as u64),
            })
        })
        .collect()
}

/// A pipeline outcome under its output label.
#[derive(Clone, Debug)]
pub struct Labeled {
    pub label: String,
    pub outcome: SelectionOutcome,
}

pub struct JobOutput {
    pub job: Job,
    pub result: CliResult<Vec<Labeled>>,
}

/// The scenario file, loaded once and shared by all jobs.
pub fn base_file(cfg: &ExperimentConfig) -> CliResult<Option<Scenario>> {
    match &cfg.scenario {
        Some(path) => {
            let s = load_scenario(path)?;
            s.validate_for(cfg.mode)?;
            Ok(Some(s))
        }
        None => Ok(None),
    }
}

fn scenario_for(cfg: &ExperimentConfig, file: Option<&Scenario>, seed: u64) -> CliResult<Scenario> {
    let mut s = match file {
        Some(s) => s.clone(),
        None => {
            let mut p = cfg.preset.params().with_seed(seed);
            if let Some(v) = cfg.sigma2 {
                p.eav_noise = v;
            }
            generate_paper_scenario(&p)?
        }
    };
    if let Some(v) = cfg.jam_sigma2 {
        s.jam_noise = vec![v; s.num_anchors()];
    }
    if cfg.shadowing {
        s = apply_shadowing(&s, seed, &ShadowingParams::default())?;
    }
    Ok(s)
}

fn uniform_draws(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = SeededRng::derived(seed, stream);
    (0..n).map(|_| rng.uniform()).collect()
}

fn uncertainty(cfg: &ExperimentConfig, s: &Scenario, seed: u64) -> CliResult<UncertaintyModel> {
    if let Some(path) = &cfg.uncertainty {
        return Ok(UncertaintyModel::load(path)?);
    }
    let nt = s.num_targets();
    let eps = uniform_draws(cfg.eps_seed.unwrap_or(seed), streams::EAV_UNCERTAINTY, nt);
    let kappa = uniform_draws(cfg.kappa_seed.unwrap_or(seed), streams::JAM_UNCERTAINTY, nt);
    Ok(UncertaintyModel::relative(s, &eps, &kappa)?)
}

fn worst_case(mode: Mode, s: &Scenario, u: &UncertaintyModel) -> CliResult<Scenario> {
    Ok(match mode {
        Mode::Eav => robust_eav_effective(s, u)?,
        Mode::Jam => robust_jam_effective(s, u)?,
        Mode::Joint => robust_jam_effective(&robust_eav_effective(s, u)?, u)?,
    })
}

fn pipeline_params(cfg: &ExperimentConfig, candidates: usize, seed: u64) -> PipelineParams {
    PipelineParams {
        n_eav: cfg.n_eav_for(candidates),
        n_jam: cfg.n_jam,
        rho: cfg.rho,
        mu: cfg.mu,
        max_swaps: cfg.max_swaps,
        exhaustive: cfg.exhaustive,
        random_swap: cfg.random_swap,
        random_max_swaps: cfg.random_max_swaps,
        random_seed: seed,
        ..PipelineParams::default()
    }
}

/// Outcomes selected on one scenario, re-scored on `truth`.
fn rescored(out: Vec<SelectionOutcome>, truth: &Scenario, mode: Mode, rho: f64) -> CliResult<Vec<SelectionOutcome>> {
    out.into_iter()
        .map(|mut o| {
            let e = evaluate_selection(truth, mode, o.eav.as_ref(), o.jam.as_ref(), rho)?;
            o.objective = e.objective;
            o.eav_objective = e.eav_objective;
            o.feasible = e.feasible;
            Ok(o)
        })
        .collect()
}

fn labeled(out: Vec<SelectionOutcome>, suffix: &str) -> impl Iterator<Item = Labeled> + '_ {
    out.into_iter().map(move |o| Labeled {
        label: format!("{}{suffix}", o.algorithm.as_str()),
        outcome: o,
    })
}

/// Runs the pipeline for one job.
///
/// Plain labels are selections made on the model used for scoring. With
/// `robust`, that model is the worst case and `-nominal` rows are
/// selections made on the nominal intensities. With a mismatch (`nu`, `r`)
/// it is the true model and `-assumed` rows are selections made on the
/// uniform prior and the erroneous anchor positions.
pub fn run_job(cfg: &ExperimentConfig, file: Option<&Scenario>, job: Job) -> CliResult<Vec<Labeled>> {
    let cfg = match job.value {
        Some(v) => cfg.at(v)?,
        None => cfg.clone(),
    };
    let base = scenario_for(&cfg, file, job.seed)?;
    let params = pipeline_params(&cfg, base.num_candidates(), job.seed);
    let rho = params.rho_value();
    let mode = cfg.mode;
    let mut out = Vec::new();
    if cfg.robust {
        let worst = worst_case(mode, &base, &uncertainty(&cfg, &base, job.seed)?)?;
        out.extend(labeled(select_pipeline(&worst, mode, &params)?, ""));
        let nominal = select_pipeline(&base, mode, &params)?;
        out.extend(labeled(rescored(nominal, &worst, mode, rho)?, "-nominal"));
    } else if cfg.mismatch() {
        let truth = match cfg.nu {
            Some(nu) => base.with_prior(gaussian_like_prior(&base.targets, Point::new(0.0, 0.0), nu)?)?,
            None => base.clone(),
        };
        let assumed = perturb_anchor_knowledge(&base, cfg.r.unwrap_or(0.0), job.seed)?;
        out.extend(labeled(select_pipeline(&truth, mode, &params)?, ""));
        let chosen = select_pipeline(&assumed, mode, &params)?;
        out.extend(labeled(rescored(chosen, &truth, mode, rho)?, "-assumed"));
    } else {
        out.extend(labeled(select_pipeline(&base, mode, &params)?, ""));
    }
    Ok(out)
}

/// All jobs, in parallel, collected in job order.
pub fn run_all(cfg: &ExperimentConfig, file: Option<&Scenario>, jobs: &[Job]) -> Vec<JobOutput> {
    jobs.par_iter()
        .map(|&job| JobOutput {
            job,
            result: run_job(cfg, file, job),
        })
        .collect()
}

pub fn param_name(cfg: &ExperimentConfig) -> String {
    cfg.param.map_or("none", |p| p.as_str()).to_string()
}

/// CSV rows of one job; a failed job gives a single `error` row.
pub fn rows_of(cfg: &ExperimentConfig, out: &JobOutput, timings: bool) -> Vec<Row> {
    let base = |algorithm: String| Row {
        algorithm,
        mode: cfg.mode.as_str().to_string(),
        param: param_name(cfg),
        value: out.job.value.map(fmt_f64).unwrap_or_default(),
        replicate: out.job.replicate,
        seed: out.job.seed,
        objective_m2: None,
        feasible: false,
        swaps: None,
        wall_ms: None,
    };
    match &out.result {
        Ok(list) => list
            .iter()
            .map(|l| Row {
                objective_m2: Some(l.outcome.objective),
                feasible: l.outcome.feasible,
                swaps: Some(l.outcome.swaps),
                wall_ms: timings.then_some(l.outcome.wall_ms),
                ..base(l.label.clone())
            })
            .collect(),
        Err(_) => vec![base("error".to_string())],
    }
}

/// Exit status for a set of job outputs: the first failure decides.
pub fn first_failure(outputs: &[JobOutput]) -> Option<&CliError> {
    outputs.iter().find_map(|o| o.result.as_ref().err())
}
