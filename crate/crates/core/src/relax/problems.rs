use serde::Serialize;

use super::project::FeasibleSet;
use super::solver::{finite_start, minimize, no_finite_start, Minimum, SolverOptions, Termination};
use crate::eav::EavModel;
use crate::error::{Error, Result};
use crate::jam::JamModel;
use crate::scenario::{Mode, Scenario};

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    /// Eavesdropper weights for eav solves, jammer weights for jam and joint
    /// solves, jamming powers for the power solve.
    pub z: Vec<f64>,
    /// Eavesdropper weights of a joint solve.
    pub z_eav: Option<Vec<f64>>,
    /// `f` for eav solves, `f~` otherwise.
    pub objective: f64,
    /// `f(z_eav)` of a joint solve.
    pub eav_objective: Option<f64>,
    pub iterations: usize,
    pub step: f64,
    pub rel_change: f64,
    pub termination: Termination,
    /// Largest constraint violation of the reported point.
    pub residual: f64,
    pub restarts: usize,
}

impl SolverReport {
    fn from_min(m: Minimum, objective: f64, residual: f64, restarts: usize) -> Self {
        Self {
            z: m.x,
            z_eav: None,
            objective,
            eav_objective: None,
            iterations: m.iterations,
            step: m.step,
            rel_change: m.rel_change,
            termination: m.termination,
            residual,
            restarts,
        }
    }
}

fn check_count(name: &str, m: usize, lo: usize, n: usize) -> Result<()> {
    if m < lo || m > n {
        return Err(Error::validation(name, format!("must lie in [{lo}, {n}], got {m}")));
    }
    Ok(())
}

/// Capped simplex `sum z = m`, plus the power budget when the scenario has one.
fn jam_set(s: &Scenario, n_jam: usize) -> Result<FeasibleSet> {
    let n = s.num_candidates();
    let set = FeasibleSet::capped_simplex(n, n_jam as f64)?;
    match s.power_budget {
        Some(b) => set.with_budget(s.jam_powers.clone(), b),
        None => Ok(set),
    }
}

fn eav_min(model: &EavModel, set: &FeasibleSet, x0: Vec<f64>, opts: &SolverOptions) -> Result<(Minimum, usize)> {
    let value = |z: &[f64]| model.objective_fim(z);
    let vg = |z: &[f64]| model.value_and_gradient(z);
    let (x0, restarts) = finite_start(&value, set, x0, opts)?.ok_or_else(|| no_finite_start("eavesdropper CRLB", opts))?;
    Ok((minimize(&value, &vg, set, x0, opts)?, restarts))
}

fn jam_max(model: &JamModel, set: &FeasibleSet, x0: Vec<f64>, opts: &SolverOptions) -> Result<Minimum> {
    let value = |z: &[f64]| -model.objective(z);
    let vg = |z: &[f64]| model.value_and_gradient(z).map(|(v, g)| (-v, g.into_iter().map(|x| -x).collect()));
    if !model.objective(&x0).is_finite() {
        return Err(Error::InfeasibleInformation(
            "anchor-side CRLB is infinite without jamming; some target has fewer than two usable LOS anchors".into(),
        ));
    }
    let mut m = minimize(&value, &vg, set, x0, opts)?;
    m.value = -m.value;
    Ok(m)
}

/// Minimizes `f` over `{z in [0,1]^N : sum z = n_eav}`. The value is a
/// lower bound on every binary selection of `n_eav` eavesdroppers.
pub fn solve_relaxed_eav(s: &Scenario, n_eav: usize, opts: &SolverOptions) -> Result<SolverReport> {
    s.validate_for(Mode::Eav)?;
    let n = s.num_candidates();
    check_count("n_eav", n_eav, 1, n)?;
    let set = FeasibleSet::capped_simplex(n, n_eav as f64)?;
    let model = EavModel::new(s);
    let x0 = vec![n_eav as f64 / n as f64; n];
    let (m, restarts) = eav_min(&model, &set, x0, opts)?;
    let residual = set.residual(&m.x);
    let value = m.value;
    Ok(SolverReport::from_min(m, value, residual, restarts))
}

/// Maximizes `f~` over the capped simplex with total `n_jam` intersected
/// with the power budget.
pub fn solve_relaxed_jam(s: &Scenario, n_jam: usize, opts: &SolverOptions) -> Result<SolverReport> {
    s.validate_for(Mode::Jam)?;
    let n = s.num_candidates();
    check_count("n_jam", n_jam, 1, n)?;
    let set = jam_set(s, n_jam)?;
    let model = JamModel::new(s)?;
    let x0 = opts.project(&set, &vec![n_jam as f64 / n as f64; n])?;
    let m = jam_max(&model, &set, x0, opts)?;
    let residual = set.residual(&m.x);
    let value = m.value;
    Ok(SolverReport::from_min(m, value, residual, 0))
}

/// Maximizes `f~` over jamming powers `0 <= q <= peak`, `sum q <= budget`.
pub fn solve_relaxed_power(s: &Scenario, peak: &[f64], budget: f64, opts: &SolverOptions) -> Result<SolverReport> {
    s.validate_for(Mode::Jam)?;
    if peak.len() != s.num_candidates() {
        return Err(Error::validation("peak", format!("needs {} entries, got {}", s.num_candidates(), peak.len())));
    }
    if !(budget >= 0.0) {
        return Err(Error::validation("budget", format!("must be nonnegative, got {budget}")));
    }
    let set = FeasibleSet::boxed(peak.to_vec())?.with_budget(vec![1.0; peak.len()], budget)?;
    let model = JamModel::new(s)?;
    let x0 = vec![0.0; peak.len()];
    if !model.objective_power(&x0).is_finite() {
        return Err(Error::InfeasibleInformation("unjammed anchor-side CRLB is infinite".into()));
    }
    let value = |q: &[f64]| -model.objective_power(q);
    let vg = |q: &[f64]| {
        model
            .value_and_gradient_power(q)
            .map(|(v, g)| (-v, g.into_iter().map(|x| -x).collect()))
    };
    let m = minimize(&value, &vg, &set, x0, opts)?;
    let residual = set.residual(&m.x);
    let objective = -m.value;
    Ok(SolverReport::from_min(m, objective, residual, 0))
}

fn complement(z: &[f64]) -> Vec<f64> {
    z.iter().map(|v| 1.0 - v).collect()
}

/// Maximizes `f~(z_J)` subject to `f(z_E) <= rho`, `sum z_E = n_eav`,
/// `sum z_J = n_jam`, the power budget and `z_E + z_J <= 1`. When
/// `n_eav + n_jam = N` the eavesdroppers take every position not jammed,
/// `z_E = 1 - z_J`.
pub fn solve_relaxed_joint(
    s: &Scenario,
    n_eav: usize,
    n_jam: usize,
    rho: f64,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    s.validate_for(Mode::Joint)?;
    let n = s.num_candidates();
    check_count("n_eav", n_eav, 1, n)?;
    check_count("n_jam", n_jam, 1, n)?;
    if n_eav + n_jam > n {
        return Err(Error::Infeasible(format!(
            "n_eav + n_jam = {} exceeds the {n} candidate positions",
            n_eav + n_jam
        )));
    }
    if !(rho > 0.0) {
        return Err(Error::validation("rho", format!("must be positive, got {rho}")));
    }
    let eav = EavModel::new(s);
    let jam = JamModel::new(s)?;
    if n_eav + n_jam == n {
        joint_substituted(s, &eav, &jam, n_jam, rho, opts)
    } else {
        joint_general(s, &eav, &jam, n_eav, n_jam, rho, opts)
    }
}

fn finish_joint(
    mut report: SolverReport,
    eav: &EavModel,
    jam: &JamModel,
    z_eav: Vec<f64>,
    rho: f64,
) -> SolverReport {
    report.objective = jam.objective(&report.z);
    let f = eav.objective_fim(&z_eav);
    report.eav_objective = Some(f);
    report.z_eav = Some(z_eav);
    if rho.is_finite() {
        report.residual = report.residual.max(f - rho);
    }
    report
}

fn joint_substituted(
    s: &Scenario,
    eav: &EavModel,
    jam: &JamModel,
    n_jam: usize,
    rho: f64,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    let n = s.num_candidates();
    let set = jam_set(s, n_jam)?;
    let x0 = opts.project(&set, &vec![n_jam as f64 / n as f64; n])?;

    if rho == f64::INFINITY {
        let m = jam_max(jam, &set, x0, opts)?;
        let residual = set.residual(&m.x);
        let z_eav = complement(&m.x);
        let v = m.value;
        return Ok(finish_joint(SolverReport::from_min(m, v, residual, 0), eav, jam, z_eav, rho));
    }

    let f_of = |zj: &[f64]| eav.objective_fim(&complement(zj));
    let mut restarts = 0;
    let start = if f_of(&x0) < rho {
        x0
    } else {
        let vg = |zj: &[f64]| {
            eav.value_and_gradient(&complement(zj))
                .map(|(v, g)| (v, g.into_iter().map(|x| -x).collect()))
        };
        let (x1, r) = finite_start(&f_of, &set, x0, opts)?.ok_or_else(|| no_finite_start("eavesdropper CRLB", opts))?;
        restarts = r;
        let m = minimize(&f_of, &vg, &set, x1, opts)?;
        if !(m.value < rho) {
            return Err(Error::RhoInfeasible { rho, best: m.value });
        }
        m.x
    };

    let mut x = start;
    let mut last = None;
    for t in barrier_schedule(opts) {
        let value = |zj: &[f64]| {
            let f = f_of(zj);
            if !(f < rho) {
                return f64::INFINITY;
            }
            -jam.objective(zj) - t * (rho - f).ln()
        };
        let vg = |zj: &[f64]| -> Result<(f64, Vec<f64>)> {
            let ze = complement(zj);
            let (f, gf) = eav.value_and_gradient(&ze)?;
            let (ft, gt) = jam.value_and_gradient(zj)?;
            let slack = rho - f;
            let g = gt.iter().zip(&gf).map(|(a, b)| -a - t * b / slack).collect();
            Ok((-ft - t * slack.ln(), g))
        };
        let m = minimize(&value, &vg, &set, x, opts)?;
        x = m.x.clone();
        last = Some(m);
    }
    let m = last.expect("barrier schedule is nonempty");
    let residual = set.residual(&m.x);
    let z_eav = complement(&m.x);
    Ok(finish_joint(SolverReport::from_min(m, 0.0, residual, restarts), eav, jam, z_eav, rho))
}

fn barrier_schedule(opts: &SolverOptions) -> Vec<f64> {
    let mut ts = vec![opts.barrier_start];
    let mut t = opts.barrier_start;
    while t * opts.barrier_factor >= opts.barrier_end * (1.0 - 1e-9) && ts.len() < 64 {
        t *= opts.barrier_factor;
        ts.push(t);
    }
    ts
}

#[allow(clippy::too_many_arguments)]
fn joint_general(
    s: &Scenario,
    eav: &EavModel,
    jam: &JamModel,
    n_eav: usize,
    n_jam: usize,
    rho: f64,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    let n = s.num_candidates();

    if rho == f64::INFINITY {
        let jr = solve_relaxed_jam(s, n_jam, opts)?;
        let caps = complement(&jr.z);
        let eset = FeasibleSet::boxed(caps)?.with_block(0..n, n_eav as f64)?;
        let x0 = opts.project(&eset, &vec![n_eav as f64 / n as f64; n])?;
        let (m, restarts) = eav_min(eav, &eset, x0, opts)?;
        let mut report = jr;
        report.restarts = restarts;
        report.residual = report.residual.max(eset.residual(&m.x));
        return Ok(finish_joint(report, eav, jam, m.x, rho));
    }

    let mut set = FeasibleSet::boxed(vec![1.0; 2 * n])?
        .with_block(0..n, n_eav as f64)?
        .with_block(n..2 * n, n_jam as f64)?;
    if let Some(b) = s.power_budget {
        let mut coeffs = vec![0.0; n];
        coeffs.extend_from_slice(&s.jam_powers);
        set = set.with_budget(coeffs, b)?;
    }
    let set = set.with_coupling()?;

    let mut v0 = vec![n_eav as f64 / n as f64; n];
    v0.extend(std::iter::repeat(n_jam as f64 / n as f64).take(n));
    let x0 = opts.project(&set, &v0)?;

    let f_of = |x: &[f64]| eav.objective_fim(&x[..n]);
    let mut restarts = 0;
    let start = if f_of(&x0) < rho {
        x0
    } else {
        let vg = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let (v, mut g) = eav.value_and_gradient(&x[..n])?;
            g.extend(std::iter::repeat(0.0).take(n));
            Ok((v, g))
        };
        let (x1, r) = finite_start(&f_of, &set, x0, opts)?.ok_or_else(|| no_finite_start("eavesdropper CRLB", opts))?;
        restarts = r;
        let m = minimize(&f_of, &vg, &set, x1, opts)?;
        if !(m.value < rho) {
            return Err(Error::RhoInfeasible { rho, best: m.value });
        }
        m.x
    };

    let mut x = start;
    let mut last = None;
    for t in barrier_schedule(opts) {
        let value = |x: &[f64]| {
            let f = f_of(x);
            if !(f < rho) {
                return f64::INFINITY;
            }
            -jam.objective(&x[n..]) - t * (rho - f).ln()
        };
        let vg = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let (f, gf) = eav.value_and_gradient(&x[..n])?;
            let (ft, gt) = jam.value_and_gradient(&x[n..])?;
            let slack = rho - f;
            let mut g: Vec<f64> = gf.iter().map(|b| t * b / slack).collect();
            g.extend(gt.iter().map(|a| -a));
            Ok((-ft - t * slack.ln(), g))
        };
        let m = minimize(&value, &vg, &set, x, opts)?;
        x = m.x.clone();
        last = Some(m);
    }
    let mut m = last.expect("barrier schedule is nonempty");
    let residual = set.residual(&m.x);
    let z_eav = m.x[..n].to_vec();
    m.x = m.x[n..].to_vec();
    Ok(finish_joint(SolverReport::from_min(m, 0.0, residual, restarts), eav, jam, z_eav, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures::{bearing_fixture, two_anchor_fixture};
    use std::f64::consts::PI;

    #[test]
    fn eav_full_selection_is_all_ones() {
        let s = bearing_fixture(&[0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
        let r = solve_relaxed_eav(&s, 4, &SolverOptions::default()).unwrap();
        assert!(r.z.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn eav_symmetric_three_of_four() {
        let s = bearing_fixture(&[0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
        let r = solve_relaxed_eav(&s, 3, &SolverOptions::default()).unwrap();
        let binary = EavModel::new(&s).objective(&[1.0, 1.0, 1.0, 0.0]);
        assert!(r.objective <= binary + 1e-9);
        assert!(r.residual <= 1e-8);
    }

    #[test]
    fn eav_two_selected_has_no_finite_start() {
        let s = bearing_fixture(&[0.0, 1.0]);
        let err = solve_relaxed_eav(&s, 2, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleInformation(_)));
    }

    #[test]
    fn jam_all_selected() {
        let s = two_anchor_fixture(&[(10.0, 0.1, 0.2), (10.0, 0.3, 0.1), (5.0, 0.2, 0.2)]);
        let r = solve_relaxed_jam(&s, 3, &SolverOptions::default()).unwrap();
        assert!(r.z.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn jam_budget_infeasible() {
        let mut s = two_anchor_fixture(&[(10.0, 0.1, 0.2), (10.0, 0.3, 0.1), (5.0, 0.2, 0.2)]);
        s.power_budget = Some(14.0);
        assert!(matches!(solve_relaxed_jam(&s, 2, &SolverOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn zero_power_budget() {
        let s = two_anchor_fixture(&[(10.0, 0.1, 0.2), (10.0, 0.3, 0.1)]);
        let r = solve_relaxed_power(&s, &[10.0, 10.0], 0.0, &SolverOptions::default()).unwrap();
        assert!(r.z.iter().all(|&q| q == 0.0));
        assert!((r.objective - 2.0).abs() < 1e-14);
    }
}
