//! Monotone spectral projected gradient with Armijo backtracking.

use serde::{Deserialize, Serialize};

use super::project::FeasibleSet;
use crate::error::{Error, Result};
use crate::rng::{streams, SeededRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop once `|f_k - f_{k+1}| / |f_k|` stays below this value...
    pub rel_tol: f64,
    /// ...for this many consecutive iterations.
    pub stall_iterations: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    pub restarts: usize,
    pub restart_seed: u64,
    pub projection_move_tol: f64,
    pub projection_max_sweeps: usize,
    pub barrier_start: f64,
    pub barrier_end: f64,
    pub barrier_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            rel_tol: 1e-8,
            stall_iterations: 5,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            max_backtracks: 60,
            restarts: 20,
            restart_seed: 0,
            projection_move_tol: 1e-10,
            projection_max_sweeps: 10_000,
            barrier_start: 1.0,
            barrier_end: 1e-6,
            barrier_factor: 0.1,
        }
    }
}

impl SolverOptions {
    pub(crate) fn project(&self, set: &FeasibleSet, v: &[f64]) -> Result<Vec<f64>> {
        set.project_with(v, self.projection_move_tol, self.projection_max_sweeps)
    }
}

/// Why the iteration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    RelativeChange,
    ZeroStep,
    LineSearch,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub step: f64,
    pub rel_change: f64,
    pub termination: Termination,
}

/// Minimizes a function over `set` from a feasible `x0` with finite value.
///
/// `value_grad` must succeed wherever `value` is finite.
pub(crate) fn minimize(
    value: &dyn Fn(&[f64]) -> f64,
    value_grad: &dyn Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
    set: &FeasibleSet,
    x0: Vec<f64>,
    opts: &SolverOptions,
) -> Result<Minimum> {
    let mut x = x0;
    let (mut fx, mut g) = value_grad(&x)?;
    let mut alpha = opts.initial_step;
    let mut stall = 0;
    let mut rel_change = f64::INFINITY;
    let mut iterations = 0;
    let mut last_step = 0.0;
    let termination = loop {
        if iterations >= opts.max_iterations {
            break Termination::IterationLimit;
        }
        iterations += 1;
        let mut a = alpha;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - a * gi).collect();
            let y = opts.project(set, &trial)?;
            let decrease: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| gi * (yi - xi)).sum();
            if !(decrease < 0.0) {
                accepted = Some(None);
                break;
            }
            let fy = value(&y);
            if fy <= fx + opts.armijo * decrease {
                accepted = Some(Some((y, fy)));
                break;
            }
            a *= opts.shrink;
        }
        let (y, _) = match accepted {
            None => break Termination::LineSearch,
            Some(None) => break Termination::ZeroStep,
            Some(Some(v)) => v,
        };
        let (fy, gy) = value_grad(&y)?;
        last_step = a;

        let mut ss = 0.0;
        let mut sy = 0.0;
        for ((yi, xi), (gyi, gi)) in y.iter().zip(&x).zip(gy.iter().zip(&g)) {
            let s = yi - xi;
            ss += s * s;
            sy += s * (gyi - gi);
        }
        alpha = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { opts.initial_step.max(a * 2.0) };

        rel_change = (fx - fy).abs() / fx.abs().max(f64::MIN_POSITIVE);
        stall = if rel_change < opts.rel_tol { stall + 1 } else { 0 };
        x = y;
        fx = fy;
        g = gy;
        if stall >= opts.stall_iterations {
            break Termination::RelativeChange;
        }
    };
    Ok(Minimum {
        x,
        value: fx,
        iterations,
        step: last_step,
        rel_change,
        termination,
    })
}

/// First feasible point with finite value among `x0` and the seeded
/// random restarts. Returns the point and the number of restarts used.
pub(crate) fn finite_start(
    value: &dyn Fn(&[f64]) -> f64,
    set: &FeasibleSet,
    x0: Vec<f64>,
    opts: &SolverOptions,
) -> Result<Option<(Vec<f64>, usize)>> {
    if value(&x0).is_finite() {
        return Ok(Some((x0, 0)));
    }
    let mut rng = SeededRng::derived(opts.restart_seed, streams::RESTARTS);
    for r in 1..=opts.restarts {
        let v: Vec<f64> = set.upper().iter().map(|u| u * rng.uniform()).collect();
        let x = opts.project(set, &v)?;
        if value(&x).is_finite() {
            return Ok(Some((x, r)));
        }
    }
    Ok(None)
}

pub(crate) fn no_finite_start(what: &str, opts: &SolverOptions) -> Error {
    Error::InfeasibleInformation(format!(
        "{what} is infinite at the uniform start and at {} random restarts",
        opts.restarts
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_on_simplex() {
        // min |x - c|^2 over the capped simplex is the projection of c.
        let c = [0.9, 0.8, 0.1, -0.4];
        let set = FeasibleSet::capped_simplex(4, 2.0).unwrap();
        let value = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let vg = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            Ok((value(x), x.iter().zip(&c).map(|(a, b)| 2.0 * (a - b)).collect()))
        };
        let opts = SolverOptions::default();
        let m = minimize(&value, &vg, &set, vec![0.5; 4], &opts).unwrap();
        let p = set.project(&c).unwrap();
        for (a, b) in m.x.iter().zip(&p) {
            assert!((a - b).abs() < 1e-6, "{:?} vs {:?}", m.x, p);
        }
    }
}
