//! Best-improvement single-swap local search.

use rayon::prelude::*;

use super::{Evaluator, Key, Models, EAV, FREE, JAM};
use crate::error::Result;
use crate::scenario::{Mode, Scenario};

/// Ordered `(out, in)` moves: an occupied position gives up its role to a
/// position with a different role. Eavesdropper/jammer exchanges are listed
/// once, as `(jammer, eavesdropper)`.
pub(crate) fn neighbors(roles: &[u8]) -> Vec<(usize, usize)> {
    let mut moves = Vec::new();
    for (k, &rk) in roles.iter().enumerate() {
        if rk == FREE {
            continue;
        }
        for (l, &rl) in roles.iter().enumerate() {
            if rl == rk || (rk == EAV && rl == JAM) {
                continue;
            }
            moves.push((k, l));
        }
    }
    moves
}

fn gap_within(reference: f64, value: f64, mu: f64) -> bool {
    reference.is_finite() && value.is_finite() && (reference - value).abs() <= mu * reference.abs()
}

#[derive(Clone, Debug)]
pub(crate) struct SwapRun {
    pub roles: Vec<u8>,
    pub key: Key,
    pub swaps: usize,
}

pub(crate) fn run_swaps(ev: &Evaluator, start: Vec<u8>, relaxed_value: f64, mu: f64, max_swaps: usize) -> SwapRun {
    let mut cur = start;
    let mut key = ev.key(&cur);
    if key.feasible() && gap_within(relaxed_value, key.value, mu) {
        return SwapRun { roles: cur, key, swaps: 0 };
    }
    let mut swaps = 0;
    while swaps < max_swaps {
        let moves = neighbors(&cur);
        let keys: Vec<Key> = moves
            .par_iter()
            .map(|&(k, l)| {
                let mut r = cur.clone();
                r.swap(k, l);
                ev.key(&r)
            })
            .collect();
        let mut best: Option<usize> = None;
        for (i, kk) in keys.iter().enumerate() {
            if best.map_or(true, |b| ev.better(kk, &keys[b])) {
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        if !ev.better(&keys[b], &key) {
            break;
        }
        let (k, l) = moves[b];
        let previous = key;
        cur.swap(k, l);
        key = keys[b];
        swaps += 1;
        if previous.feasible() && key.feasible() && gap_within(previous.value, key.value, mu) {
            break;
        }
    }
    SwapRun { roles: cur, key, swaps }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwapResult {
    /// Eavesdropper positions (eav and joint modes), ascending.
    pub eav: Vec<usize>,
    /// Jammer positions (jam and joint modes), ascending.
    pub jam: Vec<usize>,
    pub objective: f64,
    /// `f(z_E)` in joint mode.
    pub eav_objective: Option<f64>,
    pub swaps: usize,
    pub feasible: bool,
}

/// Swap search from the binary selection(s) `eav` / `jam`.
///
/// Returns the start unchanged when it is within relative gap `mu` of
/// `relaxed_value`. Otherwise it repeatedly moves to the best single swap
/// (ties to the lowest `(out, in)` pair) while that strictly improves,
/// stopping after `max_swaps` moves or once an accepted move gains at most
/// `mu` times the current value. In joint mode a move is ranked by its
/// violation of `f(z_E) <= rho` first, so an infeasible start is driven
/// toward feasibility.
#[allow(clippy::too_many_arguments)]
pub fn swap_search(
    s: &Scenario,
    mode: Mode,
    eav: &[usize],
    jam: &[usize],
    relaxed_value: f64,
    mu: f64,
    max_swaps: usize,
    rho: f64,
) -> Result<SwapResult> {
    let models = Models::new(s, mode)?;
    let ev = models.evaluator(s, mode, rho);
    let roles = super::roles_from(
        s.num_candidates(),
        matches!(mode, Mode::Eav | Mode::Joint).then_some(eav),
        matches!(mode, Mode::Jam | Mode::Joint).then_some(jam),
    )?;
    let run = run_swaps(&ev, roles, relaxed_value, mu, max_swaps);
    let pick = |role: u8| run.roles.iter().enumerate().filter(|(_, &r)| r == role).map(|(k, _)| k).collect();
    let o = super::outcome_from(super::Algorithm::Swap, mode, &run.roles, &run.key, run.swaps, 0.0);
    Ok(SwapResult {
        eav: pick(EAV),
        jam: pick(JAM),
        objective: o.objective,
        eav_objective: o.eav_objective,
        swaps: run.swaps,
        feasible: o.feasible,
    })
}
