//! Enumeration of every admissible selection.

use rayon::prelude::*;

use super::{outcome_from, Algorithm, Evaluator, Key, Models, SelectionOutcome, EAV, FREE, JAM};
use crate::error::{Error, Result};
use crate::scenario::{Mode, Scenario};

pub const DEFAULT_SUBSET_CAP: u128 = 2_000_000;

const CHUNK: usize = 4096;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Lexicographic successor of an ascending `m`-subset of `0..n`.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let m = c.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if c[i] < n - m + i {
            c[i] += 1;
            for j in (i + 1)..m {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Best item by `score` over all `m`-subsets of `pool`, earliest on ties.
fn best_subset<T: Send>(
    pool: &[usize],
    m: usize,
    score: impl Fn(&[usize]) -> T + Sync,
    better: impl Fn(&T, &T) -> bool,
) -> Option<(Vec<usize>, T)> {
    let n = pool.len();
    if m > n {
        return None;
    }
    let mut comb: Vec<usize> = (0..m).collect();
    let mut best: Option<(Vec<usize>, T)> = None;
    let mut done = false;
    while !done {
        let mut chunk = Vec::with_capacity(CHUNK);
        while chunk.len() < CHUNK {
            chunk.push(comb.iter().map(|&i| pool[i]).collect::<Vec<usize>>());
            if !next_combination(&mut comb, n) {
                done = true;
                break;
            }
        }
        let scores: Vec<T> = chunk.par_iter().map(|c| score(c)).collect();
        for (c, sc) in chunk.into_iter().zip(scores) {
            if best.as_ref().map_or(true, |(_, b)| better(&sc, b)) {
                best = Some((c, sc));
            }
        }
    }
    best
}

fn roles_of(n: usize, eav: &[usize], jam: &[usize]) -> Vec<u8> {
    let mut r = vec![FREE; n];
    for &k in eav {
        r[k] = EAV;
    }
    for &k in jam {
        r[k] = JAM;
    }
    r
}

fn joint_best(ev: &Evaluator, n: usize, n_eav: usize, n_jam: usize) -> Option<(Vec<u8>, Key)> {
    let inner_better = |a: &f64, b: &f64| a < b;
    let score = |jam: &[usize]| -> (Vec<u8>, Key) {
        let rest: Vec<usize> = (0..n).filter(|k| !jam.contains(k)).collect();
        let eav = ev.eav.expect("joint mode has an eavesdropper model");
        let (best_e, _) = best_subset_seq(&rest, n_eav, |e| eav.objective_fim(&super::mask(&roles_of(n, e, &[]), EAV)), inner_better)
            .expect("n_eav + n_jam <= n");
        let roles = roles_of(n, &best_e, jam);
        let key = ev.key(&roles);
        (roles, key)
    };
    let all: Vec<usize> = (0..n).collect();
    best_subset(&all, n_jam, score, |a, b| ev.better(&a.1, &b.1)).map(|(_, rk)| rk)
}

fn best_subset_seq<T>(pool: &[usize], m: usize, score: impl Fn(&[usize]) -> T, better: impl Fn(&T, &T) -> bool) -> Option<(Vec<usize>, T)> {
    let n = pool.len();
    if m > n {
        return None;
    }
    let mut comb: Vec<usize> = (0..m).collect();
    let mut best: Option<(Vec<usize>, T)> = None;
    loop {
        let c: Vec<usize> = comb.iter().map(|&i| pool[i]).collect();
        let sc = score(&c);
        if best.as_ref().map_or(true, |(_, b)| better(&sc, b)) {
            best = Some((c, sc));
        }
        if !next_combination(&mut comb, n) {
            break;
        }
    }
    best
}

/// Optimal selection by enumeration.
///
/// Single-role modes enumerate the `C(N, m)` subsets; jammer subsets over the
/// power budget are excluded. Joint mode enumerates jammer subsets and, for
/// each, the eavesdropper subset of the remaining positions with the
/// smallest CRLB; jammer sets whose best eavesdropper set misses `rho` rank
/// below every feasible one. Ties go to the lexicographically smallest
/// index set. An eavesdropper family that is singular everywhere yields
/// `+inf` with `feasible = false`.
pub fn exhaustive_select(
    s: &Scenario,
    mode: Mode,
    n_eav: usize,
    n_jam: usize,
    rho: f64,
    cap: u128,
) -> Result<SelectionOutcome> {
    let n = s.num_candidates();
    let count = match mode {
        Mode::Eav => binomial(n, n_eav),
        Mode::Jam => binomial(n, n_jam),
        Mode::Joint => {
            if n_eav + n_jam > n {
                return Err(Error::Infeasible(format!("n_eav + n_jam exceeds the {n} positions")));
            }
            binomial(n, n_jam).saturating_mul(binomial(n - n_jam, n_eav))
        }
    };
    let m = if mode == Mode::Eav { n_eav } else { n_jam };
    if m > n {
        return Err(Error::Infeasible(format!("cannot select {m} of {n} positions")));
    }
    if count > cap {
        return Err(Error::TooManySubsets { count, cap });
    }
    let models = Models::new(s, mode)?;
    let ev = models.evaluator(s, mode, rho);
    let start = std::time::Instant::now();

    let (roles, key) = match mode {
        Mode::Joint => joint_best(&ev, n, n_eav, n_jam).expect("at least one subset"),
        _ => {
            let role = if mode == Mode::Eav { EAV } else { JAM };
            let all: Vec<usize> = (0..n).collect();
            let (best, key) = best_subset(
                &all,
                m,
                |c| {
                    let mut r = vec![FREE; n];
                    for &k in c {
                        r[k] = role;
                    }
                    ev.key(&r)
                },
                |a, b| ev.better(a, b),
            )
            .expect("m <= n");
            let mut r = vec![FREE; n];
            for &k in &best {
                r[k] = role;
            }
            (r, key)
        }
    };
    if key.budget_excess > 0.0 {
        return Err(Error::Infeasible(format!(
            "no selection of {m} jammers fits the power budget {:?}",
            s.power_budget
        )));
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(outcome_from(Algorithm::Exhaustive, mode, &roles, &key, 0, ms))
}
