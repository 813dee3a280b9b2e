//! Euclidean projections onto the relaxed feasible regions.

use std::ops::Range;

use crate::error::{Error, Result};

/// Slack used by the emptiness checks on totals and budgets.
const EMPTY_TOL: f64 = 1e-9;

/// Projection onto `{z : sum z = m, 0 <= z <= 1}`.
pub fn project_capped_simplex(v: &[f64], m: f64) -> Result<Vec<f64>> {
    let n = v.len() as f64;
    if !(0.0..=n).contains(&m) {
        return Err(Error::Infeasible(format!(
            "selection total {m} outside [0, {n}]"
        )));
    }
    Ok(project_capped(v, &vec![1.0; v.len()], m))
}

fn clip_sum(v: &[f64], caps: &[f64], tau: f64) -> f64 {
    v.iter().zip(caps).map(|(x, u)| (x + tau).clamp(0.0, *u)).sum()
}

/// `z = clip(v + tau, 0, caps)` with `tau` chosen so that `sum z = m`.
/// Callers guarantee `0 <= m <= sum caps`.
pub(crate) fn project_capped(v: &[f64], caps: &[f64], m: f64) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut lo = v.iter().map(|x| -x).fold(f64::INFINITY, f64::min);
    let mut hi = v
        .iter()
        .zip(caps)
        .map(|(x, u)| u - x)
        .fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if clip_sum(v, caps, mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut tau = 0.5 * (lo + hi);

    // Solve the KKT equation exactly on the free set found by bisection.
    let mut fixed = 0.0;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for (x, u) in v.iter().zip(caps) {
        let y = x + tau;
        if y >= *u {
            fixed += u;
        } else if y > 0.0 {
            free_sum += x;
            free += 1;
        }
    }
    if free > 0 {
        let exact = (m - fixed - free_sum) / free as f64;
        if (clip_sum(v, caps, exact) - m).abs() <= (clip_sum(v, caps, tau) - m).abs() {
            tau = exact;
        }
    }
    v.iter().zip(caps).map(|(x, u)| (x + tau).clamp(0.0, *u)).collect()
}

const MAX_DUAL_LEVELS: usize = 3;

/// Solves the symmetric positive semidefinite system `m y = b` by Gaussian
/// elimination with diagonal pivoting; dependent rows get `y = 0`.
fn solve_small(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let r = b.len();
    let scale = (0..r).map(|i| m[i][i]).fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..r).collect();
    let mut rank = 0;
    for k in 0..r {
        let p = (k..r).max_by(|&a, &c| m[a][a].total_cmp(&m[c][c])).expect("nonempty range");
        if !(m[p][p] > 1e-12 * scale) {
            break;
        }
        m.swap(k, p);
        m.iter_mut().for_each(|row| row.swap(k, p));
        b.swap(k, p);
        order.swap(k, p);
        for i in k + 1..r {
            let f = m[i][k] / m[k][k];
            for j in k..r {
                m[i][j] -= f * m[k][j];
            }
            b[i] -= f * b[k];
        }
        rank += 1;
    }
    let mut y = vec![0.0; r];
    for k in (0..rank).rev() {
        let s: f64 = (k + 1..rank).map(|j| m[k][j] * y[j]).sum();
        y[k] = (b[k] - s) / m[k][k];
    }
    let mut out = vec![0.0; r];
    for (k, &i) in order.iter().enumerate() {
        out[i] = y[k];
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
struct Block {
    range: Range<usize>,
    total: f64,
}

#[derive(Clone, Debug, PartialEq)]
struct Budget {
    coeffs: Vec<f64>,
    bound: f64,
    norm_sq: f64,
}

/// Intersection of a box `[0, upper]`, equality sums over disjoint index
/// blocks, linear budgets `a . z <= b` and the optional pairwise coupling
/// `z_k + z_{n+k} <= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleSet {
    upper: Vec<f64>,
    blocks: Vec<Block>,
    budgets: Vec<Budget>,
    coupling: Option<usize>,
}

impl FeasibleSet {
    /// The box `[0, upper]`.
    pub fn boxed(upper: Vec<f64>) -> Result<Self> {
        if let Some(u) = upper.iter().find(|u| !(**u >= 0.0) || !u.is_finite()) {
            return Err(Error::Infeasible(format!("upper bound {u} is not a finite nonnegative number")));
        }
        Ok(Self {
            upper,
            blocks: Vec::new(),
            budgets: Vec::new(),
            coupling: None,
        })
    }

    /// `{z in [0,1]^n : sum z = m}`.
    pub fn capped_simplex(n: usize, m: f64) -> Result<Self> {
        Self::boxed(vec![1.0; n])?.with_block(0..n, m)
    }

    /// Adds `sum_{k in range} z_k = total`.
    pub fn with_block(mut self, range: Range<usize>, total: f64) -> Result<Self> {
        if range.end > self.dim() || self.blocks.iter().any(|b| b.range.start < range.end && range.start < b.range.end) {
            return Err(Error::Infeasible(format!("block {range:?} overlaps another block or exceeds the dimension")));
        }
        let cap: f64 = self.upper[range.clone()].iter().sum();
        if !(total >= 0.0) || total > cap + EMPTY_TOL {
            return Err(Error::Infeasible(format!(
                "required total {total} outside [0, {cap}] for indices {range:?}"
            )));
        }
        self.blocks.push(Block { range, total });
        self.check_budgets()?;
        Ok(self)
    }

    /// Adds `coeffs . z <= bound` with nonnegative coefficients.
    pub fn with_budget(mut self, coeffs: Vec<f64>, bound: f64) -> Result<Self> {
        if coeffs.len() != self.dim() || coeffs.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Infeasible("budget coefficients must be nonnegative, one per variable".into()));
        }
        let norm_sq = coeffs.iter().map(|c| c * c).sum();
        self.budgets.push(Budget {
            coeffs,
            bound,
            norm_sq,
        });
        self.check_budgets()?;
        Ok(self)
    }

    /// Adds `z_k + z_{n+k} <= 1` for `k < n`, where the dimension is `2n`.
    pub fn with_coupling(mut self) -> Result<Self> {
        if self.dim() % 2 != 0 {
            return Err(Error::Infeasible("coupling requires an even dimension".into()));
        }
        let n = self.dim() / 2;
        let total: f64 = self.blocks.iter().map(|b| b.total).sum();
        if total > n as f64 + EMPTY_TOL {
            return Err(Error::Infeasible(format!(
                "block totals {total} exceed the {n} positions available under coupling"
            )));
        }
        self.coupling = Some(n);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Smallest value of `coeffs . z` over box and blocks (fractional knapsack).
    fn min_budget_use(&self, coeffs: &[f64]) -> f64 {
        let mut total = 0.0;
        for b in &self.blocks {
            let mut idx: Vec<usize> = b.range.clone().collect();
            idx.sort_by(|&x, &y| coeffs[x].total_cmp(&coeffs[y]).then(x.cmp(&y)));
            let mut need = b.total;
            for k in idx {
                if need <= 0.0 {
                    break;
                }
                let take = need.min(self.upper[k]);
                total += take * coeffs[k];
                need -= take;
            }
        }
        total
    }

    fn check_budgets(&self) -> Result<()> {
        for b in &self.budgets {
            let min = self.min_budget_use(&b.coeffs);
            if min > b.bound + EMPTY_TOL * (1.0 + b.bound.abs()) {
                return Err(Error::Infeasible(format!(
                    "budget {} is below the minimum achievable use {min}",
                    b.bound
                )));
            }
        }
        Ok(())
    }

    /// Largest constraint violation at `z`.
    pub fn residual(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.dim(), "point dimension");
        let mut r: f64 = 0.0;
        for (x, u) in z.iter().zip(&self.upper) {
            r = r.max(-x).max(x - u);
        }
        for b in &self.blocks {
            let s: f64 = z[b.range.clone()].iter().sum();
            r = r.max((s - b.total).abs());
        }
        for b in &self.budgets {
            let s: f64 = b.coeffs.iter().zip(z).map(|(a, x)| a * x).sum();
            r = r.max(s - b.bound);
        }
        if let Some(n) = self.coupling {
            for k in 0..n {
                r = r.max(z[k] + z[n + k] - 1.0);
            }
        }
        r
    }

    /// Projection onto box and blocks, which is exact and separable.
    fn project_base(&self, v: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = v.iter().zip(&self.upper).map(|(x, u)| x.clamp(0.0, *u)).collect();
        for b in &self.blocks {
            let p = project_capped(&v[b.range.clone()], &self.upper[b.range.clone()], b.total);
            z[b.range.clone()].copy_from_slice(&p);
        }
        z
    }

    fn project_budget(b: &Budget, v: &mut [f64]) {
        let s: f64 = b.coeffs.iter().zip(v.iter()).map(|(a, x)| a * x).sum();
        if s > b.bound && b.norm_sq > 0.0 {
            let t = (s - b.bound) / b.norm_sq;
            for (x, a) in v.iter_mut().zip(&b.coeffs) {
                *x -= t * a;
            }
        }
    }

    /// `clip(v - t a, 0, upper)` with the multiplier `t >= 0` found by
    /// bisection; only called when `t = 0` violates the budget.
    fn project_box_budget(&self, v: &[f64], b: &Budget) -> Vec<f64> {
        let at = |t: f64| -> Vec<f64> {
            v.iter()
                .zip(&b.coeffs)
                .zip(&self.upper)
                .map(|((x, a), u)| (x - t * a).clamp(0.0, *u))
                .collect()
        };
        let used = |z: &[f64]| -> f64 { z.iter().zip(&b.coeffs).map(|(x, a)| x * a).sum() };
        let mut lo = 0.0;
        let mut hi = 1.0;
        while used(&at(hi)) > b.bound && hi < 1e300 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if used(&at(mid)) > b.bound {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(hi)
    }

    /// Multipliers the dual method searches over: budgets always, blocks
    /// only when coupling ties them together.
    fn multiplier_count(&self) -> usize {
        self.budgets.len() + if self.coupling.is_some() { self.blocks.len() } else { 0 }
    }

    /// Minimizer of the Lagrangian for fixed multipliers `y`, ordered as
    /// budgets then (with coupling) blocks. Separable and closed form.
    fn lagrangian_point(&self, v: &[f64], y: &[f64]) -> Vec<f64> {
        let mut w = v.to_vec();
        for (b, mu) in self.budgets.iter().zip(y) {
            for (x, a) in w.iter_mut().zip(&b.coeffs) {
                *x -= mu * a;
            }
        }
        let Some(n) = self.coupling else {
            return self.project_base(&w);
        };
        for (b, alpha) in self.blocks.iter().zip(&y[self.budgets.len()..]) {
            w[b.range.clone()].iter_mut().for_each(|x| *x -= alpha);
        }
        let u = &self.upper;
        let mut z: Vec<f64> = w.iter().zip(u).map(|(x, ui)| x.clamp(0.0, *ui)).collect();
        for k in 0..n {
            if z[k] + z[n + k] > 1.0 {
                let lo = (1.0 - u[n + k]).max(0.0);
                let hi = u[k].min(1.0);
                let a = (0.5 * (w[k] - w[n + k] + 1.0)).clamp(lo, hi);
                z[k] = a;
                z[n + k] = 1.0 - a;
            }
        }
        z
    }

    /// `1 + sum |c_i| u_i` for multiplier row `j`, the scale of its excess.
    fn row_mass(&self, j: usize) -> f64 {
        1.0 + if j < self.budgets.len() {
            self.budgets[j].coeffs.iter().zip(&self.upper).map(|(a, u)| a.abs() * u).sum::<f64>()
        } else {
            self.upper[self.blocks[j - self.budgets.len()].range.clone()].iter().sum::<f64>()
        }
    }

    /// Slack-signed residual of multiplier row `j` at `z`: positive means
    /// the row wants a larger multiplier.
    fn row_excess(&self, j: usize, z: &[f64]) -> f64 {
        if j < self.budgets.len() {
            let b = &self.budgets[j];
            b.coeffs.iter().zip(z).map(|(a, x)| a * x).sum::<f64>() - b.bound
        } else {
            let b = &self.blocks[j - self.budgets.len()];
            z[b.range.clone()].iter().sum::<f64>() - b.total
        }
    }

    /// Exact projection by nested one-dimensional root finding on the dual.
    /// Each row's excess is non-increasing in its own multiplier once the
    /// inner multipliers are re-solved, since it is the derivative of a
    /// concave partial maximum.
    fn project_dual(&self, v: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.multiplier_count()];
        self.solve_level(v, &mut y, 0);
        let mut z = self.lagrangian_point(v, &y);
        self.repair(&mut z);
        z
    }

    /// Removes the rounding left in block sums and tight budgets when `v` is
    /// large (free coordinates are `v_i - alpha` and carry ulp(|v|) error).
    /// Moves are allowed along strictly interior coordinates and, for tight
    /// coupled pairs, along `e_k - e_{n+k}`; the minimum-norm combination
    /// that zeroes the residuals is applied.
    fn repair(&self, z: &mut [f64]) {
        const EDGE: f64 = 1e-12;
        let dim = z.len();
        for _ in 0..3 {
            if self.residual(z) <= EDGE {
                return;
            }
            let inside = |z: &[f64], i: usize| z[i] > EDGE && z[i] < self.upper[i] - EDGE;
            let mut dirs: Vec<Vec<(usize, f64)>> = Vec::new();
            for i in 0..dim {
                let tight = match self.coupling {
                    Some(n) => z[i] + z[if i < n { i + n } else { i - n }] >= 1.0 - EDGE,
                    None => false,
                };
                if inside(z, i) && !tight {
                    dirs.push(vec![(i, 1.0)]);
                }
            }
            if let Some(n) = self.coupling {
                for k in 0..n {
                    if z[k] + z[n + k] >= 1.0 - EDGE && inside(z, k) && inside(z, n + k) {
                        dirs.push(vec![(k, 1.0), (n + k, -1.0)]);
                    }
                }
            }
            let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
            for b in &self.blocks {
                let mut c = vec![0.0; dim];
                c[b.range.clone()].iter_mut().for_each(|e| *e = 1.0);
                rows.push((c, z[b.range.clone()].iter().sum::<f64>() - b.total));
            }
            for b in &self.budgets {
                let r = b.coeffs.iter().zip(z.iter()).map(|(a, x)| a * x).sum::<f64>() - b.bound;
                if r > -1e-9 * (1.0 + b.bound.abs()) {
                    rows.push((b.coeffs.clone(), r));
                }
            }
            // Row coefficients in direction space.
            let cmat: Vec<Vec<f64>> = rows
                .iter()
                .map(|(c, _)| dirs.iter().map(|d| d.iter().map(|(i, w)| c[*i] * w).sum()).collect())
                .collect();
            let gram: Vec<Vec<f64>> = cmat
                .iter()
                .map(|a| cmat.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
                .collect();
            let lambda = solve_small(gram, rows.iter().map(|(_, r)| *r).collect());
            for (d, dir) in dirs.iter().enumerate() {
                let t: f64 = cmat.iter().zip(&lambda).map(|(c, l)| c[d] * l).sum();
                for &(i, w) in dir {
                    z[i] = (z[i] - t * w).clamp(0.0, self.upper[i]);
                }
            }
        }
    }

    fn solve_level(&self, v: &[f64], y: &mut [f64], level: usize) -> f64 {
        if level == y.len() {
            return 0.0;
        }
        let excess_at = |t: f64, y: &mut [f64]| -> f64 {
            y[level] = t;
            self.solve_level(v, y, level + 1);
            self.row_excess(level, &self.lagrangian_point(v, y))
        };
        let is_budget = level < self.budgets.len();
        let scale = 1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = 1e-14 * self.row_mass(level);
        let (mut lo, mut g_lo, mut hi, mut g_hi);
        if is_budget {
            lo = 0.0;
            g_lo = excess_at(0.0, y);
            if g_lo <= 0.0 {
                return g_lo;
            }
            hi = scale;
            g_hi = excess_at(hi, y);
            while g_hi > 0.0 && hi < 1e300 {
                lo = hi;
                g_lo = g_hi;
                hi *= 2.0;
                g_hi = excess_at(hi, y);
            }
        } else {
            lo = -scale;
            g_lo = excess_at(lo, y);
            while g_lo < 0.0 && lo > -1e300 {
                lo *= 2.0;
                g_lo = excess_at(lo, y);
            }
            hi = scale;
            g_hi = excess_at(hi, y);
            while g_hi > 0.0 && hi < 1e300 {
                hi *= 2.0;
                g_hi = excess_at(hi, y);
            }
        }
        if g_lo.abs() <= tol {
            return excess_at(lo, y);
        }
        if g_hi.abs() <= tol {
            return excess_at(hi, y);
        }
        // Illinois false position with periodic bisection.
        let mut side = 0i8;
        let mut best = (hi, g_hi);
        for iter in 0..200 {
            let mut t = if iter % 4 == 3 || g_lo == g_hi { 0.5 * (lo + hi) } else { hi - g_hi * (hi - lo) / (g_hi - g_lo) };
            if !(t > lo && t < hi) {
                t = 0.5 * (lo + hi);
            }
            if t <= lo || t >= hi {
                break;
            }
            let g = excess_at(t, y);
            if g.abs() < best.1.abs() {
                best = (t, g);
            }
            if g.abs() <= tol {
                break;
            }
            if g > 0.0 {
                lo = t;
                g_lo = g;
                if side == -1 {
                    g_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = t;
                g_hi = g;
                if side == 1 {
                    g_lo *= 0.5;
                }
                side = 1;
            }
        }
        excess_at(best.0, y)
    }

    fn project_coupling(n: usize, v: &mut [f64]) {
        for k in 0..n {
            let excess = v[k] + v[n + k] - 1.0;
            if excess > 0.0 {
                v[k] -= 0.5 * excess;
                v[n + k] -= 0.5 * excess;
            }
        }
    }

    /// Euclidean projection of `v`. Exact when only box and block
    /// constraints are present or when the box-and-block projection already
    /// satisfies the rest; Dykstra's algorithm otherwise.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.project_with(v, 1e-10, 10_000)
    }

    pub fn project_with(&self, v: &[f64], move_tol: f64, max_sweeps: usize) -> Result<Vec<f64>> {
        assert_eq!(v.len(), self.dim(), "point dimension");
        let base = self.project_base(v);
        if self.residual(&base) <= 1e-12 {
            return Ok(base);
        }
        if self.blocks.is_empty() && self.coupling.is_none() && self.budgets.len() == 1 {
            return Ok(self.project_box_budget(v, &self.budgets[0]));
        }
        if self.multiplier_count() <= MAX_DUAL_LEVELS {
            let z = self.project_dual(v);
            let residual = self.residual(&z);
            if residual > 1e-8 {
                return Err(Error::ProjectionNonConvergence { sweeps: 0, residual });
            }
            return Ok(z);
        }

        let sets = self.budgets.len() + usize::from(self.coupling.is_some()) + 1;
        let mut incr = vec![vec![0.0; v.len()]; sets];
        let mut x = v.to_vec();
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let start = x.clone();
            for (s, p) in incr.iter_mut().enumerate() {
                let mut y: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + b).collect();
                if s < self.budgets.len() {
                    Self::project_budget(&self.budgets[s], &mut y);
                } else if s + 1 < sets {
                    Self::project_coupling(self.coupling.expect("coupling set present"), &mut y);
                } else {
                    y = self.project_base(&y);
                }
                for ((pi, xi), yi) in p.iter_mut().zip(&x).zip(&y) {
                    *pi = xi + *pi - yi;
                }
                x = y;
            }
            let moved = x.iter().zip(&start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if (moved < move_tol && self.residual(&x) <= 1e-10) || sweeps >= max_sweeps {
                break;
            }
        }
        let residual = self.residual(&x);
        if residual > 1e-8 {
            return Err(Error::ProjectionNonConvergence { sweeps, residual });
        }
        Ok(x)
    }
}
