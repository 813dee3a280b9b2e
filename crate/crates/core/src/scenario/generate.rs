//! Deterministic scenario generators and perturbations.
//!
//! The default geometry is a square grid of possible target positions, a
//! ring of anchors around it and candidate positions scattered over a
//! rectangular annulus that keeps adversarial nodes away from the network.
//! All draws come from [`SeededRng`] streams keyed by the caller's seed.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{AnchorLink, EavLink, Point, Scenario};
use crate::error::{Error, Result};
use crate::rng::{streams, SeededRng};

/// Rectangular annulus `[-outer, outer]^2` minus the open box
/// `(-inner_x, inner_x) x (-inner_y, inner_y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingRegion {
    pub outer: f64,
    pub inner_x: f64,
    pub inner_y: f64,
}

impl Default for RingRegion {
    fn default() -> Self {
        Self {
            outer: 50.0,
            inner_x: 20.0,
            inner_y: 30.0,
        }
    }
}

impl RingRegion {
    pub fn contains(&self, p: &Point) -> bool {
        let in_outer = p.x.abs() <= self.outer && p.y.abs() <= self.outer;
        let in_hole = p.x.abs() < self.inner_x && p.y.abs() < self.inner_y;
        in_outer && !in_hole
    }

    /// Uniform sample by rejection from the bounding box. Each attempt
    /// consumes two uniforms (x then y).
    pub fn sample(&self, rng: &mut SeededRng) -> Point {
        loop {
            let p = Point::new(
                rng.uniform_in(-self.outer, self.outer),
                rng.uniform_in(-self.outer, self.outer),
            );
            if self.contains(&p) {
                return p;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    /// Targets at `[m, n] * grid_step` for `-h <= m, n <= h`.
    pub grid_half_extent: usize,
    pub grid_step: f64,
    pub anchor_count: usize,
    pub anchor_radius: f64,
    pub candidate_count: usize,
    pub region: RingRegion,
    /// Eavesdropper receiver noise level sigma^2.
    pub eav_noise: f64,
    /// Anchor measurement noise level.
    pub jam_noise: f64,
    pub jam_power: f64,
    /// Total jammer budget; `None` uses `jam_power * candidate_count`.
    pub power_budget: Option<f64>,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self::paper()
    }
}

impl GeneratorParams {
    /// 121 targets, 10 anchors on an 18 m circle, 100 candidates.
    pub fn paper() -> Self {
        Self {
            grid_half_extent: 5,
            grid_step: 2.0,
            anchor_count: 10,
            anchor_radius: 18.0,
            candidate_count: 100,
            region: RingRegion::default(),
            eav_noise: 0.1,
            jam_noise: 0.1,
            jam_power: 10.0,
            power_budget: None,
            seed: 0,
        }
    }

    /// Reduced geometry for quick experiments: 49 targets, 6 anchors,
    /// 40 candidates.
    pub fn desk() -> Self {
        Self {
            grid_half_extent: 3,
            anchor_count: 6,
            candidate_count: 40,
            ..Self::paper()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn grid_targets(h: usize, step: f64) -> Vec<Point> {
    let h = h as i64;
    let mut out = Vec::with_capacity(((2 * h + 1) * (2 * h + 1)) as usize);
    for m in -h..=h {
        for n in -h..=h {
            out.push(Point::new(m as f64 * step, n as f64 * step));
        }
    }
    out
}

fn ring_anchors(count: usize, radius: f64) -> Vec<Point> {
    (0..count)
        .map(|j| {
            let psi = TAU * j as f64 / count as f64;
            Point::new(radius * psi.cos(), radius * psi.sin())
        })
        .collect()
}

fn checked_distance_sq(a: &Point, b: &Point, what: impl Fn() -> String) -> Result<f64> {
    let d2 = a.distance_sq(b);
    if d2 == 0.0 {
        return Err(Error::Construction(format!("{} coincide (zero distance)", what())));
    }
    Ok(d2)
}

/// Builds the all-LOS, all-connected scenario with inverse-square
/// intensities: `lambda = 1/(d^2 sigma^2)` for eavesdropping links,
/// `1/d^2` for anchor links and `1/d^2` for jammer-to-anchor gains.
pub fn generate_paper_scenario(params: &GeneratorParams) -> Result<Scenario> {
    if params.anchor_count == 0 {
        return Err(Error::Domain("anchor_count must be at least 1".into()));
    }
    if params.candidate_count == 0 {
        return Err(Error::Domain("candidate_count must be at least 1".into()));
    }
    if !(params.eav_noise > 0.0) || !(params.jam_noise > 0.0) {
        return Err(Error::Domain("noise levels must be positive".into()));
    }
    if !(params.grid_step > 0.0) {
        return Err(Error::Domain("grid_step must be positive".into()));
    }

    let targets = grid_targets(params.grid_half_extent, params.grid_step);
    let anchors = ring_anchors(params.anchor_count, params.anchor_radius);
    let mut rng = SeededRng::derived(params.seed, streams::CANDIDATES);
    let candidates: Vec<Point> = (0..params.candidate_count)
        .map(|_| params.region.sample(&mut rng))
        .collect();

    let nt = targets.len();
    let na = anchors.len();
    let n = candidates.len();
    let mut eav_links = Vec::with_capacity(nt);
    let mut anchor_los = Vec::with_capacity(nt);
    for (i, x) in targets.iter().enumerate() {
        let mut links = Vec::with_capacity(na * n);
        let mut inv_d2 = Vec::with_capacity(n);
        for (k, p) in candidates.iter().enumerate() {
            let d2 = checked_distance_sq(x, p, || format!("target {i} and candidate {k}"))?;
            inv_d2.push(1.0 / (d2 * params.eav_noise));
        }
        for j in 0..na {
            for (k, &lam) in inv_d2.iter().enumerate() {
                links.push(EavLink {
                    anchor: j,
                    candidate: k,
                    intensity: lam,
                });
            }
        }
        eav_links.push(links);

        let mut alinks = Vec::with_capacity(na);
        for (j, y) in anchors.iter().enumerate() {
            let d2 = checked_distance_sq(x, y, || format!("target {i} and anchor {j}"))?;
            alinks.push(AnchorLink {
                anchor: j,
                intensity: 1.0 / d2,
            });
        }
        anchor_los.push(alinks);
    }

    let mut gains = Vec::with_capacity(n);
    for (k, p) in candidates.iter().enumerate() {
        let mut row = Vec::with_capacity(na);
        for (j, y) in anchors.iter().enumerate() {
            let d2 = checked_distance_sq(p, y, || format!("candidate {k} and anchor {j}"))?;
            row.push(1.0 / d2);
        }
        gains.push(row);
    }

    let s = Scenario {
        prior: vec![1.0 / nt as f64; nt],
        targets,
        anchors,
        candidates,
        eav_links,
        anchor_los,
        anchor_nlos: vec![Vec::new(); nt],
        jam_channel_gain: gains,
        jam_powers: vec![params.jam_power; n],
        jam_noise: vec![params.jam_noise; na],
        power_budget: Some(params.power_budget.unwrap_or(params.jam_power * n as f64)),
    };
    s.validate()?;
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowingParams {
    pub eav_mean: f64,
    pub eav_var: f64,
    pub gain_mean: f64,
    pub gain_var: f64,
}

impl Default for ShadowingParams {
    /// Log-normal factors `exp(N(-2, 1))` on intensities and `exp(N(-2, 2))`
    /// on jammer gains.
    fn default() -> Self {
        Self {
            eav_mean: -2.0,
            eav_var: 1.0,
            gain_mean: -2.0,
            gain_var: 2.0,
        }
    }
}

/// Multiplies every link intensity (eavesdropping and anchor) and every
/// jammer gain by an independent log-normal factor. Mean and variance are
/// those of the underlying normal. Draw order: eavesdropping links by target
/// then link, anchor links by target then link, gains by candidate then
/// anchor.
pub fn apply_shadowing(s: &Scenario, seed: u64, p: &ShadowingParams) -> Result<Scenario> {
    if p.eav_var < 0.0 || p.gain_var < 0.0 {
        return Err(Error::Domain("shadowing variances must be nonnegative".into()));
    }
    let mut rng = SeededRng::derived(seed, streams::SHADOWING);
    let mut out = s.clone();
    for links in &mut out.eav_links {
        for link in links {
            link.intensity *= rng.log_normal(p.eav_mean, p.eav_var);
        }
    }
    for links in &mut out.anchor_los {
        for link in links {
            link.intensity *= rng.log_normal(p.eav_mean, p.eav_var);
        }
    }
    for row in &mut out.jam_channel_gain {
        for g in row {
            *g *= rng.log_normal(p.gain_mean, p.gain_var);
        }
    }
    Ok(out)
}

/// Normalized isotropic Gaussian weights `exp(-|x - center|^2 / (2 nu^2))`
/// over the given positions.
pub fn gaussian_like_prior(targets: &[Point], center: Point, nu: f64) -> Result<Vec<f64>> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("nu must be positive and finite, got {nu}")));
    }
    if targets.is_empty() {
        return Err(Error::Domain("no target positions".into()));
    }
    let expo: Vec<f64> = targets
        .iter()
        .map(|x| -x.distance_sq(&center) / (2.0 * nu * nu))
        .collect();
    let peak = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = expo.iter().map(|e| (e - peak).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Erroneous anchor knowledge: each anchor is displaced uniformly within
/// the square of half-width `r` around its true position, and the anchor
/// intensities and jammer gains are rescaled by the inverse-square distance
/// ratio. Multiplicative shadowing factors are kept. The input is not
/// modified.
pub fn perturb_anchor_knowledge(s: &Scenario, r: f64, seed: u64) -> Result<Scenario> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("perturbation radius must be nonnegative, got {r}")));
    }
    let mut out = s.clone();
    if r == 0.0 {
        return Ok(out);
    }
    let mut rng = SeededRng::derived(seed, streams::ANCHOR_PERTURBATION);
    for y in &mut out.anchors {
        y.x += rng.uniform_in(-r, r);
        y.y += rng.uniform_in(-r, r);
    }
    for (i, links) in out.anchor_los.iter_mut().enumerate() {
        let x = s.targets[i];
        for link in links {
            let old = x.distance_sq(&s.anchors[link.anchor]);
            let new = checked_distance_sq(&x, &out.anchors[link.anchor], || {
                format!("target {i} and perturbed anchor {}", link.anchor)
            })?;
            link.intensity *= old / new;
        }
    }
    for (k, row) in out.jam_channel_gain.iter_mut().enumerate() {
        let p = s.candidates[k];
        for (j, g) in row.iter_mut().enumerate() {
            let old = p.distance_sq(&s.anchors[j]);
            let new = checked_distance_sq(&p, &out.anchors[j], || {
                format!("candidate {k} and perturbed anchor {j}")
            })?;
            *g *= old / new;
        }
    }
    Ok(out)
}
