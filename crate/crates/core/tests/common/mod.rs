//! Random instances shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nodesel::rng::SeededRng;
use nodesel::scenario::{AnchorLink, EavLink};
use nodesel::{Point, Scenario};

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub candidates: usize,
    pub targets: usize,
    pub anchors: usize,
    /// Probability that a link is LOS.
    pub los: f64,
}

impl Shape {
    pub const fn new(candidates: usize, targets: usize, anchors: usize) -> Self {
        Self {
            candidates,
            targets,
            anchors,
            los: 1.0,
        }
    }
}

fn polar(r: f64, a: f64) -> Point {
    Point::new(r * a.cos(), r * a.sin())
}

/// Random geometry with intensities `c / d^2` times a factor in `[0.5, 2]`,
/// random jammer powers in `[1, 10]` and a random prior.
pub fn random_scenario(seed: u64, shape: Shape) -> Scenario {
    let mut rng = SeededRng::new(seed);
    let targets: Vec<Point> = (0..shape.targets)
        .map(|_| Point::new(rng.uniform_in(-10.0, 10.0), rng.uniform_in(-10.0, 10.0)))
        .collect();
    let anchors: Vec<Point> = (0..shape.anchors)
        .map(|j| polar(18.0, 2.0 * PI * (j as f64 + rng.uniform_in(-0.3, 0.3)) / shape.anchors as f64))
        .collect();
    let candidates: Vec<Point> = (0..shape.candidates)
        .map(|_| polar(rng.uniform_in(22.0, 45.0), rng.uniform_in(0.0, 2.0 * PI)))
        .collect();
    let mut raw: Vec<f64> = (0..shape.targets).map(|_| rng.uniform_in(0.2, 1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter_mut().for_each(|w| *w /= total);

    let mut eav_links = Vec::new();
    let mut anchor_los = Vec::new();
    let mut anchor_nlos = Vec::new();
    for x in &targets {
        let mut links = Vec::new();
        for j in 0..shape.anchors {
            for (k, p) in candidates.iter().enumerate() {
                if rng.uniform() < shape.los {
                    links.push(EavLink {
                        anchor: j,
                        candidate: k,
                        intensity: 100.0 / x.distance_sq(p) * rng.uniform_in(0.5, 2.0),
                    });
                }
            }
        }
        eav_links.push(links);
        let mut los = Vec::new();
        let mut nlos = Vec::new();
        for (j, y) in anchors.iter().enumerate() {
            if rng.uniform() < shape.los {
                los.push(AnchorLink {
                    anchor: j,
                    intensity: 100.0 / x.distance_sq(y) * rng.uniform_in(0.5, 2.0),
                });
            } else {
                nlos.push(j);
            }
        }
        anchor_los.push(los);
        anchor_nlos.push(nlos);
    }
    let jam_channel_gain = candidates
        .iter()
        .map(|p| anchors.iter().map(|y| 100.0 / p.distance_sq(y) * rng.uniform_in(0.5, 2.0)).collect())
        .collect();
    let jam_powers = (0..shape.candidates).map(|_| rng.uniform_in(1.0, 10.0)).collect();
    let jam_noise = (0..shape.anchors).map(|_| rng.uniform_in(0.5, 1.5)).collect();
    let s = Scenario {
        targets,
        prior: raw,
        anchors,
        candidates,
        eav_links,
        anchor_los,
        anchor_nlos,
        jam_channel_gain,
        jam_powers,
        jam_noise,
        power_budget: None,
    };
    s.validate().expect("random scenario is valid");
    s
}

/// One target at the origin, one anchor, candidates at the given bearings
/// (distance 1) with the given intensities.
pub fn bearing_scenario(angles: &[f64], intensities: &[f64]) -> Scenario {
    let candidates: Vec<Point> = angles.iter().map(|a| Point::new(-a.cos(), -a.sin())).collect();
    let links = intensities
        .iter()
        .enumerate()
        .map(|(k, &l)| EavLink {
            anchor: 0,
            candidate: k,
            intensity: l,
        })
        .collect();
    Scenario {
        targets: vec![Point::new(0.0, 0.0)],
        prior: vec![1.0],
        anchors: vec![Point::new(5.0, 0.0)],
        candidates,
        eav_links: vec![links],
        anchor_los: vec![vec![AnchorLink {
            anchor: 0,
            intensity: 1.0,
        }]],
        anchor_nlos: vec![vec![]],
        jam_channel_gain: vec![vec![0.1]; angles.len()],
        jam_powers: vec![1.0; angles.len()],
        jam_noise: vec![1.0],
        power_budget: None,
    }
}

/// Random weights in `[0, 1]` with at least `min_active` entries in `[0.05, 1]`.
pub fn random_weights(rng: &mut SeededRng, n: usize, min_active: usize) -> Vec<f64> {
    let mut z: Vec<f64> = (0..n)
        .map(|_| match rng.index(3) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.uniform(),
        })
        .collect();
    for k in rng.sample_without_replacement(n, min_active.min(n)) {
        if z[k] < 0.05 {
            z[k] = rng.uniform_in(0.05, 1.0);
        }
    }
    z
}

/// Random interior point of `[0.1, 0.9]^n`.
pub fn interior(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.uniform_in(0.1, 0.9)).collect()
}

/// All ascending `m`-subsets of `0..n` as 0/1 vectors, lexicographic.
pub fn all_subsets(n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..m).collect();
    loop {
        let mut z = vec![0.0; n];
        c.iter().for_each(|&k| z[k] = 1.0);
        out.push(z);
        let mut i = m;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if c[i] < n - m + i {
                c[i] += 1;
                for j in i + 1..m {
                    c[j] = c[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return out;
        }
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
