//! Network description shared by every metric and solver.
//!
//! A [`Scenario`] is immutable once validated. Generators and transforms
//! ([`generate`], [`crate::select::robust`]) always return a new value.

mod file;
pub mod generate;
mod uncertainty;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{load_scenario, save_scenario, ScenarioFile};
pub use generate::{
    apply_shadowing, gaussian_like_prior, generate_paper_scenario, perturb_anchor_knowledge,
    GeneratorParams, RingRegion, ShadowingParams,
};
pub use uncertainty::UncertaintyModel;

/// 2-D position in meters. Serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    /// Angle of the unit vector pointing from `from` to `self`.
    pub fn bearing_from(&self, from: &Point) -> f64 {
        (self.y - from.y).atan2(self.x - from.x)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// A line-of-sight eavesdropping link of one target: the signal sent to
/// `anchor` is overheard by a node at `candidate` with Fisher intensity
/// `intensity` (the effective ranging intensity lambda).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EavLink {
    pub anchor: usize,
    pub candidate: usize,
    pub intensity: f64,
}

/// A line-of-sight target-to-anchor link seen by the localization network,
/// with unjammed Fisher intensity `intensity`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnchorLink {
    pub anchor: usize,
    pub intensity: f64,
}

/// Which selection problem a scenario is being used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Eav,
    Jam,
    Joint,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Eav => "eav",
            Mode::Jam => "jam",
            Mode::Joint => "joint",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eav" => Ok(Mode::Eav),
            "jam" => Ok(Mode::Jam),
            "joint" => Ok(Mode::Joint),
            other => Err(Error::Domain(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub targets: Vec<Point>,
    pub prior: Vec<f64>,
    pub anchors: Vec<Point>,
    pub candidates: Vec<Point>,
    /// Per target, the LOS eavesdropping links. Pairs absent here are NLOS
    /// and carry no position information.
    pub eav_links: Vec<Vec<EavLink>>,
    /// Per target, the LOS anchors with their intensities.
    pub anchor_los: Vec<Vec<AnchorLink>>,
    /// Per target, connected anchors without a LOS path.
    pub anchor_nlos: Vec<Vec<usize>>,
    /// `[candidate][anchor]` jammer-to-anchor power gain.
    pub jam_channel_gain: Vec<Vec<f64>>,
    pub jam_powers: Vec<f64>,
    /// Per-anchor measurement noise power.
    pub jam_noise: Vec<f64>,
    /// Total jammer power budget; `None` means unconstrained.
    pub power_budget: Option<f64>,
}

const PRIOR_SUM_TOL: f64 = 1e-12;

fn check_nonneg(field: impl Fn() -> String, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::validation(field(), format!("must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

impl Scenario {
    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn num_anchors(&self) -> usize {
        self.anchors.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Checks the invariants that hold for every mode.
    pub fn validate(&self) -> Result<()> {
        let nt = self.num_targets();
        let na = self.num_anchors();
        let n = self.num_candidates();
        if nt == 0 {
            return Err(Error::validation("targets", "at least one target is required"));
        }
        if n == 0 {
            return Err(Error::validation("candidates", "at least one candidate is required"));
        }
        for (name, pts) in [
            ("targets", &self.targets),
            ("anchors", &self.anchors),
            ("candidates", &self.candidates),
        ] {
            if let Some(i) = pts.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(Error::validation(format!("{name}[{i}]"), "coordinates must be finite"));
            }
        }
        if self.prior.len() != nt {
            return Err(Error::validation(
                "prior",
                format!("length {} does not match {} targets", self.prior.len(), nt),
            ));
        }
        for (i, &w) in self.prior.iter().enumerate() {
            check_nonneg(|| format!("prior[{i}]"), w)?;
        }
        let sum: f64 = self.prior.iter().sum();
        if (sum - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::validation("prior", format!("must sum to 1, sums to {sum}")));
        }

        for (name, len) in [
            ("eav_links", self.eav_links.len()),
            ("anchor_los", self.anchor_los.len()),
            ("anchor_nlos", self.anchor_nlos.len()),
        ] {
            if len != nt {
                return Err(Error::validation(name, format!("has {len} rows for {nt} targets")));
            }
        }
        for (i, links) in self.eav_links.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            for (l, link) in links.iter().enumerate() {
                let field = || format!("eav_intensity[target {i}, link {l}]");
                if link.anchor >= na || link.candidate >= n {
                    return Err(Error::validation(field(), "anchor or candidate index out of range"));
                }
                if !seen.insert((link.anchor, link.candidate)) {
                    return Err(Error::validation(field(), "duplicate (anchor, candidate) pair"));
                }
                check_nonneg(field, link.intensity)?;
            }
        }
        for (i, (los, nlos)) in self.anchor_los.iter().zip(&self.anchor_nlos).enumerate() {
            let mut seen = std::collections::HashSet::new();
            for link in los {
                let field = || format!("jam_anchor_intensity[target {i}, anchor {}]", link.anchor);
                if link.anchor >= na {
                    return Err(Error::validation(field(), "anchor index out of range"));
                }
                if !seen.insert(link.anchor) {
                    return Err(Error::validation(field(), "anchor listed twice"));
                }
                check_nonneg(field, link.intensity)?;
            }
            for &j in nlos {
                if j >= na || !seen.insert(j) {
                    return Err(Error::validation(
                        format!("anchor_nlos[{i}]"),
                        format!("anchor {j} out of range or already connected"),
                    ));
                }
            }
        }

        if !self.jam_channel_gain.is_empty() {
            if self.jam_channel_gain.len() != n {
                return Err(Error::validation(
                    "jam_channel_gain",
                    format!("has {} rows for {n} candidates", self.jam_channel_gain.len()),
                ));
            }
            for (k, row) in self.jam_channel_gain.iter().enumerate() {
                if row.len() != na {
                    return Err(Error::validation(
                        format!("jam_channel_gain[{k}]"),
                        format!("has {} entries for {na} anchors", row.len()),
                    ));
                }
                for (j, &g) in row.iter().enumerate() {
                    check_nonneg(|| format!("jam_channel_gain[{k}][{j}]"), g)?;
                }
            }
        }
        if !self.jam_powers.is_empty() {
            if self.jam_powers.len() != n {
                return Err(Error::validation(
                    "jam_powers",
                    format!("length {} does not match {n} candidates", self.jam_powers.len()),
                ));
            }
            for (k, &p) in self.jam_powers.iter().enumerate() {
                check_nonneg(|| format!("jam_powers[{k}]"), p)?;
            }
        }
        if !self.jam_noise.is_empty() {
            if self.jam_noise.len() != na {
                return Err(Error::validation(
                    "jam_noise",
                    format!("length {} does not match {na} anchors", self.jam_noise.len()),
                ));
            }
            for (j, &s) in self.jam_noise.iter().enumerate() {
                if !s.is_finite() || s <= 0.0 {
                    return Err(Error::validation(
                        format!("jam_noise[{j}]"),
                        format!("must be finite and positive, got {s}"),
                    ));
                }
            }
        }
        if let Some(b) = self.power_budget {
            check_nonneg(|| "power_budget".into(), b)?;
        }
        Ok(())
    }

    /// Checks that the data a mode needs is present.
    pub fn validate_for(&self, mode: Mode) -> Result<()> {
        self.validate()?;
        let n = self.num_candidates();
        let na = self.num_anchors();
        let needs_jam = matches!(mode, Mode::Jam | Mode::Joint);
        if needs_jam {
            if self.jam_powers.len() != n {
                return Err(Error::validation("jam_powers", "required for jammer selection"));
            }
            if self.jam_noise.len() != na {
                return Err(Error::validation("jam_noise", "required for jammer selection"));
            }
            if self.jam_channel_gain.len() != n {
                return Err(Error::validation("jam_channel_gain", "required for jammer selection"));
            }
        }
        Ok(())
    }

    /// Copy with every eavesdropping intensity multiplied by `factor`.
    pub fn with_eav_scaled(&self, factor: f64) -> Scenario {
        let mut s = self.clone();
        for links in &mut s.eav_links {
            for link in links {
                link.intensity *= factor;
            }
        }
        s
    }

    pub fn with_prior(&self, prior: Vec<f64>) -> Result<Scenario> {
        let mut s = self.clone();
        s.prior = prior;
        s.validate()?;
        Ok(s)
    }

    /// Sum of the jammer powers of the `m` cheapest candidates.
    pub fn min_jam_power(&self, m: usize) -> f64 {
        let mut p = self.jam_powers.clone();
        p.sort_by(f64::total_cmp);
        p.iter().take(m).sum()
    }
}
