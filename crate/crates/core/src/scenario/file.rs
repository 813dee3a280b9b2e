//! JSON scenario documents.
//!
//! ```text
//! {
//!   "targets":    [[x, y], ...],
//!   "prior":      [w, ...],
//!   "anchors":    [[x, y], ...],
//!   "candidates": [[x, y], ...],
//!   "eav_los":    [[[anchor, candidate], ...] per target],
//!   "eav_intensity": [[target, anchor, candidate, lambda], ...],
//!   "jam_anchor_intensity": [[target, anchor, lambda], ...],
//!   "anchor_nlos": [[anchor, ...] per target],           (optional)
//!   "jam_channel_gain": [[gain per anchor] per candidate], (jam modes)
//!   "jam_powers": [p, ...],                                 (jam modes)
//!   "jam_noise":  [sigma2 per anchor],                      (jam modes)
//!   "power_budget": P                                       (optional)
//! }
//! ```
//!
//! LOS eavesdropping pairs without an `eav_intensity` entry have zero
//! intensity; intensity entries for pairs missing from `eav_los` are
//! rejected. Numbers are written in shortest round-trip form, so
//! `load(save(s)) == s` bit for bit.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnchorLink, EavLink, Point, Scenario};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub targets: Vec<Point>,
    pub prior: Vec<f64>,
    pub anchors: Vec<Point>,
    pub candidates: Vec<Point>,
    pub eav_los: Vec<Vec<(usize, usize)>>,
    pub eav_intensity: Vec<(usize, usize, usize, f64)>,
    pub jam_anchor_intensity: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_nlos: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub jam_channel_gain: Vec<Vec<f64>>,
    #[serde(default)]
    pub jam_powers: Vec<f64>,
    #[serde(default)]
    pub jam_noise: Vec<f64>,
    #[serde(default)]
    pub power_budget: Option<f64>,
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        let eav_los = s
            .eav_links
            .iter()
            .map(|links| links.iter().map(|l| (l.anchor, l.candidate)).collect())
            .collect();
        let eav_intensity = s
            .eav_links
            .iter()
            .enumerate()
            .flat_map(|(i, links)| {
                links
                    .iter()
                    .filter(|l| l.intensity != 0.0)
                    .map(move |l| (i, l.anchor, l.candidate, l.intensity))
            })
            .collect();
        let jam_anchor_intensity = s
            .anchor_los
            .iter()
            .enumerate()
            .flat_map(|(i, links)| links.iter().map(move |l| (i, l.anchor, l.intensity)))
            .collect();
        let anchor_nlos = s
            .anchor_nlos
            .iter()
            .any(|v| !v.is_empty())
            .then(|| s.anchor_nlos.clone());
        ScenarioFile {
            targets: s.targets.clone(),
            prior: s.prior.clone(),
            anchors: s.anchors.clone(),
            candidates: s.candidates.clone(),
            eav_los,
            eav_intensity,
            jam_anchor_intensity,
            anchor_nlos,
            jam_channel_gain: s.jam_channel_gain.clone(),
            jam_powers: s.jam_powers.clone(),
            jam_noise: s.jam_noise.clone(),
            power_budget: s.power_budget,
        }
    }
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(f: ScenarioFile) -> Result<Scenario> {
        let nt = f.targets.len();
        if f.eav_los.len() != nt {
            return Err(Error::validation(
                "eav_los",
                format!("has {} rows for {nt} targets", f.eav_los.len()),
            ));
        }
        let mut eav_links: Vec<Vec<EavLink>> = Vec::with_capacity(nt);
        let mut index: Vec<HashMap<(usize, usize), usize>> = Vec::with_capacity(nt);
        for (i, pairs) in f.eav_los.iter().enumerate() {
            let mut links = Vec::with_capacity(pairs.len());
            let mut map = HashMap::with_capacity(pairs.len());
            for &(j, k) in pairs {
                if map.insert((j, k), links.len()).is_some() {
                    return Err(Error::validation(
                        format!("eav_los[{i}]"),
                        format!("pair ({j}, {k}) listed twice"),
                    ));
                }
                links.push(EavLink {
                    anchor: j,
                    candidate: k,
                    intensity: 0.0,
                });
            }
            eav_links.push(links);
            index.push(map);
        }
        for (e, &(i, j, k, lam)) in f.eav_intensity.iter().enumerate() {
            let slot = index
                .get(i)
                .and_then(|m| m.get(&(j, k)))
                .ok_or_else(|| {
                    Error::validation(
                        format!("eav_intensity[{e}]"),
                        format!("(target {i}, anchor {j}, candidate {k}) is not a LOS pair in eav_los"),
                    )
                })?;
            eav_links[i][*slot].intensity = lam;
        }

        let mut anchor_los = vec![Vec::new(); nt];
        for (e, &(i, j, lam)) in f.jam_anchor_intensity.iter().enumerate() {
            if i >= nt {
                return Err(Error::validation(
                    format!("jam_anchor_intensity[{e}]"),
                    format!("target index {i} out of range"),
                ));
            }
            anchor_los[i].push(AnchorLink {
                anchor: j,
                intensity: lam,
            });
        }
        let anchor_nlos = match f.anchor_nlos {
            Some(v) => v,
            None => vec![Vec::new(); nt],
        };

        let s = Scenario {
            targets: f.targets,
            prior: f.prior,
            anchors: f.anchors,
            candidates: f.candidates,
            eav_links,
            anchor_los,
            anchor_nlos,
            jam_channel_gain: f.jam_channel_gain,
            jam_powers: f.jam_powers,
            jam_noise: f.jam_noise,
            power_budget: f.power_budget,
        };
        s.validate()?;
        Ok(s)
    }
}

impl Scenario {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ScenarioFile::from(self)).expect("scenario serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "<string>".into(),
            source: e,
        })?;
        Scenario::try_from(file)
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        source: e,
    })?;
    Scenario::try_from(file)
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, s.to_json()).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{apply_shadowing, generate_paper_scenario, GeneratorParams, ShadowingParams};

    #[test]
    fn round_trip_is_exact() {
        let s = generate_paper_scenario(&GeneratorParams::desk().with_seed(2)).unwrap();
        let s = apply_shadowing(&s, 2, &ShadowingParams::default()).unwrap();
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), s.to_json());
    }

    #[test]
    fn intensity_outside_los_rejected() {
        let text = r#"{"targets":[[0,0]],"prior":[1],"anchors":[[1,0]],"candidates":[[5,5]],
            "eav_los":[[]],"eav_intensity":[[0,0,0,1.0]],"jam_anchor_intensity":[]}"#;
        match Scenario::from_json(text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "eav_intensity[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_prior_names_field() {
        let text = r#"{"targets":[[0,0]],"prior":[0.9],"anchors":[[1,0]],"candidates":[[5,5]],
            "eav_los":[[[0,0]]],"eav_intensity":[[0,0,0,1.0]],"jam_anchor_intensity":[]}"#;
        match Scenario::from_json(text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "prior"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_a_schema_error() {
        let text = r#"{"targets":[[0,0]],"prior":[1],"anchors":[],"candidates":[[5,5]],
            "eav_los":[[]],"eav_intensity":[],"jam_anchor_intensity":[],"bogus":1}"#;
        assert!(matches!(Scenario::from_json(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn los_pair_without_intensity_is_zero() {
        let text = r#"{"targets":[[0,0]],"prior":[1],"anchors":[[1,0]],"candidates":[[5,5]],
            "eav_los":[[[0,0]]],"eav_intensity":[],"jam_anchor_intensity":[[0,0,2.5]]}"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.eav_links[0][0].intensity, 0.0);
        assert_eq!(s.anchor_los[0][0].intensity, 2.5);
    }
}
