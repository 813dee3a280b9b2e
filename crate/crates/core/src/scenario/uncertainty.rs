use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Scenario;
use crate::error::{Error, Result};

/// Half-widths of the box of intensity errors. Missing entries are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UncertaintyModel {
    /// `(target, anchor, candidate) -> delta` for eavesdropping links.
    pub eav_delta: BTreeMap<(usize, usize, usize), f64>,
    /// `(target, anchor) -> delta` for anchor links.
    pub jam_delta: BTreeMap<(usize, usize), f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UncertaintyFile {
    #[serde(default)]
    eav_delta: Vec<(usize, usize, usize, f64)>,
    #[serde(default)]
    jam_delta: Vec<(usize, usize, f64)>,
}

impl UncertaintyModel {
    /// `delta = eps[i] * lambda` on every eavesdropping link of target `i`
    /// and `delta = kappa[i] * lambda` on every anchor link.
    pub fn relative(s: &Scenario, eps: &[f64], kappa: &[f64]) -> Result<Self> {
        let nt = s.num_targets();
        if eps.len() != nt || kappa.len() != nt {
            return Err(Error::validation(
                "uncertainty",
                format!("need {nt} per-target factors, got {} and {}", eps.len(), kappa.len()),
            ));
        }
        let mut m = UncertaintyModel::default();
        for (i, links) in s.eav_links.iter().enumerate() {
            for l in links {
                m.eav_delta.insert((i, l.anchor, l.candidate), eps[i] * l.intensity);
            }
        }
        for (i, links) in s.anchor_los.iter().enumerate() {
            for l in links {
                m.jam_delta.insert((i, l.anchor), kappa[i] * l.intensity);
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (&(i, j, k), &d) in &self.eav_delta {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::validation(
                    format!("eav_delta[{i},{j},{k}]"),
                    format!("must be finite and nonnegative, got {d}"),
                ));
            }
        }
        for (&(i, j), &d) in &self.jam_delta {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::validation(
                    format!("jam_delta[{i},{j}]"),
                    format!("must be finite and nonnegative, got {d}"),
                ));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            eav_delta: self.eav_delta.iter().map(|(k, v)| (*k, v * factor)).collect(),
            jam_delta: self.jam_delta.iter().map(|(k, v)| (*k, v * factor)).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: UncertaintyFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "<string>".into(),
            source: e,
        })?;
        let m = Self {
            eav_delta: f.eav_delta.into_iter().map(|(i, j, k, d)| ((i, j, k), d)).collect(),
            jam_delta: f.jam_delta.into_iter().map(|(i, j, d)| ((i, j), d)).collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let f = UncertaintyFile {
            eav_delta: self.eav_delta.iter().map(|(&(i, j, k), &d)| (i, j, k, d)).collect(),
            jam_delta: self.jam_delta.iter().map(|(&(i, j), &d)| (i, j, d)).collect(),
        };
        serde_json::to_string(&f).expect("uncertainty serialization is infallible")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { source, .. } => Error::Parse {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures::bearing_fixture;

    #[test]
    fn relative_model_and_round_trip() {
        let s = bearing_fixture(&[0.0, 1.0, 2.0]);
        let m = UncertaintyModel::relative(&s, &[0.5], &[0.3]).unwrap();
        assert_eq!(m.eav_delta[&(0, 0, 1)], 0.5);
        assert_eq!(m.jam_delta[&(0, 0)], 0.3);
        assert_eq!(UncertaintyModel::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn negative_delta_rejected() {
        assert!(UncertaintyModel::from_json(r#"{"jam_delta":[[0,0,-1.0]]}"#).is_err());
    }
}
