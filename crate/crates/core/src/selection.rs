use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    Binary,
    Relaxed,
}

/// Occupancy weights over the candidate positions: 0/1 in binary mode,
/// anywhere in `[0, 1]` in relaxed mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionVector {
    weights: Vec<f64>,
    mode: SelectionMode,
}

impl SelectionVector {
    pub fn binary_from_mask(mask: &[bool]) -> Self {
        Self {
            weights: mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            mode: SelectionMode::Binary,
        }
    }

    pub fn binary_from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut weights = vec![0.0; n];
        for &k in indices {
            if k >= n {
                return Err(Error::Domain(format!("index {k} out of range for {n} candidates")));
            }
            weights[k] = 1.0;
        }
        Ok(Self {
            weights,
            mode: SelectionMode::Binary,
        })
    }

    pub fn binary(weights: Vec<f64>) -> Result<Self> {
        if let Some(k) = weights.iter().position(|&w| w != 0.0 && w != 1.0) {
            return Err(Error::Domain(format!(
                "binary selection has entry {} at index {k}",
                weights[k]
            )));
        }
        Ok(Self {
            weights,
            mode: SelectionMode::Binary,
        })
    }

    pub fn relaxed(weights: Vec<f64>) -> Result<Self> {
        if let Some(k) = weights
            .iter()
            .position(|&w| !(0.0..=1.0).contains(&w) || w.is_nan())
        {
            return Err(Error::Domain(format!(
                "relaxed selection has entry {} outside [0, 1] at index {k}",
                weights[k]
            )));
        }
        Ok(Self {
            weights,
            mode: SelectionMode::Relaxed,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            weights: vec![0.0; n],
            mode: SelectionMode::Binary,
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            weights: vec![1.0; n],
            mode: SelectionMode::Binary,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mode(&self) -> SelectionMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Indices with weight 1 (binary) or positive weight (relaxed).
    pub fn selected(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn mask(&self) -> Vec<bool> {
        self.weights.iter().map(|&w| w > 0.5).collect()
    }

    /// `1 - z`, used for the eavesdropper half of a joint selection.
    pub fn complement(&self) -> Self {
        Self {
            weights: self.weights.iter().map(|w| 1.0 - w).collect(),
            mode: self.mode,
        }
    }
}

impl AsRef<[f64]> for SelectionVector {
    fn as_ref(&self) -> &[f64] {
        &self.weights
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_rejects_fractional() {
        assert!(SelectionVector::binary(vec![1.0, 0.5]).is_err());
        assert!(SelectionVector::binary(vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn relaxed_rejects_out_of_box() {
        assert!(SelectionVector::relaxed(vec![1.1]).is_err());
        assert!(SelectionVector::relaxed(vec![-0.1]).is_err());
        assert!(SelectionVector::relaxed(vec![f64::NAN]).is_err());
        assert!(SelectionVector::relaxed(vec![0.3, 1.0]).is_ok());
    }

    #[test]
    fn indices_round_trip() {
        let z = SelectionVector::binary_from_indices(5, &[4, 1]).unwrap();
        assert_eq!(z.selected(), vec![1, 4]);
        assert_eq!(z.complement().selected(), vec![0, 2, 3]);
        assert!(SelectionVector::binary_from_indices(3, &[3]).is_err());
    }
}
