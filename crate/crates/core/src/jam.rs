//! Anchor-side jammed CRLB objective `f~(z)`.
//!
//! Jammers raise the noise floor of every anchor:
//! `den_j = sigma~_j^2 + sum_k q_k |gamma_kj|^2` with load `q_k = z_k P_k`.
//! Target `i` sees the 2x2 EFIM `J_i = sum_j g_ij phi_ij phi_ij^T` over its
//! LOS anchors, `g_ij = lambda~_ij / den_j`.

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::SINGULAR_TOL;

/// 2x2 EFIM of one target together with its link weights.
#[derive(Clone, Debug, PartialEq)]
pub struct JamEfim2 {
    /// `[[xx, xy], [xy, yy]]`.
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
    /// `(anchor, g_ij)` per LOS anchor.
    pub weights: Vec<(usize, f64)>,
}

impl JamEfim2 {
    fn is_singular(&self) -> bool {
        let tr = self.xx + self.yy;
        !(tr > 0.0) || self.xx * self.yy - self.xy * self.xy <= SINGULAR_TOL * tr * tr
    }

    /// Trace of the inverse, `+inf` when singular.
    pub fn crlb(&self) -> f64 {
        if self.is_singular() {
            return f64::INFINITY;
        }
        (self.xx + self.yy) / (self.xx * self.yy - self.xy * self.xy)
    }

    /// `[[a, b], [b, d]]` of the inverse.
    pub fn inverse(&self) -> Result<[f64; 3]> {
        if self.is_singular() {
            return Err(Error::Singular);
        }
        let det = self.xx * self.yy - self.xy * self.xy;
        Ok([self.yy / det, -self.xy / det, self.xx / det])
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * (self.xx + self.yy);
        let half = 0.5 * (self.xx - self.yy);
        mean - (half * half + self.xy * self.xy).sqrt()
    }
}

#[derive(Clone, Debug)]
struct Term {
    anchor: usize,
    intensity: f64,
    cos: f64,
    sin: f64,
}

/// Precomputed jammer-side data for repeated evaluation.
#[derive(Clone, Debug)]
pub struct JamModel {
    n: usize,
    weights: Vec<f64>,
    terms: Vec<Vec<Term>>,
    /// `[candidate][anchor]`.
    gain: Vec<Vec<f64>>,
    powers: Vec<f64>,
    noise: Vec<f64>,
}

impl JamModel {
    /// Requires the jammer fields; see [`Scenario::validate_for`].
    pub fn new(s: &Scenario) -> Result<Self> {
        s.validate_for(crate::scenario::Mode::Jam)?;
        let terms = s
            .anchor_los
            .iter()
            .enumerate()
            .map(|(i, links)| {
                links
                    .iter()
                    .filter(|l| l.intensity > 0.0)
                    .map(|l| {
                        let phi = s.anchors[l.anchor].bearing_from(&s.targets[i]);
                        Term {
                            anchor: l.anchor,
                            intensity: l.intensity,
                            cos: phi.cos(),
                            sin: phi.sin(),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            n: s.num_candidates(),
            weights: s.prior.clone(),
            terms,
            gain: s.jam_channel_gain.clone(),
            powers: s.jam_powers.clone(),
            noise: s.jam_noise.clone(),
        })
    }

    pub fn num_candidates(&self) -> usize {
        self.n
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// Load `q = z o P`.
    pub fn load(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n, "selection vector length");
        z.iter().zip(&self.powers).map(|(a, b)| a * b).collect()
    }

    /// Per-anchor denominators `sigma~_j^2 + sum_k q_k |gamma_kj|^2`.
    pub fn denominators(&self, load: &[f64]) -> Vec<f64> {
        assert_eq!(load.len(), self.n, "load vector length");
        let mut den = self.noise.clone();
        for (k, &q) in load.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            for (d, g) in den.iter_mut().zip(&self.gain[k]) {
                *d += q * g;
            }
        }
        den
    }

    fn efim_with(&self, i: usize, den: &[f64]) -> JamEfim2 {
        let mut e = JamEfim2 {
            xx: 0.0,
            xy: 0.0,
            yy: 0.0,
            weights: Vec::with_capacity(self.terms[i].len()),
        };
        for t in &self.terms[i] {
            let g = t.intensity / den[t.anchor];
            e.xx += g * t.cos * t.cos;
            e.xy += g * t.cos * t.sin;
            e.yy += g * t.sin * t.sin;
            e.weights.push((t.anchor, g));
        }
        e
    }

    /// `g_ij(z)`; zero for anchors without LOS to target `i`.
    pub fn link_weight(&self, i: usize, j: usize, z: &[f64]) -> f64 {
        let den = self.denominators(&self.load(z));
        self.terms[i]
            .iter()
            .find(|t| t.anchor == j)
            .map_or(0.0, |t| t.intensity / den[j])
    }

    pub fn efim(&self, i: usize, z: &[f64]) -> JamEfim2 {
        self.efim_with(i, &self.denominators(&self.load(z)))
    }

    pub fn crlb(&self, i: usize, z: &[f64]) -> f64 {
        self.efim(i, z).crlb()
    }

    fn objective_with(&self, den: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let v = self.efim_with(i, den).crlb();
            if v == f64::INFINITY {
                return f64::INFINITY;
            }
            total += w * v;
        }
        total
    }

    /// `f~(z) = sum_i w_i tr(J_i(z)^-1)`.
    pub fn objective(&self, z: &[f64]) -> f64 {
        self.objective_power(&self.load(z))
    }

    /// `f~` as a function of the per-candidate jamming power `q`.
    pub fn objective_power(&self, q: &[f64]) -> f64 {
        self.objective_with(&self.denominators(q))
    }

    /// Gradient of [`Self::objective_power`] with respect to `q`.
    pub fn value_and_gradient_power(&self, q: &[f64]) -> Result<(f64, Vec<f64>)> {
        let den = self.denominators(q);
        let mut h = vec![0.0; den.len()];
        let mut value = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let e = self.efim_with(i, &den);
            let [a, b, d] = e.inverse()?;
            value += w * e.crlb();
            for t in &self.terms[i] {
                let u0 = a * t.cos + b * t.sin;
                let u1 = b * t.cos + d * t.sin;
                h[t.anchor] += w * t.intensity * (u0 * u0 + u1 * u1) / (den[t.anchor] * den[t.anchor]);
            }
        }
        let g = self
            .gain
            .iter()
            .map(|row| row.iter().zip(&h).map(|(g, h)| g * h).sum())
            .collect();
        Ok((value, g))
    }

    pub fn value_and_gradient(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (v, gq) = self.value_and_gradient_power(&self.load(z))?;
        Ok((v, gq.iter().zip(&self.powers).map(|(g, p)| g * p).collect()))
    }

    pub fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.value_and_gradient(z).map(|(_, g)| g)
    }
}

pub fn link_weight(s: &Scenario, i: usize, j: usize, z: impl AsRef<[f64]>) -> Result<f64> {
    Ok(JamModel::new(s)?.link_weight(i, j, z.as_ref()))
}

pub fn crlb(s: &Scenario, i: usize, z: impl AsRef<[f64]>) -> Result<f64> {
    Ok(JamModel::new(s)?.crlb(i, z.as_ref()))
}

pub fn objective(s: &Scenario, z: impl AsRef<[f64]>) -> Result<f64> {
    Ok(JamModel::new(s)?.objective(z.as_ref()))
}

pub fn objective_power(s: &Scenario, q: &[f64]) -> Result<f64> {
    if let Some(v) = q.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Domain(format!("jamming powers must be nonnegative, got {v}")));
    }
    Ok(JamModel::new(s)?.objective_power(q))
}

pub fn gradient(s: &Scenario, z: impl AsRef<[f64]>) -> Result<Vec<f64>> {
    JamModel::new(s)?.gradient(z.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures::two_anchor_fixture;

    #[test]
    fn link_weight_examples() {
        let s = two_anchor_fixture(&[(10.0, 0.1, 0.1)]);
        let m = JamModel::new(&s).unwrap();
        assert_eq!(m.link_weight(0, 0, &[0.0]), 1.0);
        assert!((m.link_weight(0, 0, &[1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn crlb_examples() {
        let s = two_anchor_fixture(&[(10.0, 0.1, 0.1)]);
        let m = JamModel::new(&s).unwrap();
        assert!((m.crlb(0, &[0.0]) - 2.0).abs() < 1e-14);
        assert!((m.crlb(0, &[1.0]) - 4.0).abs() < 1e-13);
        let mut one = s.clone();
        one.anchor_los[0].pop();
        assert_eq!(JamModel::new(&one).unwrap().crlb(0, &[0.0]), f64::INFINITY);
    }

    #[test]
    fn zero_power_gives_zero_gradient_entry() {
        let s = two_anchor_fixture(&[(10.0, 0.1, 0.3), (0.0, 0.5, 0.5)]);
        let g = gradient(&s, [0.5, 0.5]).unwrap();
        assert!(g[0] > 0.0);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn power_form_matches_selection_form() {
        let s = two_anchor_fixture(&[(10.0, 0.1, 0.3), (4.0, 0.5, 0.2)]);
        let m = JamModel::new(&s).unwrap();
        let z = [0.3, 1.0];
        assert_eq!(m.objective(&z), m.objective_power(&[3.0, 4.0]));
        assert_eq!(m.objective_power(&[0.0, 0.0]), m.objective(&[0.0, 0.0]));
    }

    #[test]
    fn missing_powers_rejected() {
        let mut s = two_anchor_fixture(&[(10.0, 0.1, 0.3)]);
        s.jam_powers.clear();
        assert!(matches!(JamModel::new(&s), Err(Error::Validation { .. })));
    }
}
