//! Eavesdropper-side CRLB objective `f(z)`.
//!
//! For target `i`, candidate `k` contributes the aggregated intensity
//! `lbar_ik = sum_j lambda_ijk` over its LOS links and the bearing `phi_ik`
//! of the target seen from the candidate. With `a_k = z_k lbar_ik` and
//! `p_kl = sin^2((phi_k - phi_l)/2)` the CRLB is `p~ / r~`, where
//!
//! ```text
//! p~ = 3 sum_{k,l} a_k a_l p_kl
//! r~ = 4 sum_{k,l,m} a_k a_l a_m p_kl p_lm p_mk
//! ```
//!
//! The 3x3 information matrix over `(x, y, clock offset)` is
//! `J3 = sum_k a_k q_k q_k^T` with `q_k = (cos phi_k, sin phi_k, 1)`; the
//! CRLB is the trace of the inverse of its Schur complement onto the
//! position block. Both routes are exposed; they agree to rounding.

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::{SINGULAR_TOL, SPEED_OF_LIGHT};

/// `sin^2((phi_a - phi_b) / 2)`.
pub fn pairwise_angle_factor(phi_a: f64, phi_b: f64) -> f64 {
    let s = ((phi_a - phi_b) * 0.5).sin();
    s * s
}

/// Effective ranging intensity `(8 pi beta^2 / c^2)(1 - chi) SNR`.
pub fn lambda_from_signal(beta_sq: f64, snr1: f64, chi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&chi) {
        return Err(Error::Domain(format!("path overlap coefficient must lie in [0, 1], got {chi}")));
    }
    if !(beta_sq >= 0.0) || !(snr1 >= 0.0) {
        return Err(Error::Domain(format!(
            "bandwidth and SNR must be nonnegative, got {beta_sq} and {snr1}"
        )));
    }
    Ok(8.0 * std::f64::consts::PI * beta_sq / (SPEED_OF_LIGHT * SPEED_OF_LIGHT) * (1.0 - chi) * snr1)
}

/// `|alpha|^2 E / (2 sigma^2)`.
pub fn snr_from_channel(alpha_sq: f64, energy: f64, noise_psd: f64) -> Result<f64> {
    if !(noise_psd > 0.0) {
        return Err(Error::Domain(format!("noise spectral density must be positive, got {noise_psd}")));
    }
    Ok(alpha_sq * energy / (2.0 * noise_psd))
}

/// Entries of the 3x3 information matrix
///
/// ```text
/// [ K D C ]
/// [ D E S ]
/// [ C S T ]
/// ```
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EavFim3 {
    pub k: f64,
    pub d: f64,
    pub c: f64,
    pub e: f64,
    pub s: f64,
    pub t: f64,
}

impl EavFim3 {
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.k, self.d, self.c],
            [self.d, self.e, self.s],
            [self.c, self.s, self.t],
        ]
    }

    /// Position block after eliminating the clock offset, `[[a, b], [b, d]]`.
    /// `None` when `T = 0`.
    pub fn schur(&self) -> Option<[f64; 3]> {
        if !(self.t > 0.0) {
            return None;
        }
        Some([
            self.k - self.c * self.c / self.t,
            self.d - self.c * self.s / self.t,
            self.e - self.s * self.s / self.t,
        ])
    }

    fn is_singular(&self) -> bool {
        schur_singular(self.schur(), self.t)
    }

    /// Trace of the inverse Schur complement, `+inf` when singular.
    pub fn crlb(&self) -> f64 {
        schur_crlb(self.schur(), self.t)
    }

    pub fn det(&self) -> f64 {
        self.k * (self.e * self.t - self.s * self.s) - self.d * (self.d * self.t - self.s * self.c)
            + self.c * (self.d * self.s - self.e * self.c)
    }

    /// Symmetric inverse, or `Singular` under the same rule as [`Self::crlb`].
    pub fn inverse(&self) -> Result<[[f64; 3]; 3]> {
        if self.is_singular() {
            return Err(Error::Singular);
        }
        let (k, d, c, e, s, t) = (self.k, self.d, self.c, self.e, self.s, self.t);
        let c00 = e * t - s * s;
        let c01 = -(d * t - s * c);
        let c02 = d * s - e * c;
        let c11 = k * t - c * c;
        let c12 = -(k * s - d * c);
        let c22 = k * e - d * d;
        let det = k * c00 + d * c01 + c * c02;
        Ok([
            [c00 / det, c01 / det, c02 / det],
            [c01 / det, c11 / det, c12 / det],
            [c02 / det, c12 / det, c22 / det],
        ])
    }
}

fn schur_singular(schur: Option<[f64; 3]>, t: f64) -> bool {
    match schur {
        None => true,
        Some([a, b, d]) => a * d - b * b <= SINGULAR_TOL * t * t,
    }
}

fn schur_crlb(schur: Option<[f64; 3]>, t: f64) -> f64 {
    match schur {
        Some([a, b, d]) if !schur_singular(schur, t) => (a + d) / (a * d - b * b),
        _ => f64::INFINITY,
    }
}

#[derive(Clone, Debug)]
struct Term {
    candidate: usize,
    lbar: f64,
    phi: f64,
    cos: f64,
    sin: f64,
}

/// Precomputed per-target geometry for repeated evaluation.
#[derive(Clone, Debug)]
pub struct EavModel {
    n: usize,
    weights: Vec<f64>,
    terms: Vec<Vec<Term>>,
}

impl EavModel {
    pub fn new(s: &Scenario) -> Self {
        let n = s.num_candidates();
        let terms = s
            .eav_links
            .iter()
            .enumerate()
            .map(|(i, links)| {
                let mut lbar = vec![0.0; n];
                for l in links {
                    lbar[l.candidate] += l.intensity;
                }
                lbar.iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.0)
                    .map(|(k, &v)| {
                        let phi = s.targets[i].bearing_from(&s.candidates[k]);
                        Term {
                            candidate: k,
                            lbar: v,
                            phi,
                            cos: phi.cos(),
                            sin: phi.sin(),
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            n,
            weights: s.prior.clone(),
            terms,
        }
    }

    pub fn num_candidates(&self) -> usize {
        self.n
    }

    pub fn num_targets(&self) -> usize {
        self.terms.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Active terms of target `i`: `(a_k, phi_k)` for `z_k lbar_k > 0`.
    fn active(&self, i: usize, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(z.len(), self.n, "selection vector length");
        let mut a = Vec::new();
        let mut phi = Vec::new();
        for t in &self.terms[i] {
            let ak = z[t.candidate] * t.lbar;
            if ak > 0.0 {
                a.push(ak);
                phi.push(t.phi);
            }
        }
        (a, phi)
    }

    /// `(p~, r~)` for target `i`.
    pub fn closed_form_terms(&self, i: usize, z: &[f64]) -> (f64, f64) {
        let (a, phi) = self.active(i, z);
        let m = a.len();
        let mut p = vec![0.0; m * m];
        for k in 0..m {
            for l in (k + 1)..m {
                let v = pairwise_angle_factor(phi[k], phi[l]);
                p[k * m + l] = v;
                p[l * m + k] = v;
            }
        }
        let mut ptil = 0.0;
        let mut rtil = 0.0;
        for k in 0..m {
            for l in (k + 1)..m {
                let akl = a[k] * a[l];
                let pkl = p[k * m + l];
                ptil += akl * pkl;
                if pkl == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for mm in (l + 1)..m {
                    inner += a[mm] * p[l * m + mm] * p[mm * m + k];
                }
                rtil += akl * pkl * inner;
            }
        }
        (6.0 * ptil, 24.0 * rtil)
    }

    /// Closed-form CRLB of target `i`; `+inf` when the information is singular.
    pub fn crlb_closed_form(&self, i: usize, z: &[f64]) -> f64 {
        let (ptil, rtil) = self.closed_form_terms(i, z);
        let t: f64 = self.active(i, z).0.iter().sum();
        if !(t > 0.0) || rtil <= 1.5 * SINGULAR_TOL * t * t * t {
            return f64::INFINITY;
        }
        ptil / rtil
    }

    pub fn fim(&self, i: usize, z: &[f64]) -> EavFim3 {
        assert_eq!(z.len(), self.n, "selection vector length");
        let mut f = EavFim3::default();
        for t in &self.terms[i] {
            let a = z[t.candidate] * t.lbar;
            if a == 0.0 {
                continue;
            }
            f.k += a * t.cos * t.cos;
            f.d += a * t.cos * t.sin;
            f.c += a * t.cos;
            f.e += a * t.sin * t.sin;
            f.s += a * t.sin;
            f.t += a;
        }
        f
    }

    /// Schur complement of target `i`, accumulated about the weighted mean
    /// direction so that clustered bearings do not cancel.
    pub fn schur(&self, i: usize, z: &[f64]) -> Option<[f64; 3]> {
        self.centered(i, z).0
    }

    fn centered(&self, i: usize, z: &[f64]) -> (Option<[f64; 3]>, f64) {
        let f = self.fim(i, z);
        if !(f.t > 0.0) {
            return (None, f.t);
        }
        let (mx, my) = (f.c / f.t, f.s / f.t);
        let mut out = [0.0; 3];
        for t in &self.terms[i] {
            let a = z[t.candidate] * t.lbar;
            if a == 0.0 {
                continue;
            }
            let (dx, dy) = (t.cos - mx, t.sin - my);
            out[0] += a * dx * dx;
            out[1] += a * dx * dy;
            out[2] += a * dy * dy;
        }
        (Some(out), f.t)
    }

    pub fn crlb_oracle(&self, i: usize, z: &[f64]) -> f64 {
        let (schur, t) = self.centered(i, z);
        schur_crlb(schur, t)
    }

    fn weighted(&self, per_target: impl Fn(usize) -> f64) -> f64 {
        let mut total = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let v = per_target(i);
            if v == f64::INFINITY {
                return f64::INFINITY;
            }
            total += w * v;
        }
        total
    }

    /// `f(z) = sum_i w_i CRLB_i(z)` via the closed form.
    pub fn objective(&self, z: &[f64]) -> f64 {
        self.weighted(|i| self.crlb_closed_form(i, z))
    }

    /// `f(z)` via the Schur complement of the 3x3 information matrix. Linear
    /// in the number of candidates, used on dense relaxed points.
    pub fn objective_fim(&self, z: &[f64]) -> f64 {
        self.weighted(|i| self.crlb_oracle(i, z))
    }

    /// `grad f(z)`, with `d CRLB_i / d z_k = -lbar_ik |P J3^-1 q_ik|^2`.
    pub fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.value_and_gradient(z).map(|(_, g)| g)
    }

    pub fn value_and_gradient(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut g = vec![0.0; self.n];
        let mut value = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let fim = self.fim(i, z);
            let inv = fim.inverse()?;
            value += w * self.crlb_oracle(i, z);
            for t in &self.terms[i] {
                let u0 = inv[0][0] * t.cos + inv[0][1] * t.sin + inv[0][2];
                let u1 = inv[1][0] * t.cos + inv[1][1] * t.sin + inv[1][2];
                g[t.candidate] -= w * t.lbar * (u0 * u0 + u1 * u1);
            }
        }
        Ok((value, g))
    }

    /// Denominator triple sum written with the `q_klm` trigonometric kernel
    /// instead of the `p` products. Equals `(2/3) r~`.
    pub fn q_form_denominator(&self, i: usize, z: &[f64]) -> f64 {
        let (a, phi) = self.active(i, z);
        let m = a.len();
        let (c, s): (Vec<f64>, Vec<f64>) = phi.iter().map(|p| (p.cos(), p.sin())).unzip();
        let mut total = 0.0;
        for k in 0..m {
            for l in 0..m {
                let slk = (phi[l] - phi[k]).sin();
                for mm in 0..m {
                    let q = c[k] * s[l] * slk - c[k] * s[mm] * slk - c[k] * c[l] * s[mm] * (s[mm] - s[k]);
                    total += q * a[k] * a[l] * a[mm];
                }
            }
        }
        total
    }

    /// `sum_{k,l,m} a_k a_l a_m p_kl p_lm p_mk` over all ordered triples.
    pub fn p_form_triple_sum(&self, i: usize, z: &[f64]) -> f64 {
        let (a, phi) = self.active(i, z);
        let m = a.len();
        let mut total = 0.0;
        for k in 0..m {
            for l in 0..m {
                for mm in 0..m {
                    total += a[k]
                        * a[l]
                        * a[mm]
                        * pairwise_angle_factor(phi[k], phi[l])
                        * pairwise_angle_factor(phi[l], phi[mm])
                        * pairwise_angle_factor(phi[mm], phi[k]);
                }
            }
        }
        total
    }
}

pub fn crlb_closed_form(s: &Scenario, i: usize, z: impl AsRef<[f64]>) -> f64 {
    EavModel::new(s).crlb_closed_form(i, z.as_ref())
}

/// Information matrix of target `i` and the trace of its inverse Schur complement.
pub fn fim_oracle(s: &Scenario, i: usize, z: impl AsRef<[f64]>) -> (EavFim3, f64) {
    let m = EavModel::new(s);
    (m.fim(i, z.as_ref()), m.crlb_oracle(i, z.as_ref()))
}

pub fn objective(s: &Scenario, z: impl AsRef<[f64]>) -> f64 {
    EavModel::new(s).objective(z.as_ref())
}

pub fn gradient(s: &Scenario, z: impl AsRef<[f64]>) -> Result<Vec<f64>> {
    EavModel::new(s).gradient(z.as_ref())
}
