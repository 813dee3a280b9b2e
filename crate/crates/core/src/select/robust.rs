//! Worst-case intensities over a box of estimation errors.
//!
//! The eavesdropper CRLB is non-increasing in every intensity, so the
//! adversarial point of `|lambda - lambda_hat| <= delta` is `lambda_hat -
//! delta`. The anchor-side CRLB is non-increasing in every anchor
//! intensity, so the jammer's worst case is `lambda~_hat + delta~`. Solving
//! the nominal problem on the shifted scenario solves the min-max problem.

use crate::error::{Error, Result};
use crate::scenario::{Scenario, UncertaintyModel};

/// Scenario with every eavesdropping intensity lowered by its bound.
pub fn robust_eav_effective(s: &Scenario, u: &UncertaintyModel) -> Result<Scenario> {
    u.validate()?;
    let mut out = s.clone();
    for (&(i, j, k), &d) in &u.eav_delta {
        let field = || format!("eav_delta[{i},{j},{k}]");
        let link = out
            .eav_links
            .get_mut(i)
            .and_then(|links| links.iter_mut().find(|l| l.anchor == j && l.candidate == k));
        match link {
            Some(l) if d <= l.intensity => l.intensity -= d,
            Some(l) => {
                return Err(Error::validation(
                    field(),
                    format!("bound {d} exceeds the nominal intensity {}", l.intensity),
                ))
            }
            None if d == 0.0 => {}
            None => return Err(Error::validation(field(), "bound given for a pair without a LOS link")),
        }
    }
    out.validate()?;
    Ok(out)
}

/// Scenario with every anchor intensity raised by its bound.
pub fn robust_jam_effective(s: &Scenario, u: &UncertaintyModel) -> Result<Scenario> {
    u.validate()?;
    let mut out = s.clone();
    for (&(i, j), &d) in &u.jam_delta {
        let link = out
            .anchor_los
            .get_mut(i)
            .and_then(|links| links.iter_mut().find(|l| l.anchor == j));
        match link {
            Some(l) => l.intensity += d,
            None if d == 0.0 => {}
            None => {
                return Err(Error::validation(
                    format!("jam_delta[{i},{j}]"),
                    "bound given for an anchor without a LOS link",
                ))
            }
        }
    }
    out.validate()?;
    Ok(out)
}
