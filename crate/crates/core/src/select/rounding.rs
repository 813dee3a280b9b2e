use crate::error::{Error, Result};
use crate::selection::SelectionVector;

/// Indices of the `m` largest weights, ties to the lowest index, ascending.
pub(crate) fn largest_indices(z: &[f64], m: usize, exclude: &[bool]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).filter(|&k| !exclude.get(k).copied().unwrap_or(false)).collect();
    idx.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
    idx.truncate(m);
    idx.sort_unstable();
    idx
}

/// Sets the `m` largest entries of a relaxed solution to one.
pub fn round_largest_m(z: &[f64], m: usize) -> Result<SelectionVector> {
    if m > z.len() {
        return Err(Error::Domain(format!("cannot select {m} of {} positions", z.len())));
    }
    SelectionVector::binary_from_indices(z.len(), &largest_indices(z, m, &[]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = round_largest_m(&[0.7, 0.9, 0.2, 0.2], 2).unwrap();
        assert_eq!(r.weights(), &[1.0, 1.0, 0.0, 0.0]);
        let r = round_largest_m(&[0.0, 1.0, 1.0, 0.0], 2).unwrap();
        assert_eq!(r.weights(), &[0.0, 1.0, 1.0, 0.0]);
        let r = round_largest_m(&[0.5, 0.5, 0.5], 2).unwrap();
        assert_eq!(r.weights(), &[1.0, 1.0, 0.0]);
        assert!(round_largest_m(&[0.5], 2).is_err());
    }
}
