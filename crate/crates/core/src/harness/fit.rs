//! Least-squares rate fits on log-log data.

use crate::error::{Error, Result};

/// `2/(19 + d)`, the guaranteed convergence rate in `d` dimensions.
pub fn theorem_floor(dim: usize) -> f64 {
    2.0 / (19.0 + dim as f64)
}

/// Ordinary least-squares slope of `log(error)` against `log(h)`.
///
/// Pairs with a zero error (or any non-finite or nonpositive entry) are
/// dropped with a warning; fewer than two usable pairs is an error.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|&&(h, e)| {
            let ok = h.is_finite() && h > 0.0 && e.is_finite() && e > 0.0;
            if !ok {
                log::warn!("excluding point (h = {h}, error = {e}) from the rate fit");
            }
            ok
        })
        .map(|&(h, e)| (h.ln(), e.ln()))
        .collect();
    if usable.len() < 2 {
        return Err(Error::Fit(usable.len()));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit(1));
    }
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn power_laws() {
        let hs = [1.0, 0.5, 0.25];
        let lin: Vec<_> = hs.iter().map(|&h| (h, 3.0 * h)).collect();
        assert!(close(fit_rate(&lin).unwrap(), 1.0));
        let half: Vec<_> = hs.iter().map(|&h| (h, 3.0 * f64::sqrt(h))).collect();
        assert!(close(fit_rate(&half).unwrap(), 0.5));
        let flat: Vec<_> = hs.iter().map(|&h| (h, 0.2)).collect();
        assert!(close(fit_rate(&flat).unwrap(), 0.0));
    }

    #[test]
    fn zero_errors_are_dropped() {
        let pts = [(1.0, 2.0), (0.5, 0.0), (0.25, 0.5)];
        assert!(close(fit_rate(&pts).unwrap(), 1.0));
        assert!(matches!(fit_rate(&[(1.0, 1.0), (0.5, 0.0)]), Err(Error::Fit(1))));
        assert!(fit_rate(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn floors() {
        assert_eq!(theorem_floor(1), 0.1);
        assert!(close(theorem_floor(2), 2.0 / 21.0));
    }
}
