use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BisectError<E> {
    #[error("predicate is infeasible at the upper end of the bracket ({cap})")]
    InfeasibleAtCap { cap: f64 },
    #[error("invalid bracket [{lo}, {hi}] or tolerance {tol}")]
    InvalidBracket { lo: f64, hi: f64, tol: f64 },
    #[error("predicate failed: {0}")]
    Predicate(E),
}

/// Smallest `t` in `[lo, hi]` (to within `tol`) where a monotone predicate
/// holds. The returned point is always one at which the predicate was true.
pub fn try_bisect_threshold<E>(
    mut feasible: impl FnMut(f64) -> Result<bool, E>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, BisectError<E>> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && tol > 0.0) {
        return Err(BisectError::InvalidBracket { lo, hi, tol });
    }
    if !feasible(hi).map_err(BisectError::Predicate)? {
        return Err(BisectError::InfeasibleAtCap { cap: hi });
    }
    if feasible(lo).map_err(BisectError::Predicate)? {
        return Ok(lo);
    }
    let (mut bad, mut good) = (lo, hi);
    while good - bad > tol {
        let mid = 0.5 * (bad + good);
        if feasible(mid).map_err(BisectError::Predicate)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// Infallible-predicate form of [`try_bisect_threshold`].
pub fn bisect_threshold(
    mut feasible: impl FnMut(f64) -> bool,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, BisectError<std::convert::Infallible>> {
    try_bisect_threshold(|t| Ok(feasible(t)), lo, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_pi() {
        let t = bisect_threshold(|t| t >= std::f64::consts::PI, 0.0, 10.0, 1e-6).unwrap();
        assert!(t >= std::f64::consts::PI);
        assert!(t - std::f64::consts::PI <= 1e-6);
    }

    #[test]
    fn always_true_returns_lo() {
        assert_eq!(bisect_threshold(|_| true, 1.5, 4.0, 1e-6).unwrap(), 1.5);
    }

    #[test]
    fn infeasible_cap_is_reported() {
        let e = bisect_threshold(|_| false, 0.0, 1.0, 1e-6).unwrap_err();
        assert_eq!(e, BisectError::InfeasibleAtCap { cap: 1.0 });
    }

    #[test]
    fn predicate_errors_propagate() {
        let e = try_bisect_threshold(|t| if t > 0.5 { Err("boom") } else { Ok(false) }, 0.0, 1.0, 1e-3)
            .unwrap_err();
        assert_eq!(e, BisectError::Predicate("boom"));
    }
}
