//! Bracketed bisection for scalar equations.

use super::OracleError;
use crate::scalar::{to_f64, Real};

/// Maximum number of halvings.
pub const MAX_BISECTIONS: usize = 200;

/// Root of `f` in `[lo, hi]` given a sign change; stops when the bracket is
/// narrower than `xtol` or an endpoint hits zero exactly.
pub fn bisect<T: Real>(mut f: impl FnMut(T) -> T, mut lo: T, mut hi: T, xtol: T) -> Result<T, OracleError> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(OracleError::NoSignChange {
            lo: to_f64(lo),
            hi: to_f64(hi),
            f_lo: to_f64(flo),
            f_hi: to_f64(fhi),
        });
    }
    let two = T::one() + T::one();
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + (hi - lo) / two;
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(OracleError::BisectionStalled {
        lo: to_f64(lo),
        hi: to_f64(hi),
        iterations: MAX_BISECTIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn exact_endpoint_root() {
        assert_eq!(bisect(|x: f64| x - 1.0, 1.0, 3.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn nan_endpoint_is_no_sign_change() {
        assert!(matches!(bisect(|x: f64| x.ln(), -1.0, 2.0, 1e-12), Err(OracleError::NoSignChange { .. })));
    }
}
