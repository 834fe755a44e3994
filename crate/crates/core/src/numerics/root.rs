use crate::error::{Error, Result};

/// Bisection on a sign change of `f` in `[lo, hi]`.
///
/// Stops once the bracket is no wider than `tol` (or cannot shrink further in
/// floating point) and returns its midpoint.
pub fn find_root_bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.is_nan() {
            return Err(Error::NonFinite {
                t: mid,
                value: f_mid,
            });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        let r = find_root_bisect(|x| x - 0.5, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.5).abs() < 1e-14);
        let tol = 1e-10;
        let r = find_root_bisect(|x| x * x - 2.0, 1.0, 2.0, tol).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() <= tol);
    }

    #[test]
    fn unbracketed() {
        assert!(matches!(
            find_root_bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-8),
            Err(Error::Bracket { .. })
        ));
    }
}
