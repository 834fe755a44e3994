//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Maximum bisection depth of any subinterval.
pub const MAX_DEPTH: u32 = 60;
const MAX_EVALS: usize = 20_000_000;

struct Simpson<'a, F> {
    f: &'a F,
    evals: usize,
    a: f64,
    b: f64,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        self.evals += 1;
        if self.evals > MAX_EVALS {
            return Err(Error::NoConvergence {
                a: self.a,
                b: self.b,
                evals: self.evals,
            });
        }
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite { t: x, value: y })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        // Interval collapsed to adjacent floats: nothing left to refine.
        let exhausted = !(a < lm && lm < m && m < rm && rm < b);
        if delta.abs() <= 15.0 * tol || exhausted {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::NoConvergence {
                a,
                b,
                evals: self.evals,
            });
        }
        let l = self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The integrand must be finite at every evaluated point; a non-finite value
/// is reported as [`Error::NonFinite`] with the offending abscissa.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidParameter(format!(
            "integration bounds [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut s = Simpson {
        f: &f,
        evals: 0,
        a,
        b,
    };
    // A few uniform panels up front so narrow features are not stepped over.
    const PANELS: usize = 8;
    let h = (b - a) / PANELS as f64;
    let mut total = 0.0;
    let mut fa = s.eval(a)?;
    for i in 0..PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == PANELS { b } else { lo + h };
        let fb = s.eval(hi)?;
        let fm = s.eval(0.5 * (lo + hi))?;
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += s.refine(lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 0)?;
        fa = fb;
    }
    Ok(total)
}

/// Integrates piecewise between sorted breakpoints, splitting the tolerance
/// evenly. Breakpoints outside `[a, b]` are ignored.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    let pieces = (pts.len() - 1) as f64;
    pts.windows(2)
        .map(|w| integrate_adaptive(&f, w[0], w[1], tol / pieces))
        .sum()
}
