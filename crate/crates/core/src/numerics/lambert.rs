//! Real branches of the Lambert W function and the `τ·ln(1/τ) = γ` inversion.

use std::f64::consts::E;

use crate::error::{domain, Result};

const INV_E: f64 = 1.0 / E;
const GUARD: f64 = 1e-12;
const MAX_ITER: usize = 64;

/// Principal branch `W0`, defined on `[-1/e, ∞)` with `W0 ≥ -1`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E - GUARD {
        return Err(domain("lambert_w0", x, "[-1/e, inf)"));
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let p2 = 2.0 * (E * x + 1.0);
    if p2 <= 0.0 {
        return Ok(-1.0);
    }
    let w0 = if p2 < 0.5 {
        let p = p2.sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        // ln(1 + x) tracks W0 within a factor two on this range.
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    Ok(halley(x, w0))
}

/// Lower branch `W₋₁`, defined on `[-1/e, 0)` with `W₋₁ ≤ -1`.
pub fn lambert_w_minus1(x: f64) -> Result<f64> {
    if !(-INV_E - GUARD..0.0).contains(&x) {
        return Err(domain("lambert_w_minus1", x, "[-1/e, 0)"));
    }
    let p2 = 2.0 * (E * x + 1.0);
    if p2 <= 0.0 {
        return Ok(-1.0);
    }
    let w0 = if p2 < 0.5 {
        let p = p2.sqrt();
        -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    Ok(halley(x, w0).min(-1.0))
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(1e-300);
        w = next;
        if done {
            break;
        }
    }
    w
}

/// Phase boundaries `(τ1, τ2)` with `τ·ln(1/τ) = γ`, `τ1 ≤ 1/e ≤ τ2`.
///
/// `γ = 0` gives `(0, 1)`; `γ = 1/e` gives `(1/e, 1/e)`.
pub fn tau_pair(gamma: f64) -> Result<(f64, f64)> {
    if gamma.is_nan() || !(0.0..=INV_E + GUARD).contains(&gamma) {
        return Err(domain("tau_pair", gamma, "[0, 1/e]"));
    }
    if gamma == 0.0 {
        return Ok((0.0, 1.0));
    }
    if gamma >= INV_E {
        return Ok((INV_E, INV_E));
    }
    let tau1 = lambert_w_minus1(-gamma)?.exp();
    let tau2 = lambert_w0(-gamma)?.exp();
    Ok((tau1.min(INV_E), tau2.max(INV_E)))
}
