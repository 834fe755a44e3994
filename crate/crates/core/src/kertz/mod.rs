//! The Kertz constant and the curves behind the hard prophet instance.
//!
//! With `c = 1/β − 1` and `g(y) = c + y(1 − ln y)`, the root `β_n` solves
//! `∫_{e^{-n}}^1 dy / g(y) = 1`. The curve `ỹ` solves `ỹ' = −g(ỹ)`,
//! `ỹ(0) = 1`, so that `ỹ(1) = e^{-n}`, and `r̃*(t) = ∫_t^1 ds / g(ỹ(s))`.

mod bounds;
mod hard;

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numerics::{
    find_root_bisect, integrate_with_breaks, solve_ivp, FunctionGrid, DEFAULT_STEPS,
};

pub use bounds::{
    envelope_alpha, impossibility_bounds, impossibility_bounds_with, impossibility_frontier,
    CubicPenalty, ImpossibilityPoint,
};
pub use hard::{analytic_opt_and_max, HardInstance, OptMax};

/// Largest supported rate; `e^{-n}` is numerically degenerate beyond.
pub const MAX_RATE: f64 = 64.0;

const QUAD_TOL: f64 = 1e-13;
const ROOT_TOL: f64 = 1e-14;

/// `g(y) = c + y(1 − ln y)`, continued by `c` for `y ≤ 0`.
#[inline]
pub(crate) fn kertz_g(c: f64, y: f64) -> f64 {
    if y > 0.0 {
        c + y * (1.0 - y.ln())
    } else {
        c
    }
}

/// `∫_{e^{-n}}^1 dy / g(y)` for `c = 1/β − 1`, evaluated as
/// `∫_0^n ds / (c e^s + 1 + s)` after `y = e^{-s}`.
fn defining_integral(beta: f64, n: f64) -> Result<f64> {
    let c = 1.0 / beta - 1.0;
    // beyond ln(1/c) + 40 the integrand is below e^{-40}·e^{-(s - S)}
    let upper = n.min((1.0 / c).ln().max(0.0) + 40.0);
    let breaks: Vec<f64> = (0..8).map(|k| f64::powi(2.0, k)).collect();
    integrate_with_breaks(
        |s| 1.0 / (c * s.exp() + 1.0 + s),
        0.0,
        upper,
        &breaks,
        QUAD_TOL,
    )
}

/// The root `β_n`; `f64::INFINITY` gives the limit `β0` (lower limit 0).
///
/// A root exists only for `n > e − 1`, where `∫ dy/(y(1 − ln y)) = ln(1 + n)`
/// exceeds one.
pub fn beta_n(n: f64) -> Result<f64> {
    if n.is_nan() || n <= 0.0 {
        return Err(Error::Domain {
            what: "beta_n",
            value: n,
            domain: "(e - 1, inf]",
        });
    }
    let mut failure = None;
    let residual = |beta: f64| match defining_integral(beta, n) {
        Ok(v) => v - 1.0,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let root = find_root_bisect(residual, 0.5, 1.0 - 1e-9, ROOT_TOL);
    if let Some(e) = failure {
        return Err(e);
    }
    root
}

/// `β0 ≈ 0.7454`, computed once.
pub fn kertz_constant() -> f64 {
    static BETA0: OnceLock<f64> = OnceLock::new();
    *BETA0.get_or_init(|| beta_n(f64::INFINITY).expect("the limit root is bracketed"))
}

fn check_rate(n: f64) -> Result<()> {
    if !(n > std::f64::consts::E - 1.0 && n <= MAX_RATE) {
        return Err(Error::Domain {
            what: "rate",
            value: n,
            domain: "(e - 1, 64]",
        });
    }
    Ok(())
}

/// `ỹ` on `[0, 1]` for a given `c`, by fixed-step RK4.
pub(crate) fn y_tilde_for(c: f64, steps: usize) -> Result<FunctionGrid> {
    let grid = solve_ivp(|_, y| -kertz_g(c, y), 1.0, 0.0, 1.0, steps)?;
    if let Some(i) = grid.values().iter().position(|&y| y <= 0.0) {
        return Err(Error::Breakdown {
            t: grid.nodes()[i],
            value: grid.values()[i],
        });
    }
    Ok(grid)
}

/// `r̃*(t) = ∫_t^1 ds / g(ỹ(s))` on the nodes of `y`, by Simpson's rule per
/// cell with the interpolated midpoint.
pub(crate) fn r_star_for(c: f64, y: &FunctionGrid) -> Result<FunctionGrid> {
    let f = |s: f64| 1.0 / kertz_g(c, y.eval_clamped(s));
    let nodes = y.nodes();
    let values = cumulate(nodes, f, true);
    FunctionGrid::new(nodes.to_vec(), values)
}

/// Cell-wise Simpson sums of `f`, accumulated from the right end when
/// `from_right`, otherwise from the left.
pub(crate) fn cumulate(nodes: &[f64], f: impl Fn(f64) -> f64, from_right: bool) -> Vec<f64> {
    let m = nodes.len();
    let cell = |i: usize| {
        let (a, b) = (nodes[i], nodes[i + 1]);
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    };
    let mut out = vec![0.0; m];
    if from_right {
        for i in (0..m - 1).rev() {
            out[i] = out[i + 1] + cell(i);
        }
    } else {
        for i in 0..m - 1 {
            out[i + 1] = out[i] + cell(i);
        }
    }
    out
}

/// `ỹ` for rate `n`, `e − 1 < n ≤ 64`.
pub fn build_y_tilde(n: f64) -> Result<FunctionGrid> {
    check_rate(n)?;
    let beta = beta_n(n)?;
    y_tilde_for(1.0 / beta - 1.0, DEFAULT_STEPS)
}

/// `r̃*` for rate `n`, on the same nodes as [`build_y_tilde`].
pub fn build_r_star(n: f64) -> Result<FunctionGrid> {
    check_rate(n)?;
    let c = 1.0 / beta_n(n)? - 1.0;
    let y = y_tilde_for(c, DEFAULT_STEPS)?;
    r_star_for(c, &y)
}
