use crate::error::{Error, Result};

use super::grid::FunctionGrid;

/// Default number of steps on a unit interval.
pub const DEFAULT_STEPS: usize = 1 << 14;

/// Classical fourth-order Runge–Kutta with `steps` equal steps from `t0` to
/// `t1` (either direction). The returned grid is ordered by increasing `t`.
pub fn solve_ivp<F>(f: F, y0: f64, t0: f64, t1: f64, steps: usize) -> Result<FunctionGrid>
where
    F: Fn(f64, f64) -> f64,
{
    if steps < 16 {
        return Err(Error::InvalidParameter(format!("steps = {steps} < 16")));
    }
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidParameter(format!("interval [{t0}, {t1}]")));
    }
    if !y0.is_finite() {
        return Err(Error::NonFinite { t: t0, value: y0 });
    }
    let h = (t1 - t0) / steps as f64;
    let mut ts = Vec::with_capacity(steps + 1);
    let mut ys = Vec::with_capacity(steps + 1);
    ts.push(t0);
    ys.push(y0);
    let mut y = y0;
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t_next = if i + 1 == steps {
            t1
        } else {
            t0 + h * (i + 1) as f64
        };
        if !y.is_finite() {
            return Err(Error::NonFinite {
                t: t_next,
                value: y,
            });
        }
        ts.push(t_next);
        ys.push(y);
    }
    if t1 < t0 {
        ts.reverse();
        ys.reverse();
    }
    FunctionGrid::new(ts, ys)
}
