//! Sampled functions with shape-preserving cubic interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    None,
}

/// A function sampled at strictly increasing nodes, interpolated by the
/// Fritsch–Carlson monotone piecewise cubic Hermite scheme.
///
/// When the values are strictly monotone the interpolant is too, so
/// [`FunctionGrid::inverse`] is well defined on the value range.
#[derive(Debug, Clone)]
pub struct FunctionGrid {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    monotonicity: Monotonicity,
}

impl FunctionGrid {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Grid("need at least two nodes".into()));
        }
        if nodes.len() != values.len() {
            return Err(Error::Grid(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t: nodes[i],
                value: values[i],
            });
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Grid("nodes must be strictly increasing".into()));
        }
        let monotonicity = if values.windows(2).all(|w| w[0] < w[1]) {
            Monotonicity::Increasing
        } else if values.windows(2).all(|w| w[0] > w[1]) {
            Monotonicity::Decreasing
        } else {
            Monotonicity::None
        };
        let slopes = pchip_slopes(&nodes, &values);
        Ok(FunctionGrid {
            nodes,
            values,
            slopes,
            monotonicity,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// `(min, max)` of the sampled values.
    pub fn range(&self) -> (f64, f64) {
        let first = self.values[0];
        let last = self.values[self.values.len() - 1];
        match self.monotonicity {
            Monotonicity::Increasing => (first, last),
            Monotonicity::Decreasing => (last, first),
            Monotonicity::None => self
                .values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
        }
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    fn segment(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&n| n <= x);
        k.saturating_sub(1).min(self.nodes.len() - 2)
    }

    fn hermite(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1
    }

    /// Interpolated value; errors outside the node range.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::Grid(format!("{x} outside [{lo}, {hi}]")));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Like [`eval`](Self::eval) but clamps `x` to the node range.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        self.eval_unchecked(x.clamp(lo, hi))
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        let i = self.segment(x);
        if x == self.nodes[i] {
            return self.values[i];
        }
        if x == self.nodes[i + 1] {
            return self.values[i + 1];
        }
        self.hermite(i, x)
    }

    /// The abscissa at which the interpolant takes value `v`.
    ///
    /// Requires a monotone grid and `v` inside its value range.
    pub fn inverse(&self, v: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(v >= lo && v <= hi) {
            return Err(Error::Grid(format!("value {v} outside range [{lo}, {hi}]")));
        }
        let increasing = match self.monotonicity {
            Monotonicity::Increasing => true,
            Monotonicity::Decreasing => false,
            Monotonicity::None => return Err(Error::Grid("inverse of a non-monotone grid".into())),
        };
        Ok(self.inverse_unchecked(v, increasing))
    }

    /// Inverse with `v` clamped into the value range.
    pub fn inverse_clamped(&self, v: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        self.inverse(v.clamp(lo, hi))
    }

    fn inverse_unchecked(&self, v: f64, increasing: bool) -> f64 {
        // Segment whose value interval contains v.
        let k = if increasing {
            self.values.partition_point(|&y| y <= v)
        } else {
            self.values.partition_point(|&y| y >= v)
        };
        let i = k.saturating_sub(1).min(self.nodes.len() - 2);
        if self.values[i] == v {
            return self.nodes[i];
        }
        if self.values[i + 1] == v {
            return self.nodes[i + 1];
        }
        let (mut a, mut b) = (self.nodes[i], self.nodes[i + 1]);
        let sign = if increasing { 1.0 } else { -1.0 };
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if sign * (self.hermite(i, m) - v) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// Fritsch–Carlson slopes: harmonic-mean interior slopes, zero at local
/// extrema, three-point one-sided ends clipped to preserve shape.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (d0, d1) = (delta[i - 1], delta[i]);
        if d0 == 0.0 || d1 == 0.0 || d0.signum() != d1.signum() {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
