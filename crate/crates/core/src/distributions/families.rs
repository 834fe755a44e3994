use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{Dist, ValueDistribution};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Uniform {
    a: f64,
    b: f64,
}

impl Uniform {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!("uniform({a}, {b})")));
        }
        Ok(Uniform { a, b })
    }
}

impl ValueDistribution for Uniform {
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0)
    }

    fn survival(&self, x: f64) -> f64 {
        ((self.b - x) / (self.b - self.a)).clamp(0.0, 1.0)
    }

    fn quantile(&self, u: f64) -> f64 {
        self.a + u.clamp(0.0, 1.0) * (self.b - self.a)
    }

    fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn tail_integral(&self, v: f64) -> Result<f64> {
        let w = self.b - self.a;
        Ok(if v >= self.b {
            0.0
        } else if v <= self.a {
            (self.a - v) + 0.5 * w
        } else {
            (self.b - v).powi(2) / (2.0 * w)
        })
    }

    fn describe(&self) -> String {
        format!("uniform(a={},b={})", self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponential rate {rate}")));
        }
        Ok(Exponential { rate })
    }
}

impl ValueDistribution for Exponential {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        -(-u.min(1.0)).ln_1p() / self.rate
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        // 1 − u avoids the log of zero
        -(1.0 - rng.random::<f64>()).ln() / self.rate
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn tail_integral(&self, v: f64) -> Result<f64> {
        Ok(if v <= 0.0 {
            -v + 1.0 / self.rate
        } else {
            (-self.rate * v).exp() / self.rate
        })
    }

    fn describe(&self) -> String {
        format!("exponential(rate={})", self.rate)
    }
}

/// Pareto law `P(X > x) = (x/xm)^{-alpha}` on `[xm, ∞)`, optionally
/// conditioned on `X ≤ cap`.
#[derive(Debug, Clone, Copy)]
pub struct Pareto {
    alpha: f64,
    xm: f64,
    cap: f64,
    // P(X > cap) under the untruncated law
    k: f64,
}

impl Pareto {
    pub fn new(alpha: f64, xm: f64, cap: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && xm > 0.0 && xm.is_finite() && cap > xm) {
            return Err(Error::InvalidParameter(format!(
                "pareto(alpha={alpha}, xm={xm}, cap={cap})"
            )));
        }
        let k = if cap.is_finite() {
            (xm / cap).powf(alpha)
        } else {
            0.0
        };
        Ok(Pareto { alpha, xm, cap, k })
    }

    fn raw_tail(&self, x: f64) -> f64 {
        (self.xm / x).powf(self.alpha)
    }
}

impl ValueDistribution for Pareto {
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= self.xm {
            1.0
        } else if x >= self.cap {
            0.0
        } else {
            ((self.raw_tail(x) - self.k) / (1.0 - self.k)).clamp(0.0, 1.0)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u >= 1.0 {
            return self.cap;
        }
        let s = self.k + (1.0 - self.k) * (1.0 - u);
        (self.xm * s.powf(-1.0 / self.alpha)).clamp(self.xm, self.cap)
    }

    fn support(&self) -> (f64, f64) {
        (self.xm, self.cap)
    }

    fn tail_integral(&self, v: f64) -> Result<f64> {
        if !self.cap.is_finite() && self.alpha <= 1.0 {
            return Err(Error::DivergentTail(self.describe()));
        }
        if v >= self.cap {
            return Ok(0.0);
        }
        let below = (self.xm - v).max(0.0);
        let x = v.max(self.xm);
        // ∫_x^cap (xm/s)^alpha ds
        let a = self.alpha;
        let raw = if (a - 1.0).abs() < 1e-12 {
            self.xm * (self.cap / x).ln()
        } else {
            let upper = if self.cap.is_finite() {
                self.cap.powf(1.0 - a)
            } else {
                0.0
            };
            self.xm.powf(a) * (x.powf(1.0 - a) - upper) / (a - 1.0)
        };
        let width = if self.cap.is_finite() {
            self.cap - x
        } else {
            0.0
        };
        Ok(below + (raw - self.k * width) / (1.0 - self.k))
    }

    fn describe(&self) -> String {
        format!(
            "pareto(alpha={},xm={},cap={})",
            self.alpha, self.xm, self.cap
        )
    }
}

/// All mass at one value.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    at: f64,
}

impl Point {
    pub fn new(at: f64) -> Result<Self> {
        if !at.is_finite() {
            return Err(Error::InvalidParameter(format!("point at {at}")));
        }
        Ok(Point { at })
    }
}

impl ValueDistribution for Point {
    fn cdf(&self, x: f64) -> f64 {
        if x >= self.at {
            1.0
        } else {
            0.0
        }
    }

    fn survival(&self, x: f64) -> f64 {
        if x >= self.at {
            0.0
        } else {
            1.0
        }
    }

    fn quantile(&self, _u: f64) -> f64 {
        self.at
    }

    fn sample(&self, _rng: &mut dyn RngCore) -> f64 {
        self.at
    }

    fn support(&self) -> (f64, f64) {
        (self.at, self.at)
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        vec![(self.at, 1.0)]
    }

    fn tail_integral(&self, v: f64) -> Result<f64> {
        Ok((self.at - v).max(0.0))
    }

    fn describe(&self) -> String {
        format!("point(at={})", self.at)
    }
}

/// `X + by`.
#[derive(Debug, Clone)]
pub struct Shifted {
    by: f64,
    base: Dist,
}

impl Shifted {
    pub fn new(by: f64, base: Dist) -> Result<Self> {
        if !by.is_finite() {
            return Err(Error::InvalidParameter(format!("shift by {by}")));
        }
        Ok(Shifted { by, base })
    }
}

impl ValueDistribution for Shifted {
    fn cdf(&self, x: f64) -> f64 {
        self.base.cdf(x - self.by)
    }

    fn survival(&self, x: f64) -> f64 {
        self.base.survival(x - self.by)
    }

    fn quantile(&self, u: f64) -> f64 {
        self.base.quantile(u) + self.by
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.base.sample(rng) + self.by
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        (lo + self.by, hi + self.by)
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        self.base
            .atoms()
            .into_iter()
            .map(|(x, m)| (x + self.by, m))
            .collect()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.base
            .breakpoints()
            .into_iter()
            .map(|x| x + self.by)
            .collect()
    }

    fn tail_integral(&self, v: f64) -> Result<f64> {
        self.base.tail_integral(v - self.by)
    }

    fn describe(&self) -> String {
        format!("shift(by={},base={})", self.by, self.base.describe())
    }
}

/// Finite mixture `Σ w_i D_i`.
#[derive(Debug, Clone)]
pub struct Mixture {
    parts: Vec<(f64, Dist)>,
}

impl Mixture {
    /// Weights must be nonnegative and sum to one within `1e-12`.
    pub fn new(parts: Vec<(f64, Dist)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("empty mixture".into()));
        }
        if parts.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter("negative mixture weight".into()));
        }
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {total}"
            )));
        }
        let parts = parts.into_iter().filter(|(w, _)| *w > 0.0).collect();
        Ok(Mixture { parts })
    }

    pub fn parts(&self) -> &[(f64, Dist)] {
        &self.parts
    }
}

impl ValueDistribution for Mixture {
    fn cdf(&self, x: f64) -> f64 {
        let f: f64 = self.parts.iter().map(|(w, d)| w * d.cdf(x)).sum();
        f.clamp(0.0, 1.0)
    }

    fn survival(&self, x: f64) -> f64 {
        let s: f64 = self.parts.iter().map(|(w, d)| w * d.survival(x)).sum();
        s.clamp(0.0, 1.0)
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let (mut lo, mut hi) = self
            .parts
            .iter()
            .map(|(_, d)| d.quantile(u))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| {
                (a.min(q), b.max(q))
            });
        // The mixture quantile lies between the component quantiles.
        if self.cdf(lo) >= u {
            return lo;
        }
        if !hi.is_finite() {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let mut u = rng.random::<f64>();
        for (w, d) in &self.parts {
            if u < *w {
                return d.sample(rng);
            }
            u -= w;
        }
        self.parts[self.parts.len() - 1].1.sample(rng)
    }

    fn support(&self) -> (f64, f64) {
        self.parts
            .iter()
            .map(|(_, d)| d.support())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (lo, hi)| {
                (a.min(lo), b.max(hi))
            })
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (w, d) in &self.parts {
            for (x, m) in d.atoms() {
                match out.iter_mut().find(|(y, _)| *y == x) {
                    Some((_, acc)) => *acc += w * m,
                    None => out.push((x, w * m)),
                }
            }
        }
        out
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for (_, d) in &self.parts {
            out.extend(d.breakpoints());
            let (lo, hi) = d.support();
            out.extend([lo, hi].into_iter().filter(|x| x.is_finite()));
        }
        out
    }

    fn tail_integral(&self, v: f64) -> Result<f64> {
        self.parts
            .iter()
            .map(|(w, d)| Ok(w * d.tail_integral(v)?))
            .sum()
    }

    fn describe(&self) -> String {
        let inner: Vec<String> = self
            .parts
            .iter()
            .map(|(w, d)| format!("{w}*{}", d.describe()))
            .collect();
        format!("mixture({})", inner.join(" + "))
    }
}

/// Mass `zero_prob` at 0, the rest distributed as `d`; the tail above 0 is
/// `(1 − zero_prob)(1 − F)`.
pub fn pad_with_zeros(d: Dist, zero_prob: f64) -> Result<Dist> {
    if !(0.0..1.0).contains(&zero_prob) {
        return Err(domain("pad_with_zeros", zero_prob, "[0, 1)"));
    }
    if zero_prob == 0.0 {
        return Ok(d);
    }
    let zero: Dist = Arc::new(Point::new(0.0)?);
    Ok(Arc::new(Mixture::new(vec![
        (zero_prob, zero),
        (1.0 - zero_prob, d),
    ])?))
}
