use std::sync::Arc;

use rand::{Rng, RngCore};

use super::ValueDistribution;
use crate::error::{Error, Result};
use crate::kertz::HardInstance;

/// A hard instance with its mass above `b` multiplied by `boost`, an extra
/// atom of mass `high_rate/n` at `high_value`, and the part below `b`
/// rescaled so the per-arrival masses sum to one.
#[derive(Debug, Clone)]
pub struct BoostedAdversary {
    inst: Arc<HardInstance>,
    b: f64,
    boost: f64,
    high_mass: f64,
    high_value: f64,
    // inst.survival(b)
    s_b: f64,
    // scale of the sub-b CDF
    k: f64,
}

impl BoostedAdversary {
    pub fn new(
        inst: Arc<HardInstance>,
        b: f64,
        boost: f64,
        high_rate: f64,
        high_value: f64,
    ) -> Result<Self> {
        let r0 = inst.r_star().first();
        if !(b > 0.0 && b < r0) {
            return Err(Error::InvalidParameter(format!(
                "b = {b} outside (0, {r0})"
            )));
        }
        if !(boost >= 1.0 && boost.is_finite()) {
            return Err(Error::InvalidParameter(format!("boost {boost} < 1")));
        }
        if !(high_rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("high rate {high_rate}")));
        }
        if !(high_value > inst.h()) {
            return Err(Error::InvalidParameter(format!(
                "high value {high_value} not above H = {}",
                inst.h()
            )));
        }
        let s_b = inst.survival(b);
        let high_mass = high_rate / inst.n();
        let low_mass = 1.0 - boost * s_b - high_mass;
        if low_mass < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "masses exceed one: boosted tail {} + high atom {high_mass}",
                boost * s_b
            )));
        }
        Ok(BoostedAdversary {
            k: low_mass / (1.0 - s_b),
            inst,
            b,
            boost,
            high_mass,
            high_value,
            s_b,
        })
    }

    /// `(below b, above b, high atom)`.
    pub fn masses(&self) -> (f64, f64, f64) {
        (
            self.k * (1.0 - self.s_b),
            self.boost * self.s_b,
            self.high_mass,
        )
    }
}

/// The boost `ln(1/δ)/((1 − δ)·λ′·ε)`, with `λ′ = n·(1 − F(b))` the rate of
/// arrivals above `b`.
pub fn lemma_boost(inst: &HardInstance, b: f64, eps: f64, delta: f64) -> Result<f64> {
    if !(eps > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps}, delta = {delta}"
        )));
    }
    let rate_above = inst.n() * inst.survival(b);
    if !(rate_above > 0.0) {
        return Err(Error::InvalidParameter(format!("no mass above b = {b}")));
    }
    Ok((1.0 / delta).ln() / ((1.0 - delta) * rate_above * eps))
}

impl ValueDistribution for BoostedAdversary {
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    fn survival(&self, x: f64) -> f64 {
        let high = if x < self.high_value {
            self.high_mass
        } else {
            0.0
        };
        if x < self.b {
            (1.0 - self.k * self.inst.cdf(x)).clamp(0.0, 1.0)
        } else {
            (self.boost * self.inst.survival(x) + high).clamp(0.0, 1.0)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let (low, _, high) = self.masses();
        if u < low {
            self.inst.quantile(u / self.k)
        } else if u < 1.0 - high {
            let s = (1.0 - u - high) / self.boost;
            self.inst.quantile(1.0 - s).max(self.b)
        } else {
            self.high_value
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    fn support(&self) -> (f64, f64) {
        (self.inst.support().0, self.high_value)
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .inst
            .atoms()
            .into_iter()
            .map(|(x, m)| (x, m * if x >= self.b { self.boost } else { self.k }))
            .collect();
        if self.high_mass > 0.0 {
            out.push((self.high_value, self.high_mass));
        }
        out
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out = self.inst.breakpoints();
        out.extend([self.b, self.high_value]);
        out
    }

    fn tail_integral(&self, v: f64) -> Result<f64> {
        let high = self.high_mass * (self.high_value - v).max(0.0);
        if v >= self.b {
            return Ok(self.boost * self.inst.tail_integral(v)? + high);
        }
        let t_b = self.inst.tail_integral(self.b)?;
        let upper = self.boost * t_b + self.high_mass * (self.high_value - self.b);
        // ∫_v^b (1 − k F) = (b − v)(1 − k) + k (T(v) − T(b))
        let lower = (self.b - v) * (1.0 - self.k) + self.k * (self.inst.tail_integral(v)? - t_b);
        Ok(upper + lower)
    }

    fn describe(&self) -> String {
        format!(
            "boosted(n={},q={},b={},boost={},high_rate={},high_value={})",
            self.inst.n(),
            self.inst.q(),
            self.b,
            self.boost,
            self.high_mass * self.inst.n(),
            self.high_value
        )
    }
}
