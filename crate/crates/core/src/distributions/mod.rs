//! Value laws: the [`ValueDistribution`] contract, a small family corpus,
//! zero padding, the boosted adversary, and expected-maximum integrals.

mod boosted;
mod families;
mod parse;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::kertz::HardInstance;
use crate::numerics::integrate_with_breaks;

pub use boosted::{lemma_boost, BoostedAdversary};
pub use families::{pad_with_zeros, Exponential, Mixture, Pareto, Point, Shifted, Uniform};
pub use parse::parse_distribution;

/// Shared handle to a value law.
pub type Dist = Arc<dyn ValueDistribution>;

/// A real-valued law with CDF, quantile, sampler and upper-tail integral.
///
/// Atoms must be listed by [`atoms`](Self::atoms); everywhere else the CDF is
/// continuous.
pub trait ValueDistribution: Send + Sync + fmt::Debug {
    fn cdf(&self, x: f64) -> f64;

    /// `1 − cdf(x)`, computed without cancellation where possible.
    fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Generalized inverse `inf { x : cdf(x) ≥ u }`.
    fn quantile(&self, u: f64) -> f64;

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Closed hull of the support; either end may be infinite.
    fn support(&self) -> (f64, f64);

    /// `(location, mass)` of every atom.
    fn atoms(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    /// Points where the CDF is not smooth; used to split quadratures.
    fn breakpoints(&self) -> Vec<f64> {
        self.atoms().into_iter().map(|(x, _)| x).collect()
    }

    /// `T(v) = ∫_v^∞ (1 − cdf(x)) dx`.
    ///
    /// The default integrates numerically and needs a bounded support.
    fn tail_integral(&self, v: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !hi.is_finite() {
            return Err(Error::DivergentTail(self.describe()));
        }
        if v >= hi {
            return Ok(0.0);
        }
        let below = if v < lo { lo - v } else { 0.0 };
        let from = v.max(lo);
        let tol = 1e-11 * (hi - from).max(1.0);
        let rest = integrate_with_breaks(|x| self.survival(x), from, hi, &self.breakpoints(), tol)?;
        Ok(below + rest)
    }

    fn describe(&self) -> String;

    /// The hard instance behind this law, if it is one.
    fn hard_instance(&self) -> Option<&HardInstance> {
        None
    }
}

/// `E[X]`, from `E[X] = lo + T(lo)`.
pub fn mean(d: &dyn ValueDistribution) -> Result<f64> {
    let (lo, _) = d.support();
    if !lo.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{} is unbounded below",
            d.describe()
        )));
    }
    Ok(lo + d.tail_integral(lo)?)
}

/// Probes geometrically beyond the `1 − 10⁻⁶` quantile and reports a tail
/// heavier than `x^{-1.01}`.
pub fn check_tail(d: &dyn ValueDistribution) -> Result<()> {
    let (_, hi) = d.support();
    if hi.is_finite() {
        return Ok(());
    }
    let x0 = d.quantile(1.0 - 1e-6).max(1.0);
    for k in 1..=20 {
        let x = x0 * f64::powi(2.0, k);
        if d.survival(x) > x.powf(-1.01) {
            return Err(Error::DivergentTail(d.describe()));
        }
    }
    Ok(())
}

fn nonnegative(d: &dyn ValueDistribution) -> Result<()> {
    if d.support().0 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{} has negative values",
            d.describe()
        )));
    }
    Ok(())
}

/// `∫_0^∞ P(max > x) dx` for a law with nonnegative values, where
/// `P(max > x) = 1 − exp(−k(x))`. An unbounded tail is cut at the
/// `1 − 10⁻¹²` quantile and the remainder taken to first order,
/// `∫ k ≈ rate·T(cut)`.
fn expected_max_impl(
    d: &dyn ValueDistribution,
    exceed: impl Fn(f64) -> f64,
    first_order: f64,
) -> Result<f64> {
    nonnegative(d)?;
    check_tail(d)?;
    let (_, hi) = d.support();
    let (upper, remainder) = if hi.is_finite() {
        (hi, 0.0)
    } else {
        let cut = d.quantile(1.0 - 1e-12);
        (cut, first_order * d.tail_integral(cut)?)
    };
    if upper <= 0.0 {
        return Ok(0.0);
    }
    let tol = 1e-10 * upper.max(1.0);
    let body = integrate_with_breaks(exceed, 0.0, upper, &d.breakpoints(), tol)?;
    Ok(body + remainder)
}

/// `E[max]` over a rate-`rate` Poisson process on `[0, 1]`, with the empty
/// maximum counted as 0: `∫_0^∞ (1 − exp(−rate·(1 − F(x)))) dx`.
pub fn expected_max_poisson(d: &dyn ValueDistribution, rate: f64) -> Result<f64> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("rate {rate}")));
    }
    if rate == 0.0 {
        return Ok(0.0);
    }
    expected_max_impl(d, |x| -(-rate * d.survival(x)).exp_m1(), rate)
}

/// `E[max(X_1, …, X_n)] = ∫_0^∞ (1 − F(x)^n) dx`.
pub fn expected_max_n(d: &dyn ValueDistribution, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n = 0".into()));
    }
    let nf = n as f64;
    expected_max_impl(d, |x| -(nf * (-d.survival(x)).ln_1p()).exp_m1(), nf)
}

/// Kolmogorov–Smirnov distance between `samples` and the CDF of `d`.
///
/// Atoms are handled by comparing against both one-sided limits.
pub fn ks_distance(d: &dyn ValueDistribution, samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < samples.len() {
        let x = samples[i];
        let mut j = i;
        while j < samples.len() && samples[j] == x {
            j += 1;
        }
        let f = d.cdf(x);
        let f_left = f - d
            .atoms()
            .iter()
            .filter(|(a, _)| *a == x)
            .map(|(_, m)| m)
            .sum::<f64>();
        worst = worst
            .max((j as f64 / n - f).abs())
            .max((i as f64 / n - f_left).abs());
        i = j;
    }
    worst
}
