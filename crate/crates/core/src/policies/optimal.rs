use std::cell::Cell;

use super::{Decision, Policy, PolicyRun};
use crate::distributions::Dist;
use crate::error::{Error, Result};
use crate::numerics::{solve_ivp, FunctionGrid, DEFAULT_STEPS};
use crate::rng::RngStream;

/// Threshold curve of the optimal rate-`n` Poisson policy:
/// `r'(t) = −n·T(r(t))` with `r(1) = 0`, where `T(v) = ∫_v^∞ (1 − F)`.
#[derive(Debug, Clone)]
pub struct OptimalPolicyCurve {
    pub r: FunctionGrid,
}

impl OptimalPolicyCurve {
    pub fn build(d: &Dist, rate: f64) -> Result<Self> {
        Self::build_with_steps(d, rate, DEFAULT_STEPS)
    }

    pub fn build_with_steps(d: &Dist, rate: f64, steps: usize) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate {rate}")));
        }
        let failure: Cell<Option<Error>> = Cell::new(None);
        let rhs = |_t: f64, r: f64| match d.tail_integral(r) {
            Ok(tail) => -rate * tail,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        };
        let grid = solve_ivp(rhs, 0.0, 1.0, 0.0, steps);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        Ok(OptimalPolicyCurve { r: grid? })
    }

    /// Threshold at time `t`, clamped to `[0, 1]`.
    pub fn at(&self, t: f64) -> f64 {
        self.r.eval_clamped(t)
    }

    /// `r(0)`, the optimal expected reward.
    pub fn value(&self) -> f64 {
        self.r.first()
    }
}

/// Accepts the first arrival with value strictly above `r(time)`.
#[derive(Debug, Clone)]
pub struct OptimalPoisson {
    curve: OptimalPolicyCurve,
}

impl OptimalPoisson {
    pub fn new(d: &Dist, rate: f64) -> Result<Self> {
        Ok(OptimalPoisson {
            curve: OptimalPolicyCurve::build(d, rate)?,
        })
    }

    pub fn from_curve(curve: OptimalPolicyCurve) -> Self {
        OptimalPoisson { curve }
    }

    pub fn curve(&self) -> &OptimalPolicyCurve {
        &self.curve
    }
}

struct CurveRun<'a> {
    curve: &'a OptimalPolicyCurve,
    last_t: f64,
}

impl PolicyRun for CurveRun<'_> {
    fn step(&mut self, t: f64, v: f64) -> Decision {
        self.last_t = t;
        if v > self.curve.at(t) {
            Decision::Accept
        } else {
            Decision::Reject
        }
    }

    fn threshold(&self) -> Option<f64> {
        Some(self.curve.at(self.last_t))
    }
}

impl Policy for OptimalPoisson {
    fn name(&self) -> String {
        "optimal".into()
    }

    fn start(&self, _rng: RngStream) -> Box<dyn PolicyRun + '_> {
        Box::new(CurveRun {
            curve: &self.curve,
            last_t: 0.0,
        })
    }
}

/// Backward induction for `n` i.i.d. arrivals: `V_0 = 0`,
/// `V_k = E[max(X, V_{k−1})] = V_{k−1} + T(V_{k−1})`; accept the `i`-th
/// arrival iff it exceeds `V_{n−i}`.
#[derive(Debug, Clone)]
pub struct DpOptimal {
    values: Vec<f64>,
}

impl DpOptimal {
    pub fn new(d: &Dist, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n = 0".into()));
        }
        let mut values = Vec::with_capacity(n);
        let mut v = 0.0;
        for _ in 0..n {
            v += d.tail_integral(v)?;
            values.push(v);
        }
        Ok(DpOptimal { values })
    }

    /// `(V_1, …, V_n)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// The optimal expected reward `V_n`.
    pub fn value(&self) -> f64 {
        *self.values.last().expect("n >= 1")
    }

    fn continuation(&self, remaining: usize) -> f64 {
        if remaining == 0 {
            0.0
        } else {
            self.values[remaining - 1]
        }
    }
}

struct DpRun<'a> {
    dp: &'a DpOptimal,
    seen: usize,
}

impl PolicyRun for DpRun<'_> {
    fn step(&mut self, _t: f64, v: f64) -> Decision {
        self.seen += 1;
        let remaining = self.dp.n().saturating_sub(self.seen);
        if v > self.dp.continuation(remaining) {
            Decision::Accept
        } else {
            Decision::Reject
        }
    }

    fn threshold(&self) -> Option<f64> {
        Some(
            self.dp
                .continuation(self.dp.n().saturating_sub(self.seen + 1)),
        )
    }
}

impl Policy for DpOptimal {
    fn name(&self) -> String {
        format!("dp(n={})", self.n())
    }

    fn start(&self, _rng: RngStream) -> Box<dyn PolicyRun + '_> {
        Box::new(DpRun { dp: self, seen: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{expected_max_n, expected_max_poisson, Exponential, Uniform};
    use crate::kertz::{analytic_opt_and_max, HardInstance};
    use std::sync::Arc;

    fn unit() -> Dist {
        Arc::new(Uniform::new(0.0, 1.0).unwrap())
    }

    #[test]
    fn dp_uniform_recursion() {
        let dp = DpOptimal::new(&unit(), 3).unwrap();
        let v = dp.values();
        assert!((v[0] - 0.5).abs() < 1e-12);
        assert!((v[1] - 0.625).abs() < 1e-12);
        assert!((v[2] - 0.6953125).abs() < 1e-12);
        let ratio = v[1] / expected_max_n(unit().as_ref(), 2).unwrap();
        assert!((ratio - 0.9375).abs() < 1e-9);
        assert!(DpOptimal::new(&unit(), 0).is_err());
    }

    #[test]
    fn dp_single_arrival_is_mean() {
        let d: Dist = Arc::new(Exponential::new(2.0).unwrap());
        assert!((DpOptimal::new(&d, 1).unwrap().value() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exponential_curve_closed_form() {
        // T(r) = e^{−r}, so r' = −n e^{−r} with r(1) = 0 gives r(t) = ln(1 + n(1 − t))
        let d: Dist = Arc::new(Exponential::new(1.0).unwrap());
        let n = 20.0;
        let c = OptimalPolicyCurve::build(&d, n).unwrap();
        assert_eq!(c.r.last(), 0.0);
        for t in [0.0, 0.3, 0.9] {
            let exact = (1.0 + n * (1.0 - t)).ln();
            assert!((c.at(t) - exact).abs() < 1e-9, "{t}");
        }
        assert!(c.value() <= expected_max_poisson(d.as_ref(), n).unwrap());
    }

    #[test]
    fn hard_instance_curve_tracks_r_star() {
        let inst = HardInstance::build(8.0, 1e-3).unwrap();
        let opt = analytic_opt_and_max(&inst).unwrap();
        let d: Dist = Arc::new(inst);
        let c = OptimalPolicyCurve::build(&d, 8.0).unwrap();
        let inst = d.hard_instance().unwrap();
        for i in 0..=100 {
            let t = 1e-3 + (1.0 - 1e-3) * i as f64 / 100.0;
            let gap = (c.at(t) - inst.r_star().eval_clamped(t)).abs();
            assert!(gap < 2e-3, "t = {t}: {gap}");
        }
        assert!(
            (c.value() - opt.opt_q).abs() < 1e-3 * opt.opt_q,
            "{} vs {}",
            c.value(),
            opt.opt_q
        );
    }

    #[test]
    fn curve_policy_accepts_above_threshold() {
        let d: Dist = Arc::new(Exponential::new(1.0).unwrap());
        let p = OptimalPoisson::new(&d, 10.0).unwrap();
        let mut run = p.start(RngStream::new(0, 0));
        let r = p.curve().at(0.5);
        assert_eq!(run.step(0.5, r), Decision::Reject);
        assert_eq!(run.step(0.5, r + 1e-9), Decision::Accept);
    }
}
