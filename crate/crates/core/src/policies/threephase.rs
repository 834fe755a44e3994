use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use super::{tags, Decision, Policy, PolicyRun};
use crate::distributions::Dist;
use crate::error::{Error, Result};
use crate::numerics::tau_pair;
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct ThreePhaseParams {
    pub gamma: f64,
    pub z: f64,
    pub ell: usize,
    pub tau1: f64,
    pub tau2: f64,
    pub rate: f64,
    pub advice: Dist,
}

impl ThreePhaseParams {
    /// Phase boundaries from `γ` and `ℓ = round(z) + 2`.
    pub fn new(gamma: f64, z: f64, rate: f64, advice: Dist) -> Result<Self> {
        let (tau1, tau2) = tau_pair(gamma)?;
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::InvalidParameter(format!("z = {z}")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate {rate}")));
        }
        Ok(ThreePhaseParams {
            gamma,
            z,
            ell: z.round() as usize + 2,
            tau1,
            tau2,
            rate,
            advice,
        })
    }
}

#[derive(Debug, Clone)]
enum Warmup {
    Simulated,
    Fixed(f64),
}

/// Warm-up on simulated advice arrivals, then reject on `[0, τ1)`, accept
/// above `max(L, best so far)` on `[τ1, τ2)`, and above the best so far on
/// `[τ2, 1]`, where `L` is the `ℓ`-th largest warm-up value.
#[derive(Debug, Clone)]
pub struct ThreePhase {
    params: ThreePhaseParams,
    warmup: Warmup,
}

impl ThreePhase {
    pub fn new(params: ThreePhaseParams) -> Self {
        ThreePhase {
            params,
            warmup: Warmup::Simulated,
        }
    }

    /// Skips the warm-up and uses the threshold `l` directly.
    pub fn with_threshold(params: ThreePhaseParams, l: f64) -> Self {
        ThreePhase {
            params,
            warmup: Warmup::Fixed(l),
        }
    }

    pub fn params(&self) -> &ThreePhaseParams {
        &self.params
    }
}

/// The static quantile threshold: `ThreePhase` with `γ = 0`, `(τ1, τ2) = (0, 1)`.
pub fn fixed_quantile_threshold(advice: Dist, rate: f64, z: f64) -> Result<ThreePhase> {
    Ok(ThreePhase::new(ThreePhaseParams::new(
        0.0, z, rate, advice,
    )?))
}

/// The `ℓ` largest of a Poisson(`mean`) number of advice draws.
///
/// In quantile space the draws form a rate-`mean` Poisson process on `(0, 1]`,
/// so the k-th smallest level is a sum of `k` unit exponentials over `mean`.
fn top_of_poisson(advice: &Dist, mean: f64, ell: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(ell);
    if mean <= 0.0 {
        return out;
    }
    let mut s = 0.0;
    for _ in 0..ell {
        let e: f64 = Exp1.sample(rng);
        s += e;
        let u = s / mean;
        if u > 1.0 {
            break;
        }
        out.push(advice.quantile(1.0 - u));
    }
    out
}

/// The `ℓ` largest of exactly `m` advice draws, via uniform spacings.
fn top_of_fixed(advice: &Dist, m: usize, ell: usize, rng: &mut impl Rng) -> Vec<f64> {
    let k = ell.min(m);
    let mut sums = Vec::with_capacity(k);
    let mut s = 0.0;
    for _ in 0..k {
        let e: f64 = Exp1.sample(rng);
        s += e;
        sums.push(s);
    }
    if k == 0 {
        return Vec::new();
    }
    let rest = if m + 1 > k {
        Gamma::new((m + 1 - k) as f64, 1.0)
            .expect("positive shape")
            .sample(rng)
    } else {
        0.0
    };
    let total = s + rest;
    sums.into_iter()
        .map(|sk| advice.quantile(1.0 - sk / total))
        .collect()
}

struct ThreePhaseRun {
    tau1: f64,
    tau2: f64,
    l: f64,
    best: f64,
    top: Vec<f64>,
}

impl ThreePhaseRun {
    fn new(tau1: f64, tau2: f64, top: Vec<f64>, ell: usize, fixed: Option<f64>) -> Self {
        let l = match fixed {
            Some(l) => l,
            None if top.len() >= ell => top[ell - 1],
            None => 0.0,
        };
        ThreePhaseRun {
            tau1,
            tau2,
            l,
            best: f64::NEG_INFINITY,
            top,
        }
    }

    fn decide(&mut self, phase: u8, v: f64) -> Decision {
        let bar = match phase {
            1 => f64::INFINITY,
            2 => self.l.max(self.best),
            _ => self.best,
        };
        if v > bar {
            return Decision::Accept;
        }
        self.best = self.best.max(v);
        Decision::Reject
    }
}

impl PolicyRun for ThreePhaseRun {
    fn step(&mut self, t: f64, v: f64) -> Decision {
        let phase = if t < self.tau1 {
            1
        } else if t < self.tau2 {
            2
        } else {
            3
        };
        self.decide(phase, v)
    }

    fn threshold(&self) -> Option<f64> {
        Some(self.l.max(self.best))
    }

    fn simulated_top(&self) -> &[f64] {
        &self.top
    }
}

impl Policy for ThreePhase {
    fn name(&self) -> String {
        let p = &self.params;
        match self.warmup {
            Warmup::Simulated => format!("threephase(gamma={},z={})", p.gamma, p.z),
            Warmup::Fixed(l) => format!("threephase(gamma={},L={l})", p.gamma),
        }
    }

    fn start(&self, rng: RngStream) -> Box<dyn PolicyRun + '_> {
        let p = &self.params;
        let (top, fixed) = match self.warmup {
            Warmup::Simulated => {
                let mut r = rng.fork(tags::PHASE0).rng();
                (top_of_poisson(&p.advice, p.rate * p.z, p.ell, &mut r), None)
            }
            Warmup::Fixed(l) => (Vec::new(), Some(l)),
        };
        Box::new(ThreePhaseRun::new(p.tau1, p.tau2, top, p.ell, fixed))
    }
}

/// `ThreePhase` for `n` arrivals: phases switch at arrival indices
/// `r1 = ⌈nτ1⌉` and `r2 = ⌈nτ2⌉`, and the warm-up draws `round(n·z)` advice
/// values.
#[derive(Debug, Clone)]
pub struct NArrivalThreePhase {
    params: ThreePhaseParams,
    n: usize,
    r1: usize,
    r2: usize,
}

impl NArrivalThreePhase {
    pub fn new(gamma: f64, z: f64, n: usize, advice: Dist) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n = 0".into()));
        }
        let params = ThreePhaseParams::new(gamma, z, n as f64, advice)?;
        let nf = n as f64;
        Ok(NArrivalThreePhase {
            r1: (nf * params.tau1).ceil() as usize,
            r2: (nf * params.tau2).ceil() as usize,
            params,
            n,
        })
    }
}

struct IndexedRun {
    inner: ThreePhaseRun,
    r1: usize,
    r2: usize,
    i: usize,
}

impl PolicyRun for IndexedRun {
    fn step(&mut self, _t: f64, v: f64) -> Decision {
        self.i += 1;
        let phase = if self.i < self.r1 {
            1
        } else if self.i < self.r2 {
            2
        } else {
            3
        };
        self.inner.decide(phase, v)
    }

    fn threshold(&self) -> Option<f64> {
        self.inner.threshold()
    }

    fn simulated_top(&self) -> &[f64] {
        &self.inner.top
    }
}

impl Policy for NArrivalThreePhase {
    fn name(&self) -> String {
        format!(
            "threephase_n(gamma={},z={},n={})",
            self.params.gamma, self.params.z, self.n
        )
    }

    fn start(&self, rng: RngStream) -> Box<dyn PolicyRun + '_> {
        let p = &self.params;
        let m = (self.n as f64 * p.z).round() as usize;
        let mut r = rng.fork(tags::PHASE0).rng();
        let top = top_of_fixed(&p.advice, m, p.ell, &mut r);
        Box::new(IndexedRun {
            inner: ThreePhaseRun::new(p.tau1, p.tau2, top, p.ell, None),
            r1: self.r1,
            r2: self.r2,
            i: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrivals::{sample_poisson, Arrival, ArrivalModel, ArrivalSequence};
    use crate::distributions::{Exponential, Uniform};
    use crate::policies::{run_policy, Secretary};
    use std::sync::Arc;

    fn seq(points: &[(f64, f64)]) -> ArrivalSequence {
        ArrivalSequence {
            entries: points
                .iter()
                .map(|&(time, value)| Arrival { time, value })
                .collect(),
            horizon: (0.0, 1.0),
            model: ArrivalModel::Poisson { rate: 1.0 },
        }
    }

    fn unit() -> Dist {
        Arc::new(Uniform::new(0.0, 1.0).unwrap())
    }

    const RNG: RngStream = RngStream { seed: 4, stream: 2 };

    #[test]
    fn params() {
        let p = ThreePhaseParams::new(0.25, 50.0, 200.0, unit()).unwrap();
        assert_eq!(p.ell, 52);
        assert!((p.tau1 - 0.116101).abs() < 1e-6 && (p.tau2 - 0.699491).abs() < 1e-6);
        assert!((p.tau1 * (1.0 / p.tau1).ln() - 0.25).abs() < 1e-10);
        assert!(ThreePhaseParams::new(0.5, 50.0, 200.0, unit()).is_err());
        assert!(ThreePhaseParams::new(0.2, -1.0, 200.0, unit()).is_err());
    }

    #[test]
    fn phase_two_uses_threshold() {
        let p = ThreePhaseParams::new(0.25, 50.0, 200.0, unit()).unwrap();
        let alg = ThreePhase::with_threshold(p.clone(), 4.0);
        let (r, _) = run_policy(&alg, &seq(&[(0.05, 3.0), (0.3, 5.0)]), RNG).unwrap();
        assert_eq!(r, 5.0);
        let alg = ThreePhase::with_threshold(p, 10.0);
        let s = seq(&[(0.05, 3.0), (0.3, 5.0), (0.8, 7.0)]);
        let (r, trace) = run_policy(&alg, &s, RNG).unwrap();
        assert_eq!(r, 7.0);
        assert_eq!(trace.decisions[1].decision, Decision::Reject);
    }

    #[test]
    fn secretary_limit_matches() {
        let d: Dist = Arc::new(Exponential::new(1.0).unwrap());
        let alg =
            ThreePhase::new(ThreePhaseParams::new((-1.0f64).exp(), 5.0, 30.0, d.clone()).unwrap());
        let sec = Secretary::default();
        for stream in 0..500 {
            let s = sample_poisson(
                d.as_ref(),
                30.0,
                0.0,
                1.0,
                &mut RngStream::new(8, stream).rng(),
            )
            .unwrap();
            let a = run_policy(&alg, &s, RNG).unwrap().1;
            let b = run_policy(&sec, &s, RNG).unwrap().1;
            assert_eq!(a.accepted, b.accepted);
        }
    }

    #[test]
    fn fixed_threshold_is_gamma_zero() {
        let d: Dist = Arc::new(Exponential::new(1.0).unwrap());
        let a = fixed_quantile_threshold(d.clone(), 50.0, 4.0).unwrap();
        let b = ThreePhase::new(ThreePhaseParams::new(0.0, 4.0, 50.0, d.clone()).unwrap());
        for stream in 0..200 {
            let rng = RngStream::new(2, stream);
            let s = sample_poisson(d.as_ref(), 50.0, 0.0, 1.0, &mut rng.fork(99).rng()).unwrap();
            assert_eq!(
                run_policy(&a, &s, rng).unwrap().1,
                run_policy(&b, &s, rng).unwrap().1
            );
        }
    }

    #[test]
    fn advice_above_support_never_stops() {
        let truth = Uniform::new(0.0, 1.0).unwrap();
        let high: Dist = Arc::new(Uniform::new(5.0, 6.0).unwrap());
        let alg = fixed_quantile_threshold(high, 100.0, 10.0).unwrap();
        for stream in 0..200 {
            let rng = RngStream::new(6, stream);
            let s = sample_poisson(&truth, 100.0, 0.0, 1.0, &mut rng.fork(99).rng()).unwrap();
            assert_eq!(run_policy(&alg, &s, rng).unwrap().0, 0.0);
        }
    }

    #[test]
    fn warmup_order_statistic_law() {
        // L is the ℓ-th largest of Poisson(rate·z) uniforms: 1 − L ≈ Gamma(ℓ)/(rate·z)
        let (rate, z) = (100.0, 3.0);
        let p = ThreePhaseParams::new(0.2, z, rate, unit()).unwrap();
        let alg = ThreePhase::new(p.clone());
        let trials = 4000;
        let mean_gap: f64 = (0..trials)
            .map(|s| {
                let run = alg.start(RngStream::new(11, s));
                let top = run.simulated_top().to_vec();
                assert_eq!(top.len(), p.ell);
                assert!(top.windows(2).all(|w| w[0] >= w[1]));
                1.0 - top[p.ell - 1]
            })
            .sum::<f64>()
            / trials as f64;
        let expect = p.ell as f64 / (rate * z);
        assert!(
            (mean_gap - expect).abs() < 0.03 * expect,
            "{mean_gap} vs {expect}"
        );
    }

    #[test]
    fn fixed_count_warmup() {
        let unit = unit();
        let mut rng = RngStream::new(1, 1).rng();
        assert!(top_of_fixed(&unit, 0, 3, &mut rng).is_empty());
        assert_eq!(top_of_fixed(&unit, 2, 3, &mut rng).len(), 2);
        let trials = 4000;
        let mean: f64 = (0..trials)
            .map(|_| top_of_fixed(&unit, 9, 1, &mut rng)[0])
            .sum::<f64>()
            / trials as f64;
        // E max of 9 uniforms = 0.9
        assert!((mean - 0.9).abs() < 0.01, "{mean}");
    }

    #[test]
    fn indexed_phases() {
        let d = unit();
        let alg = NArrivalThreePhase::new(0.25, 0.0, 10, d).unwrap();
        assert_eq!((alg.r1, alg.r2), (2, 7));
        // z = 0 → no warm-up, L = 0
        let s = seq(&[(0.1, 0.5), (0.2, 0.6), (0.3, 0.7)]);
        let (r, _) = run_policy(&alg, &s, RNG).unwrap();
        assert_eq!(r, 0.6);
    }
}
