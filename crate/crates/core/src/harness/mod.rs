//! Monte-Carlo estimation of competitive ratios and the experiments built on
//! it.
//!
//! Trial `i` of a run with seed `s` draws its arrivals from
//! `RngStream::new(s, i).fork(SEQUENCE)` and hands `RngStream::new(s, i)` to
//! the policy, so two runs with the same seed see the same arrivals and
//! results do not depend on the thread count.

mod adversary;
mod experiments;
mod frontier;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrivals::{sample_model, ArrivalModel};
use crate::distributions::{check_tail, ValueDistribution};
use crate::error::{Error, Result};
use crate::policies::{play, Policy};
use crate::rng::RngStream;

pub use adversary::{adversary_suite, Adversary, SuiteOptions};
pub use experiments::{
    consistency_robustness, dominance_profile, hard_instance_experiment, reduction_experiment,
    smoothness_demo, ConsistencyRobustness, CrConfig, DominanceRow, HardInstanceReport,
    MemberEstimate, Reduction, ReductionReport, SmoothnessReport,
};
pub use frontier::{
    frontier_sweep, frontier_theoretical, interpolation_tangent, write_frontier_csv, FrontierMode,
    FrontierPoint, PointSource,
};

/// Fork tag for the arrival sequence of a trial.
pub const SEQUENCE: u64 = 0x01;

pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub alg_mean: f64,
    pub max_mean: f64,
    pub ratio: f64,
    /// Delta-method standard error of `ratio`.
    pub std_err: f64,
    /// Fraction of trials in which the accepted arrival is a maximum.
    pub p_best: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Reward and realized maximum of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub reward: f64,
    pub max: f64,
    pub best: bool,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "trials = {trials} < {MIN_TRIALS}"
        )));
    }
    Ok(())
}

/// One trial: sample the arrivals, play the policy.
pub fn run_trial(
    policy: &dyn Policy,
    d: &dyn ValueDistribution,
    model: ArrivalModel,
    rng: RngStream,
) -> Result<TrialOutcome> {
    let seq = sample_model(d, model, &mut rng.fork(SEQUENCE).rng())?;
    let mut run = policy.start(rng);
    let max = seq.max_value();
    Ok(match play(run.as_mut(), &seq.entries) {
        Some(i) => {
            let reward = seq.entries[i].value;
            TrialOutcome {
                reward,
                max,
                best: reward == max,
            }
        }
        None => TrialOutcome {
            reward: 0.0,
            max,
            best: false,
        },
    })
}

/// All trial outcomes in trial order, computed in parallel.
pub fn run_trials(
    policy: &dyn Policy,
    d: &dyn ValueDistribution,
    model: ArrivalModel,
    trials: usize,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    model.validate()?;
    (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial(policy, d, model, RngStream::new(seed, i)))
        .collect()
}

/// Ratio of means with a paired delta-method error.
pub fn summarize(outcomes: &[TrialOutcome], seed: u64) -> RatioEstimate {
    let m = outcomes.len() as f64;
    let mut sa = CompensatedSum::default();
    let mut sm = CompensatedSum::default();
    let mut hits = 0usize;
    for o in outcomes {
        sa.add(o.reward);
        sm.add(o.max);
        hits += o.best as usize;
    }
    let (a, b) = (sa.value() / m, sm.value() / m);
    let ratio = if b > 0.0 { a / b } else { 0.0 };
    let mut var = CompensatedSum::default();
    for o in outcomes {
        // influence of one trial on a/b
        let r = (o.reward - a) - ratio * (o.max - b);
        var.add(r * r);
    }
    let std_err = if b > 0.0 && m > 1.0 {
        (var.value() / (m - 1.0)).sqrt() / (b * m.sqrt())
    } else {
        0.0
    };
    RatioEstimate {
        alg_mean: a,
        max_mean: b,
        ratio,
        std_err,
        p_best: hits as f64 / m,
        trials: outcomes.len(),
        seed,
    }
}

/// `E[ALG] / E[MAX]` for `policy` on arrivals from `d` under `model`.
pub fn estimate_ratio(
    policy: &dyn Policy,
    d: &dyn ValueDistribution,
    model: ArrivalModel,
    trials: usize,
    seed: u64,
) -> Result<RatioEstimate> {
    check_trials(trials)?;
    check_tail(d)?;
    let outcomes = run_trials(policy, d, model, trials, seed)?;
    Ok(summarize(&outcomes, seed))
}
