//! Online stopping rules.
//!
//! A [`Policy`] is an immutable factory; each run gets its own [`PolicyRun`]
//! state, fed one arrival at a time in time order. Every rule here compares
//! strictly, so ties are rejected.

mod optimal;
mod parse;
mod threephase;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::arrivals::{Arrival, ArrivalSequence};
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub use optimal::{DpOptimal, OptimalPoisson, OptimalPolicyCurve};
pub use parse::{parse_policy, PolicyContext};
pub use threephase::{fixed_quantile_threshold, NArrivalThreePhase, ThreePhase, ThreePhaseParams};

/// Fork tags for per-run randomness.
pub(crate) mod tags {
    pub const PHASE0: u64 = 0x10;
    pub const COIN: u64 = 0x11;
    pub const ADAPTER: u64 = 0x12;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Accept,
    Reject,
}

pub trait Policy: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Fresh per-run state. All of the run's randomness derives from `rng`.
    fn start(&self, rng: RngStream) -> Box<dyn PolicyRun + '_>;
}

pub type SharedPolicy = Arc<dyn Policy>;

pub trait PolicyRun {
    fn step(&mut self, time: f64, value: f64) -> Decision;

    /// The value an arrival must exceed right now, if the rule has one.
    fn threshold(&self) -> Option<f64> {
        None
    }

    /// Look-ahead hook; only test doubles use it.
    fn preview(&mut self, _arrivals: &[Arrival]) {}

    /// Largest simulated warm-up values, in decreasing order.
    fn simulated_top(&self) -> &[f64] {
        &[]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub time: f64,
    pub value: f64,
    pub decision: Decision,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PolicyTrace {
    pub decisions: Vec<TraceEntry>,
    pub accepted: Option<Arrival>,
}

impl PolicyTrace {
    /// Checks time order and that an acceptance, if any, is the single last
    /// entry.
    pub fn validate(&self) -> Result<()> {
        if self.decisions.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(Error::InvalidParameter("trace out of time order".into()));
        }
        let accepts = self
            .decisions
            .iter()
            .filter(|e| e.decision == Decision::Accept)
            .count();
        if accepts > 1 {
            return Err(Error::DoubleAccept);
        }
        match (self.accepted, self.decisions.last()) {
            (None, _) if accepts == 0 => Ok(()),
            (Some(a), Some(last))
                if last.decision == Decision::Accept
                    && last.time == a.time
                    && last.value == a.value =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidParameter(
                "accepted arrival is not the last decision".into(),
            )),
        }
    }
}

/// Plays `policy` on `seq` and records every decision.
pub fn run_policy(
    policy: &dyn Policy,
    seq: &ArrivalSequence,
    rng: RngStream,
) -> Result<(f64, PolicyTrace)> {
    let mut run = policy.start(rng);
    run.preview(&seq.entries);
    let mut trace = PolicyTrace::default();
    for a in &seq.entries {
        let threshold = run.threshold();
        let decision = run.step(a.time, a.value);
        trace.decisions.push(TraceEntry {
            time: a.time,
            value: a.value,
            decision,
            threshold,
        });
        if decision == Decision::Accept {
            trace.accepted = Some(*a);
            break;
        }
    }
    trace.validate()?;
    let reward = trace.accepted.map_or(0.0, |a| a.value);
    Ok((reward, trace))
}

/// Like [`run_policy`] without the trace: the index of the accepted arrival.
pub fn play(run: &mut dyn PolicyRun, seq: &[Arrival]) -> Option<usize> {
    run.preview(seq);
    seq.iter()
        .position(|a| run.step(a.time, a.value) == Decision::Accept)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NeverAccept;

impl Policy for NeverAccept {
    fn name(&self) -> String {
        "never".into()
    }

    fn start(&self, _rng: RngStream) -> Box<dyn PolicyRun + '_> {
        struct Run;
        impl PolicyRun for Run {
            fn step(&mut self, _: f64, _: f64) -> Decision {
                Decision::Reject
            }
        }
        Box::new(Run)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AcceptFirst;

impl Policy for AcceptFirst {
    fn name(&self) -> String {
        "first".into()
    }

    fn start(&self, _rng: RngStream) -> Box<dyn PolicyRun + '_> {
        struct Run;
        impl PolicyRun for Run {
            fn step(&mut self, _: f64, _: f64) -> Decision {
                Decision::Accept
            }
        }
        Box::new(Run)
    }
}

/// Test double that sees the whole sequence and accepts its first maximum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Clairvoyant;

impl Policy for Clairvoyant {
    fn name(&self) -> String {
        "clairvoyant".into()
    }

    fn start(&self, _rng: RngStream) -> Box<dyn PolicyRun + '_> {
        struct Run {
            target: Option<(f64, f64)>,
        }
        impl PolicyRun for Run {
            fn preview(&mut self, arrivals: &[Arrival]) {
                self.target = arrivals
                    .iter()
                    .fold(None, |best: Option<Arrival>, a| match best {
                        Some(b) if b.value >= a.value => Some(b),
                        _ => Some(*a),
                    })
                    .map(|a| (a.time, a.value));
            }
            fn step(&mut self, t: f64, v: f64) -> Decision {
                if self.target == Some((t, v)) {
                    Decision::Accept
                } else {
                    Decision::Reject
                }
            }
        }
        Box::new(Run { target: None })
    }
}

/// Observe until `cutoff`, then accept the first arrival beating everything
/// seen so far.
#[derive(Debug, Clone, Copy)]
pub struct Secretary {
    cutoff: f64,
}

impl Secretary {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&cutoff) {
            return Err(Error::InvalidParameter(format!("cutoff {cutoff}")));
        }
        Ok(Secretary { cutoff })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

impl Default for Secretary {
    fn default() -> Self {
        Secretary {
            cutoff: (-1.0f64).exp(),
        }
    }
}

struct SecretaryRun {
    cutoff: f64,
    best: f64,
}

impl PolicyRun for SecretaryRun {
    fn step(&mut self, t: f64, v: f64) -> Decision {
        if t >= self.cutoff && v > self.best {
            return Decision::Accept;
        }
        self.best = self.best.max(v);
        Decision::Reject
    }

    fn threshold(&self) -> Option<f64> {
        Some(self.best)
    }
}

impl Policy for Secretary {
    fn name(&self) -> String {
        format!("secretary(cutoff={})", self.cutoff)
    }

    fn start(&self, _rng: RngStream) -> Box<dyn PolicyRun + '_> {
        Box::new(SecretaryRun {
            cutoff: self.cutoff,
            best: f64::NEG_INFINITY,
        })
    }
}

/// Plays `a` with probability `p`, else `b`; the coin is tossed once per run
/// from a fork of the run's stream, and the chosen policy gets the stream
/// itself.
#[derive(Debug, Clone)]
pub struct MixturePolicy {
    p: f64,
    a: SharedPolicy,
    b: SharedPolicy,
}

impl MixturePolicy {
    pub fn new(p: f64, a: SharedPolicy, b: SharedPolicy) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("mixture weight {p}")));
        }
        Ok(MixturePolicy { p, a, b })
    }
}

impl Policy for MixturePolicy {
    fn name(&self) -> String {
        format!("mix(p={},a={},b={})", self.p, self.a.name(), self.b.name())
    }

    fn start(&self, rng: RngStream) -> Box<dyn PolicyRun + '_> {
        let u: f64 = rng.fork(tags::COIN).rng().random();
        if u < self.p {
            self.a.start(rng)
        } else {
            self.b.start(rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrivals::ArrivalModel;

    pub(crate) fn seq(points: &[(f64, f64)]) -> ArrivalSequence {
        ArrivalSequence {
            entries: points
                .iter()
                .map(|&(time, value)| Arrival { time, value })
                .collect(),
            horizon: (0.0, 1.0),
            model: ArrivalModel::Poisson { rate: 1.0 },
        }
    }

    const RNG: RngStream = RngStream { seed: 1, stream: 0 };

    #[test]
    fn reference_doubles() {
        let s = seq(&[(0.1, 2.0), (0.4, 7.0), (0.9, 3.0)]);
        assert_eq!(run_policy(&NeverAccept, &s, RNG).unwrap().0, 0.0);
        assert_eq!(run_policy(&AcceptFirst, &s, RNG).unwrap().0, 2.0);
        let (r, trace) = run_policy(&Clairvoyant, &s, RNG).unwrap();
        assert_eq!(r, 7.0);
        assert_eq!(trace.decisions.len(), 2);
        assert_eq!(run_policy(&AcceptFirst, &seq(&[]), RNG).unwrap().0, 0.0);
    }

    #[test]
    fn secretary_hand_traces() {
        let p = Secretary::default();
        let s = seq(&[(0.2, 3.0), (0.5, 1.0), (0.8, 5.0)]);
        let (r, trace) = run_policy(&p, &s, RNG).unwrap();
        assert_eq!(r, 5.0);
        assert_eq!(trace.accepted.unwrap().time, 0.8);
        let s = seq(&[(0.1, 9.0), (0.5, 1.0), (0.8, 5.0)]);
        assert_eq!(run_policy(&p, &s, RNG).unwrap().0, 0.0);
        assert!(Secretary::new(1.5).is_err());
    }

    #[test]
    fn trace_validation() {
        let mut t = PolicyTrace::default();
        for (time, d) in [(0.1, Decision::Accept), (0.2, Decision::Accept)] {
            t.decisions.push(TraceEntry {
                time,
                value: 1.0,
                decision: d,
                threshold: None,
            });
        }
        assert_eq!(t.validate(), Err(Error::DoubleAccept));
    }

    #[test]
    fn mixture_extremes_follow_components() {
        let s = seq(&[(0.1, 2.0), (0.4, 7.0), (0.9, 3.0)]);
        let first: SharedPolicy = Arc::new(AcceptFirst);
        let never: SharedPolicy = Arc::new(NeverAccept);
        let all_a = MixturePolicy::new(1.0, first.clone(), never.clone()).unwrap();
        let all_b = MixturePolicy::new(0.0, first, never).unwrap();
        for stream in 0..50 {
            let rng = RngStream::new(3, stream);
            assert_eq!(run_policy(&all_a, &s, rng).unwrap().0, 2.0);
            assert_eq!(run_policy(&all_b, &s, rng).unwrap().0, 0.0);
        }
    }
}
