//! Running a policy built for one arrival model in the other.

use super::{poisson_times, Arrival};
use crate::distributions::{pad_with_zeros, Dist};
use crate::error::{Error, Result};
use crate::policies::{tags, Decision, Policy, PolicyRun, SharedPolicy};
use crate::rng::RngStream;

/// Plays a Poisson-model policy on `n` arrivals.
///
/// Each run draws Poisson arrival times at rate `λ = n(1 − ε)`, `ε = √(ln n / n)`,
/// and hands the real values to the inner policy at those times. Real
/// arrivals beyond the simulated count are rejected; a stop the inner policy
/// would have made on a simulated arrival past the `n`-th earns nothing.
#[derive(Debug, Clone)]
pub struct NFromPoisson {
    inner: SharedPolicy,
    n: usize,
    eps: f64,
    lambda: f64,
}

impl NFromPoisson {
    pub fn new(inner: SharedPolicy, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n = {n} < 2")));
        }
        let nf = n as f64;
        let eps = (nf.ln() / nf).sqrt();
        Ok(NFromPoisson {
            inner,
            n,
            eps,
            lambda: nf * (1.0 - eps),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

struct NFromPoissonRun<'a> {
    inner: Box<dyn PolicyRun + 'a>,
    times: Vec<f64>,
    seen: usize,
}

impl PolicyRun for NFromPoissonRun<'_> {
    fn preview(&mut self, arrivals: &[Arrival]) {
        let shown: Vec<Arrival> = arrivals
            .iter()
            .zip(&self.times)
            .map(|(a, &time)| Arrival {
                time,
                value: a.value,
            })
            .collect();
        self.inner.preview(&shown);
    }

    fn step(&mut self, _t: f64, v: f64) -> Decision {
        let i = self.seen;
        self.seen += 1;
        match self.times.get(i) {
            Some(&t) => self.inner.step(t, v),
            None => Decision::Reject,
        }
    }

    fn threshold(&self) -> Option<f64> {
        if self.seen < self.times.len() {
            self.inner.threshold()
        } else {
            None
        }
    }

    fn simulated_top(&self) -> &[f64] {
        self.inner.simulated_top()
    }
}

impl Policy for NFromPoisson {
    fn name(&self) -> String {
        format!("n_from_poisson(n={},inner={})", self.n, self.inner.name())
    }

    fn start(&self, rng: RngStream) -> Box<dyn PolicyRun + '_> {
        let times = poisson_times(self.lambda, 0.0, 1.0, &mut rng.fork(tags::ADAPTER).rng());
        Box::new(NFromPoissonRun {
            inner: self.inner.start(rng),
            times,
            seen: 0,
        })
    }
}

/// Plays an `n`-arrival policy on Poisson arrivals at rate `εn`.
///
/// `[0, 1]` is cut into `n` equal windows; the inner policy sees the first
/// arrival of each window, or 0 for an empty window. Later arrivals in a
/// window are rejected, and stopping on a 0 ends the run with nothing.
#[derive(Debug, Clone)]
pub struct PoissonFromN {
    inner: SharedPolicy,
    n: usize,
    eps: f64,
}

impl PoissonFromN {
    pub fn new(inner: SharedPolicy, eps: f64, n: usize) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("eps {eps}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n = 0".into()));
        }
        Ok(PoissonFromN { inner, n, eps })
    }

    pub fn rate(&self) -> f64 {
        self.eps * self.n as f64
    }

    /// The law of one window's presented value: `d` padded with an atom at 0
    /// of mass `e^{−ε}`.
    pub fn window_law(d: Dist, eps: f64) -> Result<Dist> {
        pad_with_zeros(d, (-eps).exp())
    }
}

struct PoissonFromNRun<'a> {
    inner: Box<dyn PolicyRun + 'a>,
    n: usize,
    next_window: usize,
    done: bool,
}

impl PoissonFromNRun<'_> {
    fn window_of(&self, t: f64) -> usize {
        ((t * self.n as f64).floor().max(0.0) as usize).min(self.n - 1)
    }
}

impl PolicyRun for PoissonFromNRun<'_> {
    fn step(&mut self, t: f64, v: f64) -> Decision {
        if self.done {
            return Decision::Reject;
        }
        let w = self.window_of(t);
        if w < self.next_window {
            return Decision::Reject;
        }
        let n = self.n as f64;
        while self.next_window < w {
            let tw = (self.next_window as f64 + 1.0) / n;
            self.next_window += 1;
            if self.inner.step(tw, 0.0) == Decision::Accept {
                self.done = true;
                return Decision::Reject;
            }
        }
        self.next_window = w + 1;
        self.inner.step((w as f64 + 1.0) / n, v)
    }

    fn threshold(&self) -> Option<f64> {
        if self.done {
            None
        } else {
            self.inner.threshold()
        }
    }
}

impl Policy for PoissonFromN {
    fn name(&self) -> String {
        format!(
            "poisson_from_n(eps={},n={},inner={})",
            self.eps,
            self.n,
            self.inner.name()
        )
    }

    fn start(&self, rng: RngStream) -> Box<dyn PolicyRun + '_> {
        Box::new(PoissonFromNRun {
            inner: self.inner.start(rng),
            n: self.n,
            next_window: 0,
            done: false,
        })
    }
}
