//! Arrival sequences for the Poisson and fixed-n models, and the two
//! reductions between them.

mod reductions;

use std::io::{self, Write};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::distributions::ValueDistribution;
use crate::error::{Error, Result};

pub use reductions::{NFromPoisson, PoissonFromN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum ArrivalModel {
    Poisson { rate: f64 },
    FixedN { n: usize },
}

impl ArrivalModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArrivalModel::Poisson { rate } if !(rate >= 0.0 && rate.is_finite()) => {
                Err(Error::InvalidParameter(format!("rate {rate}")))
            }
            ArrivalModel::FixedN { n: 0 } => Err(Error::InvalidParameter("n = 0".into())),
            _ => Ok(()),
        }
    }

    /// Expected number of arrivals on `[0, 1]`.
    pub fn intensity(&self) -> f64 {
        match *self {
            ArrivalModel::Poisson { rate } => rate,
            ArrivalModel::FixedN { n } => n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalSequence {
    pub entries: Vec<Arrival>,
    pub horizon: (f64, f64),
    pub model: ArrivalModel,
}

impl ArrivalSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest value, or 0 when empty.
    pub fn max_value(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries
            .iter()
            .map(|a| a.value)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time,value")?;
        for a in &self.entries {
            writeln!(w, "{},{}", a.time, a.value)?;
        }
        Ok(())
    }
}

/// Arrival times of a rate-`rate` Poisson process on `[t_start, t_end)`.
pub fn poisson_times<R: RngCore>(rate: f64, t_start: f64, t_end: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let mut t = t_start;
    loop {
        t += -(1.0 - rng.random::<f64>()).ln() / rate;
        if t >= t_end {
            return out;
        }
        out.push(t);
    }
}

/// Poisson arrivals on `[t_start, t_end)` with i.i.d. values from `d`.
pub fn sample_poisson<R: RngCore>(
    d: &dyn ValueDistribution,
    rate: f64,
    t_start: f64,
    t_end: f64,
    rng: &mut R,
) -> Result<ArrivalSequence> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("rate {rate}")));
    }
    if !(t_start.is_finite() && t_end.is_finite() && t_start <= t_end) {
        return Err(Error::InvalidParameter(format!(
            "horizon [{t_start}, {t_end}]"
        )));
    }
    let times = poisson_times(rate, t_start, t_end, rng);
    let entries = times
        .into_iter()
        .map(|time| Arrival {
            time,
            value: d.sample(rng),
        })
        .collect();
    Ok(ArrivalSequence {
        entries,
        horizon: (t_start, t_end),
        model: ArrivalModel::Poisson { rate },
    })
}

/// `n` i.i.d. values at the synthetic times `i/n`.
pub fn sample_fixed_n<R: RngCore>(
    d: &dyn ValueDistribution,
    n: usize,
    rng: &mut R,
) -> Result<ArrivalSequence> {
    if n == 0 {
        return Err(Error::InvalidParameter("n = 0".into()));
    }
    let entries = (1..=n)
        .map(|i| Arrival {
            time: i as f64 / n as f64,
            value: d.sample(rng),
        })
        .collect();
    Ok(ArrivalSequence {
        entries,
        horizon: (0.0, 1.0),
        model: ArrivalModel::FixedN { n },
    })
}

/// One sequence on `[0, 1]` under `model`.
pub fn sample_model<R: RngCore>(
    d: &dyn ValueDistribution,
    model: ArrivalModel,
    rng: &mut R,
) -> Result<ArrivalSequence> {
    match model {
        ArrivalModel::Poisson { rate } => sample_poisson(d, rate, 0.0, 1.0, rng),
        ArrivalModel::FixedN { n } => sample_fixed_n(d, n, rng),
    }
}
