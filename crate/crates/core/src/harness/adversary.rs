use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::{lemma_boost, pad_with_zeros, BoostedAdversary, Dist, Uniform};
use crate::error::{Error, Result};

/// A misleading advice law and the role it plays.
#[derive(Debug, Clone)]
pub struct Adversary {
    pub role: String,
    pub advice: Dist,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Expected number of nonzero advice arrivals in the padded member.
    pub pad_c: f64,
    /// `ε` and `δ` used to size the boost.
    pub eps: f64,
    pub delta: f64,
    /// Rate of the extra high-value arrivals.
    pub high_rate: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            pad_c: 10.0,
            eps: 0.125,
            delta: 0.5,
            high_rate: 0.1,
        }
    }
}

/// Advice laws that are too low, too high, nearly right but zero-padded
/// (when `c < rate`), and, for a hard instance, the boosted variant when its
/// masses fit.
pub fn adversary_suite(d: &Dist, rate: f64, opts: &SuiteOptions) -> Result<Vec<Adversary>> {
    if !(rate > 0.0 && opts.pad_c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rate = {rate}, c = {}",
            opts.pad_c
        )));
    }
    let (lo, hi) = d.support();
    let too_low: Dist = if lo > 1e-3 {
        Arc::new(Uniform::new(0.0, 1e-3)?)
    } else {
        Arc::new(Uniform::new(lo - 2e-3, lo - 1e-3)?)
    };
    let top = if hi.is_finite() {
        hi
    } else {
        d.quantile(1.0 - 1e-12)
    };
    let base = 1e3f64.max(2.0 * top);
    let mut out = vec![
        Adversary {
            role: "too_low".into(),
            advice: too_low,
        },
        Adversary {
            role: "too_high".into(),
            advice: Arc::new(Uniform::new(base, base + 1.0)?),
        },
    ];
    if opts.pad_c < rate {
        out.push(Adversary {
            role: "padded".into(),
            advice: pad_with_zeros(d.clone(), 1.0 - opts.pad_c / rate)?,
        });
    }
    if let Some(inst) = d.hard_instance() {
        let inst = Arc::new(inst.clone());
        let b = 0.5 * (inst.r_star().eval(opts.eps)? + inst.r_star().first());
        let boost = lemma_boost(&inst, b, opts.eps, opts.delta)?;
        let high_value = 10.0 * inst.h();
        // infeasible when the prescribed boost overfills the unit mass
        if let Ok(adv) = BoostedAdversary::new(inst, b, boost, opts.high_rate, high_value) {
            out.push(Adversary {
                role: "boosted".into(),
                advice: Arc::new(adv),
            });
        }
    }
    Ok(out)
}
