use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::adversary::{adversary_suite, SuiteOptions};
use super::{check_trials, estimate_ratio, RatioEstimate, SEQUENCE};
use crate::arrivals::{sample_poisson, ArrivalModel, NFromPoisson, PoissonFromN};
use crate::distributions::{expected_max_n, pad_with_zeros, Dist, Pareto, Point};
use crate::error::{Error, Result};
use crate::kertz::{analytic_opt_and_max, HardInstance, OptMax};
use crate::numerics::tau_pair;
use crate::policies::{
    fixed_quantile_threshold, parse_policy, play, DpOptimal, OptimalPoisson, Policy, PolicyContext,
    Secretary, ThreePhase, ThreePhaseParams,
};
use crate::rng::RngStream;
use crate::textspec::Spec;

/// Shared setup of the ThreePhase experiments.
#[derive(Debug, Clone)]
pub struct CrConfig {
    pub d: Dist,
    pub z: f64,
    pub rate: f64,
    pub trials: usize,
    pub seed: u64,
    pub suite: SuiteOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberEstimate {
    pub role: String,
    pub estimate: RatioEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyRobustness {
    pub gamma: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub consistency: RatioEstimate,
    /// The worst member of the adversary suite.
    pub robustness: RatioEstimate,
    pub worst: String,
    pub members: Vec<MemberEstimate>,
    /// Smallest probability of stopping on the maximum, over all runs.
    pub min_p_best: f64,
}

fn three_phase(gamma: f64, cfg: &CrConfig, advice: Dist) -> Result<ThreePhase> {
    Ok(ThreePhase::new(ThreePhaseParams::new(
        gamma, cfg.z, cfg.rate, advice,
    )?))
}

/// ThreePhase with correct advice, and its worst ratio over the adversary
/// suite. All runs share the seed, so every advice law faces the same
/// arrivals.
pub fn consistency_robustness(gamma: f64, cfg: &CrConfig) -> Result<ConsistencyRobustness> {
    let (tau1, tau2) = tau_pair(gamma)?;
    let model = ArrivalModel::Poisson { rate: cfg.rate };
    let run = |advice: Dist| -> Result<RatioEstimate> {
        let p = three_phase(gamma, cfg, advice)?;
        estimate_ratio(&p, cfg.d.as_ref(), model, cfg.trials, cfg.seed)
    };
    let consistency = run(cfg.d.clone())?;
    let mut members = Vec::new();
    for adv in adversary_suite(&cfg.d, cfg.rate, &cfg.suite)? {
        members.push(MemberEstimate {
            role: adv.role,
            estimate: run(adv.advice)?,
        });
    }
    let worst = members
        .iter()
        .min_by(|a, b| a.estimate.ratio.total_cmp(&b.estimate.ratio))
        .expect("the suite is never empty");
    let min_p_best = members
        .iter()
        .map(|m| m.estimate.p_best)
        .fold(consistency.p_best, f64::min);
    Ok(ConsistencyRobustness {
        gamma,
        tau1,
        tau2,
        consistency,
        robustness: worst.estimate,
        worst: worst.role.clone(),
        min_p_best,
        members,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceRow {
    pub lprime: usize,
    /// P[ALG's value is among the top `lprime` of simulated and real arrivals].
    pub p_alg: f64,
    /// The same event for the largest real arrival.
    pub p_max: f64,
}

/// How often ThreePhase, with correct advice, and the real maximum each land
/// in the top `ℓ′` of all simulated and real values, for `ℓ′ = 1..=lprime_max`.
pub fn dominance_profile(
    gamma: f64,
    cfg: &CrConfig,
    lprime_max: usize,
) -> Result<Vec<DominanceRow>> {
    check_trials(cfg.trials)?;
    let policy = three_phase(gamma, cfg, cfg.d.clone())?;
    let ell = policy.params().ell;
    if lprime_max == 0 || lprime_max > ell {
        return Err(Error::InvalidParameter(format!(
            "lprime_max = {lprime_max} outside 1..={ell}"
        )));
    }
    let hits: Vec<(Vec<bool>, Vec<bool>)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let rng = RngStream::new(cfg.seed, i);
            let seq = sample_poisson(
                cfg.d.as_ref(),
                cfg.rate,
                0.0,
                1.0,
                &mut rng.fork(SEQUENCE).rng(),
            )?;
            let mut run = policy.start(rng);
            let accepted = play(run.as_mut(), &seq.entries).map(|k| seq.entries[k].value);
            let mut all: Vec<f64> = run.simulated_top().to_vec();
            all.extend(seq.entries.iter().map(|a| a.value));
            all.sort_by(|a, b| b.total_cmp(a));
            let real_max = (!seq.is_empty()).then(|| seq.max_value());
            let reaches = |v: Option<f64>, l: usize| match (v, all.get(l - 1)) {
                (Some(v), Some(&cut)) => v >= cut,
                (Some(_), None) => true,
                (None, _) => false,
            };
            Ok((
                (1..=lprime_max).map(|l| reaches(accepted, l)).collect(),
                (1..=lprime_max).map(|l| reaches(real_max, l)).collect(),
            ))
        })
        .collect::<Result<_>>()?;
    let m = cfg.trials as f64;
    Ok((1..=lprime_max)
        .map(|l| DominanceRow {
            lprime: l,
            p_alg: hits.iter().filter(|h| h.0[l - 1]).count() as f64 / m,
            p_max: hits.iter().filter(|h| h.1[l - 1]).count() as f64 / m,
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct HardInstanceReport {
    pub n: f64,
    pub q: f64,
    pub beta_n: f64,
    pub h: f64,
    pub atom_mass: f64,
    pub analytic: OptMax,
    /// `r(0)` of the solved threshold curve.
    pub curve_value: f64,
    pub empirical: RatioEstimate,
}

/// The optimal policy on the hard instance, by simulation and in closed form.
pub fn hard_instance_experiment(
    n: f64,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<HardInstanceReport> {
    let inst = HardInstance::build(n, q)?;
    let analytic = analytic_opt_and_max(&inst)?;
    let (beta_n, h, atom_mass) = (inst.beta_n(), inst.h(), inst.atom_mass());
    let d: Dist = Arc::new(inst);
    let policy = OptimalPoisson::new(&d, n)?;
    let empirical = estimate_ratio(
        &policy,
        d.as_ref(),
        ArrivalModel::Poisson { rate: n },
        trials,
        seed,
    )?;
    Ok(HardInstanceReport {
        n,
        q,
        beta_n,
        h,
        atom_mass,
        analytic,
        curve_value: policy.curve().value(),
        empirical,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    pub rate: f64,
    pub c: f64,
    /// Total-variation distance between the law and the all-zero advice.
    pub tv_distance: f64,
    pub law: String,
    pub secretary: RatioEstimate,
    pub threephase_secretary: RatioEstimate,
    pub threephase: RatioEstimate,
    pub fixed_threshold: RatioEstimate,
}

/// A heavy-tailed law seen through zero padding: nonzero values arrive at
/// rate `c` among `rate` arrivals, and the advice is the point mass at 0,
/// which is within `c/rate` in total variation.
pub fn smoothness_demo(rate: f64, c: f64, trials: usize, seed: u64) -> Result<SmoothnessReport> {
    if !(c > 0.0 && c <= rate && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < c = {c} <= rate = {rate}"
        )));
    }
    let base: Dist = Arc::new(Pareto::new(1.5, 1.0, 1e4)?);
    let d = pad_with_zeros(base, 1.0 - c / rate)?;
    let advice: Dist = Arc::new(Point::new(0.0)?);
    let model = ArrivalModel::Poisson { rate };
    let est = |p: &dyn Policy| estimate_ratio(p, d.as_ref(), model, trials, seed);
    let z = 50.0;
    let tp = |g: f64| -> Result<ThreePhase> {
        Ok(ThreePhase::new(ThreePhaseParams::new(
            g,
            z,
            rate,
            advice.clone(),
        )?))
    };
    Ok(SmoothnessReport {
        rate,
        c,
        tv_distance: c / rate,
        law: d.describe(),
        secretary: est(&Secretary::default())?,
        threephase_secretary: est(&tp((-1.0f64).exp())?)?,
        threephase: est(&tp(0.25)?)?,
        fixed_threshold: est(&fixed_quantile_threshold(advice.clone(), rate, z)?)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Poisson arrivals at rate `εn` handled by an `n`-arrival policy.
    PoissonFromN,
    /// `n` arrivals handled by a Poisson policy at rate `n(1 − ε)`.
    NFromPoisson,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub reduction: Reduction,
    pub inner: String,
    pub n: usize,
    pub eps: f64,
    /// The inner policy in its own model.
    pub reference: RatioEstimate,
    /// The exact optimal ratio of the inner model, when the inner policy is
    /// the backward-induction optimum.
    pub reference_exact: Option<f64>,
    /// The guarantee the reduction carries over from `reference`.
    pub guarantee: f64,
    pub reduced: RatioEstimate,
}

/// Runs `inner_spec` through one of the reductions on values from `d`.
///
/// `eps` sets the Poisson rate `εn` for [`Reduction::PoissonFromN`]; the other
/// direction fixes `ε = √(ln n / n)` itself.
pub fn reduction_experiment(
    reduction: Reduction,
    d: &Dist,
    n: usize,
    eps: f64,
    inner_spec: &str,
    trials: usize,
    seed: u64,
) -> Result<ReductionReport> {
    let name = Spec::parse(inner_spec)?.name;
    match reduction {
        Reduction::PoissonFromN => {
            let window = PoissonFromN::window_law(d.clone(), eps)?;
            let ctx = PolicyContext {
                advice: window.clone(),
                model: ArrivalModel::FixedN { n },
            };
            let inner = parse_policy(inner_spec, &ctx)?;
            let reference =
                estimate_ratio(inner.as_ref(), window.as_ref(), ctx.model, trials, seed)?;
            let reference_exact = if name == "dp" || name == "optimal" {
                let dp = DpOptimal::new(&window, n)?;
                Some(dp.value() / expected_max_n(window.as_ref(), n)?)
            } else {
                None
            };
            let wrapped = PoissonFromN::new(inner.clone(), eps, n)?;
            let model = ArrivalModel::Poisson {
                rate: wrapped.rate(),
            };
            let reduced = estimate_ratio(&wrapped, d.as_ref(), model, trials, seed)?;
            let base = reference_exact.unwrap_or(reference.ratio);
            Ok(ReductionReport {
                reduction,
                inner: inner.name(),
                n,
                eps,
                reference,
                reference_exact,
                guarantee: base * (1.0 - eps / 2.0),
                reduced,
            })
        }
        Reduction::NFromPoisson => {
            let probe = NFromPoisson::new(Arc::new(crate::policies::NeverAccept), n)?;
            let model = ArrivalModel::Poisson {
                rate: probe.lambda(),
            };
            let ctx = PolicyContext {
                advice: d.clone(),
                model,
            };
            let inner = parse_policy(inner_spec, &ctx)?;
            let reference = estimate_ratio(inner.as_ref(), d.as_ref(), model, trials, seed)?;
            let wrapped = NFromPoisson::new(inner.clone(), n)?;
            let reduced = estimate_ratio(
                &wrapped,
                d.as_ref(),
                ArrivalModel::FixedN { n },
                trials,
                seed,
            )?;
            Ok(ReductionReport {
                reduction,
                inner: inner.name(),
                n,
                eps: wrapped.eps(),
                reference,
                reference_exact: None,
                guarantee: reference.ratio - 4.0 * wrapped.eps(),
                reduced,
            })
        }
    }
}
