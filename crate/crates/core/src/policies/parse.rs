use std::sync::Arc;

use super::{
    fixed_quantile_threshold, AcceptFirst, DpOptimal, MixturePolicy, NArrivalThreePhase,
    NeverAccept, OptimalPoisson, Secretary, SharedPolicy, ThreePhase, ThreePhaseParams,
};
use crate::arrivals::ArrivalModel;
use crate::distributions::Dist;
use crate::error::{Error, Result};
use crate::textspec::Spec;

/// What a policy may know before the first arrival: the advice law and the
/// arrival model.
#[derive(Debug, Clone)]
pub struct PolicyContext {
    pub advice: Dist,
    pub model: ArrivalModel,
}

const DEFAULT_Z: f64 = 50.0;

/// Builds a policy from its text form, e.g. `threephase(gamma=0.25,z=50)` or
/// `mix(p=0.5,a=optimal(),b=secretary())`.
pub fn parse_policy(input: &str, ctx: &PolicyContext) -> Result<SharedPolicy> {
    from_spec(&Spec::parse(input)?, ctx)
}

fn from_spec(s: &Spec, ctx: &PolicyContext) -> Result<SharedPolicy> {
    ctx.model.validate()?;
    let p: SharedPolicy = match s.name.as_str() {
        "never" => {
            s.expect_keys(&[])?;
            Arc::new(NeverAccept)
        }
        "first" => {
            s.expect_keys(&[])?;
            Arc::new(AcceptFirst)
        }
        "secretary" => {
            s.expect_keys(&["cutoff"])?;
            match s.num("cutoff")? {
                Some(c) => Arc::new(Secretary::new(c)?),
                None => Arc::new(Secretary::default()),
            }
        }
        "threephase" => {
            s.expect_keys(&["gamma", "z"])?;
            let gamma = s.req_num("gamma")?;
            let z = s.num_or("z", DEFAULT_Z)?;
            match ctx.model {
                ArrivalModel::Poisson { rate } => Arc::new(ThreePhase::new(ThreePhaseParams::new(
                    gamma,
                    z,
                    rate,
                    ctx.advice.clone(),
                )?)),
                ArrivalModel::FixedN { n } => {
                    Arc::new(NArrivalThreePhase::new(gamma, z, n, ctx.advice.clone())?)
                }
            }
        }
        "fixedthreshold" => {
            s.expect_keys(&["z"])?;
            let z = s.num_or("z", DEFAULT_Z)?;
            match ctx.model {
                ArrivalModel::Poisson { rate } => {
                    Arc::new(fixed_quantile_threshold(ctx.advice.clone(), rate, z)?)
                }
                ArrivalModel::FixedN { n } => {
                    Arc::new(NArrivalThreePhase::new(0.0, z, n, ctx.advice.clone())?)
                }
            }
        }
        "optimal" => {
            s.expect_keys(&[])?;
            match ctx.model {
                ArrivalModel::Poisson { rate } => Arc::new(OptimalPoisson::new(&ctx.advice, rate)?),
                ArrivalModel::FixedN { n } => Arc::new(DpOptimal::new(&ctx.advice, n)?),
            }
        }
        "dp" => {
            s.expect_keys(&["n"])?;
            let n = match (s.num("n")?, ctx.model) {
                (Some(n), _) => count(s, "n", n)?,
                (None, ArrivalModel::FixedN { n }) => n,
                (None, ArrivalModel::Poisson { .. }) => return Err(s.bad("n", "required")),
            };
            Arc::new(DpOptimal::new(&ctx.advice, n)?)
        }
        "mix" => {
            s.expect_keys(&["p", "a", "b"])?;
            Arc::new(MixturePolicy::new(
                s.req_num("p")?,
                from_spec(s.req_spec("a")?, ctx)?,
                from_spec(s.req_spec("b")?, ctx)?,
            )?)
        }
        other => {
            return Err(Error::Parse {
                input: s.to_string(),
                reason: format!("unknown policy '{other}'"),
            })
        }
    };
    Ok(p)
}

fn count(s: &Spec, key: &str, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(s.bad(key, "expected a positive integer"))
    }
}
