use std::sync::Arc;

use super::{
    pad_with_zeros, BoostedAdversary, Dist, Exponential, Mixture, Pareto, Point, Shifted, Uniform,
};
use crate::error::{Error, Result};
use crate::kertz::HardInstance;
use crate::textspec::Spec;

/// Builds a law from its text form, e.g. `uniform(a=0,b=1)` or
/// `padded(p=0.9,base=hard(n=8,q=0.001))`.
pub fn parse_distribution(input: &str) -> Result<Dist> {
    from_spec(&Spec::parse(input)?)
}

pub(crate) fn from_spec(s: &Spec) -> Result<Dist> {
    let d: Dist = match s.name.as_str() {
        "uniform" => {
            s.expect_keys(&["a", "b"])?;
            Arc::new(Uniform::new(s.num_or("a", 0.0)?, s.num_or("b", 1.0)?)?)
        }
        "exponential" | "exp" => {
            s.expect_keys(&["rate"])?;
            Arc::new(Exponential::new(s.num_or("rate", 1.0)?)?)
        }
        "pareto" => {
            s.expect_keys(&["alpha", "xm", "cap"])?;
            Arc::new(Pareto::new(
                s.req_num("alpha")?,
                s.num_or("xm", 1.0)?,
                s.num_or("cap", f64::INFINITY)?,
            )?)
        }
        "point" | "zero" => {
            s.expect_keys(&["at"])?;
            Arc::new(Point::new(s.num_or("at", 0.0)?)?)
        }
        "shift" => {
            s.expect_keys(&["by", "base"])?;
            Arc::new(Shifted::new(
                s.req_num("by")?,
                from_spec(s.req_spec("base")?)?,
            )?)
        }
        "padded" => {
            s.expect_keys(&["p", "base"])?;
            pad_with_zeros(from_spec(s.req_spec("base")?)?, s.req_num("p")?)?
        }
        "mixture" => {
            s.expect_keys(&["w", "a", "b"])?;
            let w = s.req_num("w")?;
            if !(0.0..=1.0).contains(&w) {
                return Err(s.bad("w", "outside [0, 1]"));
            }
            Arc::new(Mixture::new(vec![
                (w, from_spec(s.req_spec("a")?)?),
                (1.0 - w, from_spec(s.req_spec("b")?)?),
            ])?)
        }
        "hard" => {
            s.expect_keys(&["n", "q"])?;
            Arc::new(HardInstance::build(s.req_num("n")?, s.num_or("q", 1e-3)?)?)
        }
        "boosted" => {
            s.expect_keys(&["n", "q", "b", "boost", "high_rate", "high_value"])?;
            let inst = Arc::new(HardInstance::build(s.req_num("n")?, s.num_or("q", 1e-3)?)?);
            let high_value = s.num_or("high_value", 1e3 * inst.h())?;
            Arc::new(BoostedAdversary::new(
                inst,
                s.req_num("b")?,
                s.num_or("boost", 1.0)?,
                s.num_or("high_rate", 0.0)?,
                high_value,
            )?)
        }
        other => {
            return Err(Error::Parse {
                input: s.to_string(),
                reason: format!("unknown family `{other}`"),
            })
        }
    };
    Ok(d)
}
