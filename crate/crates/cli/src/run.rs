use std::io::Write;

use anyhow::Result;
use serde::Serialize;
use serde_json::json;
use stopkit_core::harness::{
    dominance_profile, estimate_ratio, frontier_sweep, hard_instance_experiment,
    reduction_experiment, smoothness_demo, write_frontier_csv, RatioEstimate,
};
use stopkit_core::kertz::{
    beta_n, impossibility_bounds_with, impossibility_frontier, kertz_constant,
};

use crate::config::{ExperimentConfig, Format, Job};

/// Quotes a CSV field when it holds a comma or a quote.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn estimate_cols(e: &RatioEstimate) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        e.alg_mean, e.max_mean, e.ratio, e.std_err, e.p_best, e.trials, e.seed
    )
}

const ESTIMATE_HEADER: &str = "alg_mean,max_mean,ratio,std_err,p_best,trials,seed";

/// Output of one run: a CSV body, or a JSON result.
struct Output {
    csv: Vec<u8>,
    json: serde_json::Value,
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

fn execute(job: &Job) -> Result<Output> {
    let mut csv = Vec::new();
    let json = match job {
        Job::Frontier { grid, mode } => {
            let pts = frontier_sweep(grid, mode)?;
            write_frontier_csv(&pts, &mut csv)?;
            to_json(&pts)?
        }
        Job::Simulate {
            dist,
            policy,
            model,
            trials,
            seed,
        } => {
            let e = estimate_ratio(policy.as_ref(), dist.as_ref(), *model, *trials, *seed)?;
            writeln!(csv, "policy,dist,{ESTIMATE_HEADER}")?;
            writeln!(
                csv,
                "{},{},{}",
                field(&policy.name()),
                field(&dist.describe()),
                estimate_cols(&e)
            )?;
            json!({ "policy": policy.name(), "dist": dist.describe(), "estimate": e })
        }
        Job::Kertz { n, limit } => {
            writeln!(csv, "n,beta")?;
            let mut rows = Vec::new();
            if let Some(n) = n {
                let b = beta_n(*n)?;
                writeln!(csv, "{n},{b}")?;
                rows.push(json!({ "n": n, "beta": b }));
            }
            if *limit {
                let b = kertz_constant();
                writeln!(csv, "inf,{b}")?;
                rows.push(json!({ "n": "inf", "beta": b }));
            }
            json!(rows)
        }
        Job::HardInstance { n, q, trials, seed } => {
            let r = hard_instance_experiment(*n, *q, *trials, *seed)?;
            writeln!(
                csv,
                "n,q,beta_n,h,atom_mass,opt_q,max_q,analytic_ratio,curve_value,{ESTIMATE_HEADER}"
            )?;
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.q,
                r.beta_n,
                r.h,
                r.atom_mass,
                r.analytic.opt_q,
                r.analytic.max_q,
                r.analytic.ratio,
                r.curve_value,
                estimate_cols(&r.empirical)
            )?;
            to_json(&r)?
        }
        Job::Bounds {
            eps,
            delta,
            penalty,
            scan,
        } => {
            let pts = if *scan {
                impossibility_frontier(eps, delta, *penalty)?
            } else {
                vec![impossibility_bounds_with(eps[0], delta[0], *penalty)?]
            };
            writeln!(csv, "eps,delta,alpha_ub,beta_ub,beta0")?;
            for p in &pts {
                writeln!(
                    csv,
                    "{},{},{},{},{}",
                    p.eps, p.delta, p.alpha_ub, p.beta_ub, p.beta0
                )?;
            }
            to_json(&pts)?
        }
        Job::Dominance {
            gamma,
            cfg,
            lprime_max,
        } => {
            let rows = dominance_profile(*gamma, cfg, *lprime_max)?;
            writeln!(csv, "lprime,p_alg,p_max")?;
            for r in &rows {
                writeln!(csv, "{},{},{}", r.lprime, r.p_alg, r.p_max)?;
            }
            to_json(&rows)?
        }
        Job::Reduce {
            reduction,
            dist,
            n,
            eps,
            policy,
            trials,
            seed,
        } => {
            let r = reduction_experiment(*reduction, dist, *n, *eps, policy, *trials, *seed)?;
            writeln!(
                csv,
                "reduction,inner,n,eps,reference_ratio,reference_std_err,reference_exact,guarantee,{ESTIMATE_HEADER}"
            )?;
            let kind = to_json(&r.reduction)?;
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                kind.as_str().unwrap_or_default(),
                field(&r.inner),
                r.n,
                r.eps,
                r.reference.ratio,
                r.reference.std_err,
                r.reference_exact.map(|v| v.to_string()).unwrap_or_default(),
                r.guarantee,
                estimate_cols(&r.reduced)
            )?;
            to_json(&r)?
        }
        Job::Smoothness {
            rate,
            c,
            trials,
            seed,
        } => {
            let r = smoothness_demo(*rate, *c, *trials, *seed)?;
            writeln!(csv, "policy,rate,c,tv_distance,{ESTIMATE_HEADER}")?;
            for (name, e) in [
                ("secretary", &r.secretary),
                ("threephase_secretary", &r.threephase_secretary),
                ("threephase", &r.threephase),
                ("fixed_threshold", &r.fixed_threshold),
            ] {
                writeln!(
                    csv,
                    "{name},{},{},{},{}",
                    r.rate,
                    r.c,
                    r.tv_distance,
                    estimate_cols(e)
                )?;
            }
            to_json(&r)?
        }
    };
    Ok(Output { csv, json })
}

/// Runs `job` and renders it with the config echo on top.
pub fn render(job: &Job, echo: &ExperimentConfig) -> Result<Vec<u8>> {
    let out = execute(job)?;
    let mut buf = Vec::new();
    match echo.format.unwrap_or_default() {
        Format::Csv => {
            writeln!(buf, "# config={}", serde_json::to_string(echo)?)?;
            buf.extend_from_slice(&out.csv);
        }
        Format::Json => {
            let doc = json!({ "config": echo, "result": out.json });
            serde_json::to_writer_pretty(&mut buf, &doc)?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}
