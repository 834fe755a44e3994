use serde::{Deserialize, Serialize};

use super::kertz_constant;
use crate::error::{domain, Error, Result};

/// Which form of the cubic penalty in the consistency bound to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CubicPenalty {
    /// `εδ − (15/4)ε³`
    #[default]
    Theorem,
    /// `εδ − (3/2)ε³(δ + 3/2)`
    Lemma,
}

/// Joint upper bounds on consistency (`alpha_ub`) and robustness
/// (`beta_ub`) for one choice of `(ε, δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityPoint {
    pub eps: f64,
    pub delta: f64,
    pub alpha_ub: f64,
    pub beta_ub: f64,
    pub beta0: f64,
}

pub fn impossibility_bounds(eps: f64, delta: f64) -> Result<ImpossibilityPoint> {
    impossibility_bounds_with(eps, delta, CubicPenalty::Theorem)
}

pub fn impossibility_bounds_with(
    eps: f64,
    delta: f64,
    penalty: CubicPenalty,
) -> Result<ImpossibilityPoint> {
    if eps.is_nan() || !(0.0..=0.125).contains(&eps) {
        return Err(domain("eps", eps, "[0, 1/8]"));
    }
    if delta.is_nan() || !(delta > 0.0 && delta <= 1.0) {
        return Err(domain("delta", delta, "(0, 1]"));
    }
    let beta0 = kertz_constant();
    let e3 = eps * eps * eps;
    let gap = match penalty {
        CubicPenalty::Theorem => eps * delta - 3.75 * e3,
        CubicPenalty::Lemma => eps * delta - 1.5 * e3 * (delta + 1.5),
    };
    let alpha_ub = (beta0 - gap.powi(3) / 76.0).min(beta0);
    let beta_ub = 1.0 - (1.0 - eps) * secretary_gap(delta);
    Ok(ImpossibilityPoint {
        eps,
        delta,
        alpha_ub,
        beta_ub,
        beta0,
    })
}

/// `δ^{δ/(1−δ)} − δ^{1/(1−δ)} = δ^{δ/(1−δ)}(1 − δ)`, which is 0 at `δ = 1`.
fn secretary_gap(delta: f64) -> f64 {
    if delta >= 1.0 {
        return 0.0;
    }
    (delta * delta.ln() / (1.0 - delta)).exp() * (1.0 - delta)
}

/// Pareto staircase over the grid: sorted by `beta_ub`, each point has a
/// strictly smaller `alpha_ub` than every point before it.
pub fn impossibility_frontier(
    grid_eps: &[f64],
    grid_delta: &[f64],
    penalty: CubicPenalty,
) -> Result<Vec<ImpossibilityPoint>> {
    if grid_eps.is_empty() || grid_delta.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let mut all = Vec::with_capacity(grid_eps.len() * grid_delta.len());
    for &e in grid_eps {
        for &d in grid_delta {
            all.push(impossibility_bounds_with(e, d, penalty)?);
        }
    }
    all.sort_by(|a, b| {
        a.beta_ub
            .total_cmp(&b.beta_ub)
            .then(a.alpha_ub.total_cmp(&b.alpha_ub))
    });
    let mut out: Vec<ImpossibilityPoint> = Vec::new();
    for p in all {
        if out.last().is_none_or(|last| p.alpha_ub < last.alpha_ub) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Smallest `alpha_ub` on the staircase with `beta_ub ≤ target`.
pub fn envelope_alpha(frontier: &[ImpossibilityPoint], target: f64) -> Option<f64> {
    frontier
        .iter()
        .filter(|p| p.beta_ub <= target)
        .map(|p| p.alpha_ub)
        .fold(None, |acc: Option<f64>, a| {
            Some(acc.map_or(a, |b| b.min(a)))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_point() {
        let p = impossibility_bounds(0.125, 0.5).unwrap();
        let gap: f64 = 0.125 * 0.5 - 3.75 * 0.125f64.powi(3);
        assert!((p.alpha_ub - (p.beta0 - gap.powi(3) / 76.0)).abs() < 1e-15);
        assert!((p.beta0 - p.alpha_ub - 2.210e-6).abs() < 1e-9);
        assert!((p.beta_ub - 0.78125).abs() < 1e-15);
    }

    #[test]
    fn eps_zero_and_limits() {
        for d in [1e-6, 0.3, 0.5, 1.0] {
            let p = impossibility_bounds(0.0, d).unwrap();
            assert_eq!(p.alpha_ub, p.beta0);
            let direct = if d < 1.0 {
                1.0 - (d.powf(d / (1.0 - d)) - d.powf(1.0 / (1.0 - d)))
            } else {
                1.0
            };
            assert!((p.beta_ub - direct).abs() < 1e-12);
        }
        let p = impossibility_bounds(0.1, 1e-12).unwrap();
        assert!((p.beta_ub - 0.1).abs() < 1e-9);
        assert_eq!(impossibility_bounds(0.1, 1.0).unwrap().beta_ub, 1.0);
    }

    #[test]
    fn forms_agree_at_delta_one() {
        let a = impossibility_bounds_with(0.1, 1.0, CubicPenalty::Theorem).unwrap();
        let b = impossibility_bounds_with(0.1, 1.0, CubicPenalty::Lemma).unwrap();
        assert!((a.alpha_ub - b.alpha_ub).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(impossibility_bounds(-0.01, 0.5).is_err());
        assert!(impossibility_bounds(0.2, 0.5).is_err());
        assert!(impossibility_bounds(0.1, 0.0).is_err());
        assert!(impossibility_bounds(0.1, 1.5).is_err());
        assert!(impossibility_frontier(&[], &[0.5], CubicPenalty::Theorem).is_err());
    }

    #[test]
    fn single_point_echoes() {
        let f = impossibility_frontier(&[0.1], &[0.3], CubicPenalty::Theorem).unwrap();
        assert_eq!(f, vec![impossibility_bounds(0.1, 0.3).unwrap()]);
    }

    proptest! {
        #[test]
        fn bounds_are_finite_and_capped(eps in 0.0f64..=0.125, delta in 1e-9f64..=1.0) {
            let p = impossibility_bounds(eps, delta).unwrap();
            prop_assert!(p.alpha_ub.is_finite() && p.beta_ub.is_finite());
            prop_assert!(p.alpha_ub <= p.beta0);
            prop_assert!(p.beta_ub <= 1.0);
        }

        #[test]
        fn superset_never_raises_envelope(
            eps in prop::collection::vec(0.0f64..=0.125, 1..6),
            extra_eps in prop::collection::vec(0.0f64..=0.125, 0..4),
            delta in prop::collection::vec(0.01f64..=1.0, 1..6),
            extra_delta in prop::collection::vec(0.01f64..=1.0, 0..4),
            target in 0.0f64..=1.0,
        ) {
            let small = impossibility_frontier(&eps, &delta, CubicPenalty::Theorem).unwrap();
            let mut e2 = eps.clone();
            e2.extend(extra_eps);
            let mut d2 = delta.clone();
            d2.extend(extra_delta);
            let big = impossibility_frontier(&e2, &d2, CubicPenalty::Theorem).unwrap();
            if let Some(a) = envelope_alpha(&small, target) {
                let b = envelope_alpha(&big, target).unwrap();
                prop_assert!(b <= a);
            }
        }
    }
}
