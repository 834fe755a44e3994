use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::experiments::{consistency_robustness, CrConfig};
use crate::error::{Error, Result};
use crate::kertz::kertz_constant;
use crate::numerics::tau_pair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSource {
    Theory,
    Empirical,
    Interpolated,
}

impl PointSource {
    fn as_str(self) -> &'static str {
        match self {
            PointSource::Theory => "theory",
            PointSource::Empirical => "empirical",
            PointSource::Interpolated => "interpolated",
        }
    }
}

/// A consistency (`alpha`) and robustness (`beta`) pair for ThreePhase with
/// parameter `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub gamma: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_stderr: f64,
    pub beta_stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub source: PointSource,
}

/// `α = γ + e^{−τ1} − e^{−τ2}`, `β = γ`.
pub fn frontier_theoretical(gamma: f64) -> Result<FrontierPoint> {
    let (tau1, tau2) = tau_pair(gamma)?;
    Ok(FrontierPoint {
        gamma,
        tau1,
        tau2,
        alpha: gamma + (-tau1).exp() - (-tau2).exp(),
        beta: gamma,
        alpha_stderr: 0.0,
        beta_stderr: 0.0,
        trials: 0,
        seed: 0,
        source: PointSource::Theory,
    })
}

/// The `γ*` where the line from `(β, α) = (0, β0)` touches the theory curve,
/// and that line's slope. Mixing ThreePhase(`γ*`) with the optimal policy
/// traces the segment.
pub fn interpolation_tangent() -> Result<(f64, f64)> {
    let b0 = kertz_constant();
    let slope = |g: f64| -> f64 {
        frontier_theoretical(g).map_or(f64::NEG_INFINITY, |p| (p.alpha - b0) / g)
    };
    let top = (-1.0f64).exp();
    let m = 4000;
    let at = |i: usize| top * i as f64 / m as f64;
    let best = (1..=m)
        .max_by(|&i, &j| slope(at(i)).total_cmp(&slope(at(j))))
        .expect("nonempty grid");
    // golden-section refinement on the neighbouring cells
    let (mut a, mut b) = (at(best - 1).max(1e-12), at((best + 1).min(m)));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-13 {
        let (c, d) = (b - phi * (b - a), a + phi * (b - a));
        if slope(c) >= slope(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let g = 0.5 * (a + b);
    Ok((g, slope(g)))
}

#[derive(Debug, Clone)]
pub enum FrontierMode {
    Theory,
    Empirical(CrConfig),
}

/// Frontier points for every `γ` in `grid`, sorted by `β`.
///
/// Theory mode adds the interpolated segment from `(0, β0)` to the tangency
/// point, sampled at its ends and at every grid `β` it covers.
pub fn frontier_sweep(grid: &[f64], mode: &FrontierMode) -> Result<Vec<FrontierPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty gamma grid".into()));
    }
    let mut out = Vec::new();
    match mode {
        FrontierMode::Theory => {
            for &g in grid {
                out.push(frontier_theoretical(g)?);
            }
            let (g_star, slope) = interpolation_tangent()?;
            let b0 = kertz_constant();
            let anchor = frontier_theoretical(g_star)?;
            let segment = |beta: f64| FrontierPoint {
                alpha: b0 + slope * beta,
                beta,
                source: PointSource::Interpolated,
                ..anchor
            };
            out.push(segment(0.0));
            out.extend(
                grid.iter()
                    .filter(|&&g| g > 0.0 && g < g_star)
                    .map(|&g| segment(g)),
            );
            out.push(FrontierPoint {
                source: PointSource::Interpolated,
                ..anchor
            });
        }
        FrontierMode::Empirical(cfg) => {
            for &g in grid {
                let (tau1, tau2) = tau_pair(g)?;
                let cr = consistency_robustness(g, cfg)?;
                out.push(FrontierPoint {
                    gamma: g,
                    tau1,
                    tau2,
                    alpha: cr.consistency.ratio,
                    beta: cr.robustness.ratio,
                    alpha_stderr: cr.consistency.std_err,
                    beta_stderr: cr.robustness.std_err,
                    trials: cfg.trials,
                    seed: cfg.seed,
                    source: PointSource::Empirical,
                });
            }
        }
    }
    out.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    Ok(out)
}

/// CSV with one row per point; numbers in shortest round-trip form.
pub fn write_frontier_csv<W: Write>(points: &[FrontierPoint], mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "gamma,tau1,tau2,alpha,beta,alpha_stderr,beta_stderr,trials,seed,source"
    )?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            p.gamma,
            p.tau1,
            p.tau2,
            p.alpha,
            p.beta,
            p.alpha_stderr,
            p.beta_stderr,
            p.trials,
            p.seed,
            p.source.as_str()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const INV_E: f64 = 0.36787944117144233;

    #[test]
    fn endpoints() {
        let p = frontier_theoretical(0.0).unwrap();
        assert!((p.alpha - (1.0 - (-1.0f64).exp())).abs() < 1e-10 && p.beta == 0.0);
        let p = frontier_theoretical(INV_E).unwrap();
        assert!((p.alpha - INV_E).abs() < 1e-10 && (p.beta - INV_E).abs() < 1e-10);
        let p = frontier_theoretical(0.25).unwrap();
        assert!((p.alpha - 0.643548).abs() < 2e-6);
        assert!(frontier_theoretical(0.4).is_err());
    }

    #[test]
    fn tangent_separates_crossing() {
        let (g, slope) = interpolation_tangent().unwrap();
        let b0 = kertz_constant();
        assert!(g > 0.05 && g < 0.25, "{g}");
        // every theory point lies on or below the tangent line
        for i in 1..=400 {
            let x = INV_E * i as f64 / 400.0;
            let p = frontier_theoretical(x).unwrap();
            assert!(p.alpha <= b0 + slope * x + 1e-12);
        }
    }

    #[test]
    fn theory_sweep_sorted_with_segment() {
        let grid = [0.0, 0.05, 0.1, 0.25, INV_E];
        let pts = frontier_sweep(&grid, &FrontierMode::Theory).unwrap();
        assert!(pts.windows(2).all(|w| w[0].beta <= w[1].beta));
        let interp: Vec<_> = pts
            .iter()
            .filter(|p| p.source == PointSource::Interpolated)
            .collect();
        assert!(interp.len() >= 2);
        assert_eq!(interp[0].beta, 0.0);
        assert!((interp[0].alpha - kertz_constant()).abs() < 1e-15);
        let mut buf = Vec::new();
        write_frontier_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), pts.len() + 1);
    }
}
