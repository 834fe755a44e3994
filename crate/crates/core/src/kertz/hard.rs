use std::io::{self, Write};

use rand::{Rng, RngCore};
use serde::Serialize;

use super::{beta_n, check_rate, cumulate, kertz_g, r_star_for, y_tilde_for};
use crate::distributions::ValueDistribution;
use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive, FunctionGrid, DEFAULT_STEPS};

/// The prophet instance whose optimal ratio is close to `β_n`.
///
/// Values below `r̃*(q)` follow `CDF(r̃*(t)) = 1 + ln ỹ(t)/n` for `t ∈ [q, 1]`;
/// the remaining mass `−ln ỹ(q)/n` sits on the single value `H`.
#[derive(Debug, Clone)]
pub struct HardInstance {
    n: f64,
    q: f64,
    beta_n: f64,
    c: f64,
    y_tilde: FunctionGrid,
    r_star: FunctionGrid,
    log_y: FunctionGrid,
    // C(t) = ∫_0^t −ln ỹ / (n g(ỹ)) ds; T(r̃*(t)) − T(r̃*(q)) = C(t) − C(q)
    tail_cum: FunctionGrid,
    h: f64,
    atom_mass: f64,
    y_q: f64,
    r_q: f64,
    c_q: f64,
}

impl HardInstance {
    /// Builds the instance for rate `n ∈ (e − 1, 64]` and `q ∈ (0, 0.1]`.
    pub fn build(n: f64, q: f64) -> Result<Self> {
        Self::build_with_steps(n, q, DEFAULT_STEPS)
    }

    pub fn build_with_steps(n: f64, q: f64, steps: usize) -> Result<Self> {
        check_rate(n)?;
        if !(q > 0.0 && q <= 0.1) {
            return Err(Error::Domain {
                what: "q",
                value: q,
                domain: "(0, 0.1]",
            });
        }
        let beta = beta_n(n)?;
        let c = 1.0 / beta - 1.0;
        let y_tilde = y_tilde_for(c, steps)?;
        let r_star = r_star_for(c, &y_tilde)?;
        let nodes = y_tilde.nodes().to_vec();
        let log_y = FunctionGrid::new(
            nodes.clone(),
            y_tilde.values().iter().map(|y| y.ln()).collect(),
        )?;
        let tail_density = |s: f64| {
            let y = y_tilde.eval_clamped(s);
            -y.ln() / (n * kertz_g(c, y))
        };
        let tail_cum = FunctionGrid::new(nodes.clone(), cumulate(&nodes, tail_density, false))?;

        let y_q = y_tilde.eval(q)?;
        let r_q = r_star.eval(q)?;
        let slope_q = -kertz_g(c, y_q);
        let h = 1.0 / (slope_q * y_q.ln()) + r_q;
        let atom_mass = -y_q.ln() / n;
        if !(h > r_q && atom_mass > 0.0 && atom_mass < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "degenerate instance: H = {h}, r(q) = {r_q}, mass {atom_mass}"
            )));
        }
        let c_q = tail_cum.eval(q)?;
        Ok(HardInstance {
            n,
            q,
            beta_n: beta,
            c,
            y_tilde,
            r_star,
            log_y,
            tail_cum,
            h,
            atom_mass,
            y_q,
            r_q,
            c_q,
        })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta_n(&self) -> f64 {
        self.beta_n
    }

    pub fn y_tilde(&self) -> &FunctionGrid {
        &self.y_tilde
    }

    pub fn r_star(&self) -> &FunctionGrid {
        &self.r_star
    }

    /// The top value `H = 1/(ỹ'(q) ln ỹ(q)) + r̃*(q)`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Per-arrival probability of `H`.
    pub fn atom_mass(&self) -> f64 {
        self.atom_mass
    }

    /// Right-hand side of `ỹ' = ỹ(ln ỹ − 1) − c`.
    pub fn y_slope(&self, y: f64) -> f64 {
        -kertz_g(self.c, y)
    }

    /// Writes `t,y_tilde,r_star` rows with ten significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,y_tilde,r_star")?;
        let t = self.y_tilde.nodes();
        let (y, r) = (self.y_tilde.values(), self.r_star.values());
        for i in 0..t.len() {
            writeln!(w, "{:.9e},{:.9e},{:.9e}", t[i], y[i], r[i])?;
        }
        Ok(())
    }

    /// Time at which the continuous branch takes value `x ∈ [0, r̃*(q)]`.
    fn time_of(&self, x: f64) -> f64 {
        self.r_star.inverse_clamped(x).unwrap_or(1.0).max(self.q)
    }
}

impl ValueDistribution for HardInstance {
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    fn survival(&self, x: f64) -> f64 {
        if x < 0.0 {
            1.0
        } else if x <= self.r_q {
            let t = self.time_of(x);
            (-self.log_y.eval_clamped(t) / self.n).clamp(0.0, 1.0)
        } else if x < self.h {
            self.atom_mass
        } else {
            0.0
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u > 1.0 - self.atom_mass {
            return self.h;
        }
        let target = self.n * (u - 1.0);
        if target <= self.log_y.last() {
            return 0.0;
        }
        let t = self
            .log_y
            .inverse_clamped(target)
            .unwrap_or(1.0)
            .max(self.q);
        self.r_star.eval_clamped(t)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    fn support(&self) -> (f64, f64) {
        (0.0, self.h)
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        vec![(self.h, self.atom_mass)]
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.r_q, self.h]
    }

    fn tail_integral(&self, v: f64) -> Result<f64> {
        let top = self.atom_mass * (self.h - self.r_q);
        Ok(if v >= self.h {
            0.0
        } else if v >= self.r_q {
            self.atom_mass * (self.h - v)
        } else if v >= 0.0 {
            top + self.tail_cum.eval_clamped(self.time_of(v)) - self.c_q
        } else {
            top + self.tail_cum.last() - self.c_q - v
        })
    }

    fn describe(&self) -> String {
        format!("hard(n={},q={})", self.n, self.q)
    }

    fn hard_instance(&self) -> Option<&HardInstance> {
        Some(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptMax {
    pub opt_q: f64,
    pub max_q: f64,
    pub ratio: f64,
}

/// Closed forms for the optimal reward and the expected maximum at rate `n`:
///
/// `OPT_q = (1 − ỹ(q)^q) H + ỹ(q)^q r̃*(q)` and
/// `MAX_q = ∫_q^1 (1 − ỹ)/g(ỹ) dt + (1 − ỹ(q))(H − r̃*(q))`,
/// the latter being `∫ (1 − exp(−n(1 − CDF(x)))) dx` after `x = r̃*(t)`.
pub fn analytic_opt_and_max(inst: &HardInstance) -> Result<OptMax> {
    let (yq, q) = (inst.y_q, inst.q);
    let stay = yq.powf(q);
    let opt_q = (1.0 - stay) * inst.h + stay * inst.r_q;
    let body = integrate_adaptive(
        |t| {
            let y = inst.y_tilde.eval_clamped(t);
            (1.0 - y) / kertz_g(inst.c, y)
        },
        q,
        1.0,
        1e-12,
    )?;
    let max_q = body + (1.0 - yq) * (inst.h - inst.r_q);
    Ok(OptMax {
        opt_q,
        max_q,
        ratio: opt_q / max_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::expected_max_poisson;
    use crate::kertz::kertz_constant;
    use crate::numerics::Monotonicity;
    use std::sync::OnceLock;

    fn inst8() -> &'static HardInstance {
        static I: OnceLock<HardInstance> = OnceLock::new();
        I.get_or_init(|| HardInstance::build(8.0, 1e-3).unwrap())
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(HardInstance::build(8.0, 0.0).is_err());
        assert!(HardInstance::build(8.0, 0.2).is_err());
        assert!(HardInstance::build(1.5, 1e-3).is_err());
    }

    #[test]
    fn structural_invariants() {
        let inst = inst8();
        assert!(inst.h() > inst.r_star().eval(inst.q()).unwrap());
        let yq = inst.y_tilde().eval(inst.q()).unwrap();
        assert!((inst.atom_mass() + yq.ln() / 8.0).abs() < 1e-15);
        assert!(inst.atom_mass() > 0.0 && inst.atom_mass() < 1.0);
        assert!(inst.cdf(0.0).abs() < 1e-6);
        assert_eq!(inst.cdf(inst.h()), 1.0);
        assert!((inst.cdf(inst.h() - 1.0) - (1.0 - inst.atom_mass())).abs() < 1e-15);
    }

    #[test]
    fn cdf_along_the_curve() {
        let inst = inst8();
        for i in 0..100 {
            let t = inst.q() + (1.0 - inst.q()) * i as f64 / 99.0;
            let x = inst.r_star().eval(t).unwrap();
            let y = inst.y_tilde().eval(t).unwrap();
            assert!((inst.cdf(x) - (1.0 + y.ln() / 8.0)).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn quantile_roundtrip_on_continuous_branch() {
        let inst = inst8();
        let r_q = inst.r_star().eval(inst.q()).unwrap();
        let mut prev = 0.0;
        for i in 0..=200 {
            let x = r_q * i as f64 / 200.0;
            let f = inst.cdf(x);
            assert!(f >= prev && (0.0..=1.0).contains(&f));
            prev = f;
            if i > 0 {
                assert!((inst.quantile(f) - x).abs() < 1e-6, "{x}");
            }
        }
        assert_eq!(inst.quantile(1.0), inst.h());
        assert_eq!(inst.quantile(0.0), 0.0);
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        let inst = inst8();
        let r_q = inst.r_star().eval(inst.q()).unwrap();
        for v in [-0.5, 0.0, 0.2, 0.7, r_q, 10.0, inst.h()] {
            let closed = inst.tail_integral(v).unwrap();
            let top = inst.h().max(v);
            let lo = v.max(0.0);
            let numeric = crate::numerics::integrate_with_breaks(
                |x| inst.survival(x),
                lo,
                top,
                &[r_q],
                1e-11,
            )
            .unwrap()
                + (0.0 - v).max(0.0);
            assert!(
                (closed - numeric).abs() < 1e-7,
                "{v}: {closed} vs {numeric}"
            );
        }
    }

    #[test]
    fn ratio_near_beta8() {
        let inst = inst8();
        let om = analytic_opt_and_max(inst).unwrap();
        assert!(om.ratio > 0.0 && om.ratio <= 1.0);
        assert!((om.ratio - inst.beta_n()).abs() < 0.01, "{om:?}");
        let via_x = expected_max_poisson(inst, 8.0).unwrap();
        assert!((via_x - om.max_q).abs() < 1e-6, "{via_x} vs {}", om.max_q);
        assert!(inst.beta_n() > kertz_constant());
    }

    #[test]
    fn opt_approaches_r_star_zero() {
        let r0 = inst8().r_star().first();
        let gap = |q: f64| {
            let inst = HardInstance::build(8.0, q).unwrap();
            (analytic_opt_and_max(&inst).unwrap().opt_q - r0).abs()
        };
        let (coarse, fine) = (gap(1e-2), gap(1e-4));
        assert!(fine < coarse && fine < 1e-3, "{coarse} {fine}");
    }

    #[test]
    fn csv_export() {
        let mut out = Vec::new();
        inst8().write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,y_tilde,r_star"));
        let r0 = inst8().r_star().first();
        assert_eq!(
            lines.next().unwrap(),
            format!("{:.9e},{:.9e},{r0:.9e}", 0.0, 1.0)
        );
        assert_eq!(lines.count(), inst8().y_tilde().nodes().len() - 1);
        assert_eq!(inst8().y_tilde().monotonicity(), Monotonicity::Decreasing);
    }
}
