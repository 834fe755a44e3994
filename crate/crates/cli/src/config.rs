use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use stopkit_core::arrivals::ArrivalModel;
use stopkit_core::distributions::{parse_distribution, Dist};
use stopkit_core::harness::{CrConfig, FrontierMode, Reduction, SuiteOptions, MIN_TRIALS};
use stopkit_core::kertz::CubicPenalty;
use stopkit_core::numerics::tau_pair;
use stopkit_core::policies::{parse_policy, PolicyContext, SharedPolicy};

pub const DEFAULT_DIST: &str = "exponential(rate=1)";
pub const DEFAULT_RATE: f64 = 200.0;
pub const DEFAULT_Z: f64 = 50.0;
pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_GAMMA: f64 = 0.25;
const FRONTIER_POINTS: usize = 20;
const MAX_HARD_RATE: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Frontier,
    Simulate,
    Kertz,
    HardInstance,
    Bounds,
    Dominance,
    Reduce,
    Smoothness,
}

impl CommandName {
    fn as_str(self) -> &'static str {
        match self {
            CommandName::Frontier => "frontier",
            CommandName::Simulate => "simulate",
            CommandName::Kertz => "kertz",
            CommandName::HardInstance => "hard-instance",
            CommandName::Bounds => "bounds",
            CommandName::Dominance => "dominance",
            CommandName::Reduce => "reduce",
            CommandName::Smoothness => "smoothness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Theory,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Penalty {
    #[default]
    Theorem,
    Lemma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    #[default]
    PoissonFromN,
    NFromPoisson,
}

/// Everything one run needs. Every field is optional here; [`resolve`]
/// fills in defaults and rejects keys the command does not use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advice: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<Penalty>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lprime_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    // where and how fast, not what: kept out of the echo
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

/// A bad config value, with the key it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = Result<T, ConfigError>;

pub fn load(path: &Path) -> Res<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Res<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        // unknown keys surface at the root; name them directly
        let root = path == "." || path.starts_with('[');
        let key = match inner.split('`').nth(1) {
            Some(k) if root && inner.starts_with("unknown field") => k.to_string(),
            _ if root => "config".to_string(),
            _ => path,
        };
        ConfigError::new(&key, inner)
    })
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        ExperimentConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl ExperimentConfig {
    /// Fields of `top` win over `self`.
    pub fn overlay(self, top: ExperimentConfig) -> ExperimentConfig {
        overlay!(
            self, top, command, mode, dist, advice, policy, reduction, gamma, z, rate, n, q, eps,
            delta, c, limit, penalty, grid, lprime_max, trials, seed, format, out, threads
        )
    }

    fn present_keys(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }
}

/// A fully resolved run.
pub enum Job {
    Frontier {
        grid: Vec<f64>,
        mode: FrontierMode,
    },
    Simulate {
        dist: Dist,
        policy: SharedPolicy,
        model: ArrivalModel,
        trials: usize,
        seed: u64,
    },
    Kertz {
        n: Option<f64>,
        limit: bool,
    },
    HardInstance {
        n: f64,
        q: f64,
        trials: usize,
        seed: u64,
    },
    Bounds {
        eps: Vec<f64>,
        delta: Vec<f64>,
        penalty: CubicPenalty,
        scan: bool,
    },
    Dominance {
        gamma: f64,
        cfg: CrConfig,
        lprime_max: usize,
    },
    Reduce {
        reduction: Reduction,
        dist: Dist,
        n: usize,
        eps: f64,
        policy: String,
        trials: usize,
        seed: u64,
    },
    Smoothness {
        rate: f64,
        c: f64,
        trials: usize,
        seed: u64,
    },
}

fn check(key: &str, ok: bool, value: impl fmt::Display, domain: &str) -> Res<()> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("{value} outside {domain}")))
    }
}

fn positive(key: &str, v: f64) -> Res<f64> {
    check(key, v > 0.0 && v.is_finite(), v, "(0, inf)")?;
    Ok(v)
}

fn count(key: &str, v: f64, min: usize) -> Res<usize> {
    check(
        key,
        v.fract() == 0.0 && v >= min as f64 && v <= u32::MAX as f64,
        v,
        &format!("integers >= {min}"),
    )?;
    Ok(v as usize)
}

fn gamma_ok(g: f64) -> Res<f64> {
    tau_pair(g).map_err(|_| ConfigError::new("gamma", format!("{g} outside [0, 1/e]")))?;
    Ok(g)
}

fn single_gamma(cfg: &ExperimentConfig) -> Res<f64> {
    match cfg.gamma.as_deref() {
        None => Ok(DEFAULT_GAMMA),
        Some([g]) => gamma_ok(*g),
        Some(gs) => Err(ConfigError::new(
            "gamma",
            format!("expected one value, got {}", gs.len()),
        )),
    }
}

fn dist(key: &str, spec: &str) -> Res<Dist> {
    parse_distribution(spec).map_err(|e| ConfigError::new(key, e.to_string()))
}

fn trials(cfg: &ExperimentConfig) -> Res<usize> {
    let t = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    check(
        "trials",
        t >= MIN_TRIALS,
        t,
        &format!("[{MIN_TRIALS}, inf)"),
    )?;
    Ok(t)
}

fn linspace(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| a + (b - a) * i as f64 / (m - 1) as f64)
        .collect()
}

/// Keys each command reads, besides `command` and `format`.
fn allowed(cfg: &ExperimentConfig, cmd: CommandName) -> &'static [&'static str] {
    match cmd {
        CommandName::Frontier => match cfg.mode.unwrap_or_default() {
            Mode::Theory => &["mode", "gamma"],
            Mode::Empirical => &["mode", "gamma", "dist", "z", "rate", "trials", "seed"],
        },
        CommandName::Simulate => &["dist", "advice", "policy", "rate", "n", "trials", "seed"],
        CommandName::Kertz => &["n", "limit"],
        CommandName::HardInstance => &["n", "q", "trials", "seed"],
        CommandName::Bounds => &["eps", "delta", "penalty", "grid"],
        CommandName::Dominance => &["dist", "gamma", "z", "rate", "trials", "seed", "lprime_max"],
        CommandName::Reduce => match cfg.reduction.unwrap_or_default() {
            ReductionKind::PoissonFromN => {
                &["reduction", "dist", "policy", "n", "eps", "trials", "seed"]
            }
            ReductionKind::NFromPoisson => &["reduction", "dist", "policy", "n", "trials", "seed"],
        },
        CommandName::Smoothness => &["rate", "c", "trials", "seed"],
    }
}

/// Validates `cfg` and returns the job with the config echo, which has every
/// default written out.
pub fn resolve(cfg: ExperimentConfig) -> Res<(Job, ExperimentConfig)> {
    let cmd = cfg
        .command
        .ok_or_else(|| ConfigError::new("command", "no command given"))?;
    let ok = allowed(&cfg, cmd);
    for key in cfg.present_keys() {
        if key != "command" && key != "format" && !ok.contains(&key.as_str()) {
            return Err(ConfigError::new(
                &key,
                format!("not used by `{}`", cmd.as_str()),
            ));
        }
    }
    if let Some(t) = cfg.threads {
        check("threads", t >= 1, t, "[1, inf)")?;
    }
    let mut echo = ExperimentConfig {
        command: Some(cmd),
        format: Some(cfg.format.unwrap_or_default()),
        out: cfg.out.clone(),
        threads: cfg.threads,
        ..Default::default()
    };
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let job = match cmd {
        CommandName::Frontier => {
            let mode = cfg.mode.unwrap_or_default();
            let grid = match &cfg.gamma {
                None => linspace(0.0, (-1.0f64).exp(), FRONTIER_POINTS),
                Some(gs) if gs.is_empty() => {
                    return Err(ConfigError::new("gamma", "empty grid"));
                }
                Some(gs) => gs.iter().map(|&g| gamma_ok(g)).collect::<Res<_>>()?,
            };
            echo.mode = Some(mode);
            echo.gamma = Some(grid.clone());
            let mode = match mode {
                Mode::Theory => FrontierMode::Theory,
                Mode::Empirical => {
                    let cr = cr_config(&cfg, &mut echo, seed)?;
                    FrontierMode::Empirical(cr)
                }
            };
            Job::Frontier { grid, mode }
        }
        CommandName::Simulate => {
            let dspec = cfg.dist.clone().unwrap_or_else(|| DEFAULT_DIST.into());
            let d = dist("dist", &dspec)?;
            let aspec = cfg.advice.clone().unwrap_or_else(|| dspec.clone());
            let advice = dist("advice", &aspec)?;
            let model = match (cfg.rate, cfg.n) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::new("n", "give either `rate` or `n`"));
                }
                (_, Some(n)) => ArrivalModel::FixedN {
                    n: count("n", n, 1)?,
                },
                (rate, None) => ArrivalModel::Poisson {
                    rate: positive("rate", rate.unwrap_or(DEFAULT_RATE))?,
                },
            };
            let pspec = cfg
                .policy
                .clone()
                .unwrap_or_else(|| format!("threephase(gamma={DEFAULT_GAMMA})"));
            let ctx = PolicyContext { advice, model };
            let policy = parse_policy(&pspec, &ctx)
                .map_err(|e| ConfigError::new("policy", e.to_string()))?;
            let trials = trials(&cfg)?;
            echo.dist = Some(dspec);
            echo.advice = Some(aspec);
            echo.policy = Some(pspec);
            match model {
                ArrivalModel::Poisson { rate } => echo.rate = Some(rate),
                ArrivalModel::FixedN { n } => echo.n = Some(n as f64),
            }
            echo.trials = Some(trials);
            echo.seed = Some(seed);
            Job::Simulate {
                dist: d,
                policy,
                model,
                trials,
                seed,
            }
        }
        CommandName::Kertz => {
            let limit = cfg.limit.unwrap_or(false) || cfg.n.is_none();
            let n = match cfg.n {
                Some(n) => {
                    let e1 = std::f64::consts::E - 1.0;
                    check("n", n > e1 && n.is_finite(), n, "(e - 1, inf)")?;
                    Some(n)
                }
                None => None,
            };
            echo.n = n;
            echo.limit = Some(limit);
            Job::Kertz { n, limit }
        }
        CommandName::HardInstance => {
            let n = cfg.n.unwrap_or(8.0);
            let e1 = std::f64::consts::E - 1.0;
            check("n", n > e1 && n <= MAX_HARD_RATE, n, "(e - 1, 64]")?;
            let q = cfg.q.unwrap_or(1e-3);
            check("q", q > 0.0 && q < 1.0, q, "(0, 1)")?;
            let trials = trials(&cfg)?;
            echo.n = Some(n);
            echo.q = Some(q);
            echo.trials = Some(trials);
            echo.seed = Some(seed);
            Job::HardInstance { n, q, trials, seed }
        }
        CommandName::Bounds => {
            let penalty = cfg.penalty.unwrap_or_default();
            let scan = cfg.eps.is_none() || cfg.delta.is_none();
            let m = cfg.grid.unwrap_or(50);
            if scan {
                check("grid", m >= 2, m, "[2, inf)")?;
                echo.grid = Some(m);
            } else if cfg.grid.is_some() {
                return Err(ConfigError::new("grid", "only used when scanning"));
            }
            let eps = match cfg.eps {
                Some(e) => {
                    check("eps", (0.0..=0.125).contains(&e), e, "[0, 1/8]")?;
                    vec![e]
                }
                None => linspace(0.0, 0.125, m),
            };
            let delta = match cfg.delta {
                Some(d) => {
                    check("delta", d > 0.0 && d <= 1.0, d, "(0, 1]")?;
                    vec![d]
                }
                None => (1..=m).map(|i| i as f64 / m as f64).collect(),
            };
            echo.eps = cfg.eps;
            echo.delta = cfg.delta;
            echo.penalty = Some(penalty);
            let penalty = match penalty {
                Penalty::Theorem => CubicPenalty::Theorem,
                Penalty::Lemma => CubicPenalty::Lemma,
            };
            Job::Bounds {
                eps,
                delta,
                penalty,
                scan,
            }
        }
        CommandName::Dominance => {
            let gamma = single_gamma(&cfg)?;
            let cr = cr_config(&cfg, &mut echo, seed)?;
            let ell = cr.z.round() as usize + 2;
            let lprime_max = cfg.lprime_max.unwrap_or(ell);
            check(
                "lprime_max",
                (1..=ell).contains(&lprime_max),
                lprime_max,
                &format!("[1, {ell}]"),
            )?;
            echo.gamma = Some(vec![gamma]);
            echo.lprime_max = Some(lprime_max);
            Job::Dominance {
                gamma,
                cfg: cr,
                lprime_max,
            }
        }
        CommandName::Reduce => {
            let kind = cfg.reduction.unwrap_or_default();
            let dspec = cfg.dist.clone().unwrap_or_else(|| DEFAULT_DIST.into());
            let d = dist("dist", &dspec)?;
            let n = count("n", cfg.n.unwrap_or(200.0), 2)?;
            let (reduction, eps, pspec) = match kind {
                ReductionKind::PoissonFromN => {
                    let eps = cfg.eps.unwrap_or(0.5);
                    check("eps", eps > 0.0 && eps <= 1.0, eps, "(0, 1]")?;
                    echo.eps = Some(eps);
                    (Reduction::PoissonFromN, eps, "dp()")
                }
                ReductionKind::NFromPoisson => (Reduction::NFromPoisson, 0.0, "optimal()"),
            };
            let pspec = cfg.policy.clone().unwrap_or_else(|| pspec.into());
            stopkit_core::textspec::Spec::parse(&pspec)
                .map_err(|e| ConfigError::new("policy", e.to_string()))?;
            let trials = trials(&cfg)?;
            echo.reduction = Some(kind);
            echo.dist = Some(dspec);
            echo.policy = Some(pspec.clone());
            echo.n = Some(n as f64);
            echo.trials = Some(trials);
            echo.seed = Some(seed);
            Job::Reduce {
                reduction,
                dist: d,
                n,
                eps,
                policy: pspec,
                trials,
                seed,
            }
        }
        CommandName::Smoothness => {
            let rate = positive("rate", cfg.rate.unwrap_or(DEFAULT_RATE))?;
            let c = cfg.c.unwrap_or(10.0);
            check("c", c > 0.0 && c <= rate, c, "(0, rate]")?;
            let trials = trials(&cfg)?;
            echo.rate = Some(rate);
            echo.c = Some(c);
            echo.trials = Some(trials);
            echo.seed = Some(seed);
            Job::Smoothness {
                rate,
                c,
                trials,
                seed,
            }
        }
    };
    Ok((job, echo))
}

fn cr_config(cfg: &ExperimentConfig, echo: &mut ExperimentConfig, seed: u64) -> Res<CrConfig> {
    let dspec = cfg.dist.clone().unwrap_or_else(|| DEFAULT_DIST.into());
    let d = dist("dist", &dspec)?;
    let z = cfg.z.unwrap_or(DEFAULT_Z);
    check("z", z >= 0.0 && z.is_finite(), z, "[0, inf)")?;
    let rate = positive("rate", cfg.rate.unwrap_or(DEFAULT_RATE))?;
    let trials = trials(cfg)?;
    echo.dist = Some(dspec);
    echo.z = Some(z);
    echo.rate = Some(rate);
    echo.trials = Some(trials);
    echo.seed = Some(seed);
    Ok(CrConfig {
        d: Arc::clone(&d),
        z,
        rate,
        trials,
        seed,
        suite: SuiteOptions::default(),
    })
}
