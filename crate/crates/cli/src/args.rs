use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{CommandName, ExperimentConfig, Format, Mode, Penalty, ReductionKind};

/// Prophet and secretary stopping experiments with distributional advice.
#[derive(Debug, Parser)]
#[command(name = "stopkit", version, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Default, Args)]
pub struct Common {
    /// Value law of the arrivals, e.g. `exponential(rate=1)`.
    #[arg(long, global = true, value_name = "SPEC")]
    pub dist: Option<String>,

    /// Advice law handed to the policy; defaults to --dist.
    #[arg(long, global = true, value_name = "SPEC")]
    pub advice: Option<String>,

    /// Stopping rule, e.g. `threephase(gamma=0.25,z=50)`.
    #[arg(long, global = true, value_name = "SPEC")]
    pub policy: Option<String>,

    /// ThreePhase parameter in [0, 1/e]; `frontier` takes a comma list.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    pub gamma: Option<Vec<f64>>,

    /// Advice sample scale: the warm-up sees z times the expected arrivals.
    #[arg(long, global = true)]
    pub z: Option<f64>,

    /// Poisson arrival rate.
    #[arg(long, global = true)]
    pub rate: Option<f64>,

    /// Number of arrivals, or the hard-instance rate.
    #[arg(long, global = true)]
    pub n: Option<f64>,

    /// Truncation point of the hard instance.
    #[arg(long, global = true)]
    pub q: Option<f64>,

    /// Advice perturbation size for `bounds`; Poisson rate factor (eps * n) for `reduce`.
    #[arg(long, global = true)]
    pub eps: Option<f64>,

    /// Second perturbation parameter of `bounds`.
    #[arg(long, global = true)]
    pub delta: Option<f64>,

    /// Monte Carlo trials.
    #[arg(long, global = true)]
    pub trials: Option<usize>,

    /// Base seed; trial i uses its own stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for the trial loop.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Consistency and robustness of ThreePhase over a gamma grid.
    Frontier {
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Competitive ratio of one policy by simulation.
    Simulate,
    /// The constant beta0 (--limit) or beta_n (--n).
    Kertz {
        #[arg(long)]
        limit: bool,
    },
    /// Optimal policy on the hard instance: closed form and simulation.
    HardInstance,
    /// Upper bounds on consistency and robustness.
    Bounds {
        #[arg(long, value_enum)]
        penalty: Option<Penalty>,
        /// Points per axis when scanning.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Rank profile of ThreePhase against the realized maximum.
    Dominance {
        #[arg(long)]
        lprime_max: Option<usize>,
    },
    /// Run a policy through one of the arrival-model reductions.
    Reduce {
        #[arg(long, value_enum)]
        reduction: Option<ReductionKind>,
    },
    /// Zero-padded heavy tail with all-zero advice.
    Smoothness {
        /// Expected number of nonzero arrivals.
        #[arg(long)]
        c: Option<f64>,
    },
}

impl Cli {
    /// The flag layer of the config; `--config` and `--out` stay outside.
    pub fn flags(&self) -> ExperimentConfig {
        let c = &self.common;
        let mut cfg = ExperimentConfig {
            command: None,
            dist: c.dist.clone(),
            advice: c.advice.clone(),
            policy: c.policy.clone(),
            gamma: c.gamma.clone(),
            z: c.z,
            rate: c.rate,
            n: c.n,
            q: c.q,
            eps: c.eps,
            delta: c.delta,
            trials: c.trials,
            seed: c.seed,
            format: c.format,
            out: c.out.clone(),
            threads: c.threads,
            ..Default::default()
        };
        match &self.command {
            None => {}
            Some(Command::Frontier { mode }) => {
                cfg.command = Some(CommandName::Frontier);
                cfg.mode = *mode;
            }
            Some(Command::Simulate) => cfg.command = Some(CommandName::Simulate),
            Some(Command::Kertz { limit }) => {
                cfg.command = Some(CommandName::Kertz);
                cfg.limit = limit.then_some(true);
            }
            Some(Command::HardInstance) => cfg.command = Some(CommandName::HardInstance),
            Some(Command::Bounds { penalty, grid }) => {
                cfg.command = Some(CommandName::Bounds);
                cfg.penalty = *penalty;
                cfg.grid = *grid;
            }
            Some(Command::Dominance { lprime_max }) => {
                cfg.command = Some(CommandName::Dominance);
                cfg.lprime_max = *lprime_max;
            }
            Some(Command::Reduce { reduction }) => {
                cfg.command = Some(CommandName::Reduce);
                cfg.reduction = *reduction;
            }
            Some(Command::Smoothness { c }) => {
                cfg.command = Some(CommandName::Smoothness);
                cfg.c = *c;
            }
        }
        cfg
    }
}
