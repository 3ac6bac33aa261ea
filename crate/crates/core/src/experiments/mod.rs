//! Monte Carlo estimators and the headline experiments.
//!
//! Trial `t` of a run with master seed `s` draws everything from
//! [`TrialSeed::new(s, t)`](crate::engine::TrialSeed): the arrival schedule
//! from the schedule stream, per-trial weights and instances from the
//! instance stream, and algorithm coins from the algorithm stream. Trials
//! run on the rayon pool but are aggregated in index order, so reports do
//! not depend on the thread count.

mod estimate;
mod hat_exp;
mod partition_exp;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::EngineError;
use crate::greedy::FrameworkError;
use crate::hat::HatError;
use crate::matroid::{parse_rational, MatroidError};
use crate::partition::PartitionError;

pub use estimate::{
    estimate_probability_competitiveness, estimate_utility_competitiveness, run_estimate, simulate_trial,
    AlgorithmSpec, ElementProbability, EstimateAudits, EstimateReport, EstimateRun, Instance, InstanceWeights,
    OfflineGreedy, SimulatedTrial,
};
pub use hat_exp::{hat_failure_experiment, HatAudits, HatReport, HatRow, TRACE_SAMPLE};
pub use partition_exp::{
    broom_attack_experiment, deterministic_attack_experiment, AttackReport, BroomReport, VALIDATED_TRIALS,
};
pub use stats::{hoeffding_half_width, wilson_interval, MeanEstimate, Proportion, Z99};

/// Overrides `--seed` when set.
pub const SEED_ENV: &str = "MSPLAB_SEED";

/// How trial `t` derives its randomness; copied into reports.
pub const SEED_DERIVATION: &str =
    "trial t: ChaCha8 seeded with splitmix64(seed ^ t); stream 0 schedule, 1 algorithm, 2 instance";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("algorithm fault in trial {trial}: {message}")]
    AlgorithmFault { trial: u64, message: String },
    #[error("distribution fault in trial {trial}: {message}")]
    DistributionFault { trial: u64, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// `2` for bad input, `3` for faults of the algorithm under test.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Parameter(_) | ExperimentError::Degenerate(_) | ExperimentError::Io(_) => 2,
            ExperimentError::AlgorithmFault { .. } | ExperimentError::DistributionFault { .. } => 3,
        }
    }

    fn engine(trial: u64, err: EngineError) -> Self {
        match err {
            EngineError::Input(msg) => ExperimentError::Parameter(msg),
            other => ExperimentError::AlgorithmFault { trial, message: other.to_string() },
        }
    }
}

impl From<MatroidError> for ExperimentError {
    fn from(e: MatroidError) -> Self {
        ExperimentError::Parameter(e.to_string())
    }
}

impl From<HatError> for ExperimentError {
    fn from(e: HatError) -> Self {
        ExperimentError::Parameter(e.to_string())
    }
}

impl From<FrameworkError> for ExperimentError {
    fn from(e: FrameworkError) -> Self {
        ExperimentError::Parameter(e.to_string())
    }
}

impl From<PartitionError> for ExperimentError {
    fn from(e: PartitionError) -> Self {
        ExperimentError::Parameter(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSource {
    Flag,
    Env,
    Default,
}

/// `MSPLAB_SEED` wins over the flag; without either the seed is 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<(u64, SeedSource), ExperimentError> {
    resolve_seed_from(flag, std::env::var(SEED_ENV).ok().as_deref())
}

pub fn resolve_seed_from(flag: Option<u64>, env: Option<&str>) -> Result<(u64, SeedSource), ExperimentError> {
    if let Some(raw) = env.filter(|s| !s.trim().is_empty()) {
        let seed = raw
            .trim()
            .parse()
            .map_err(|_| ExperimentError::Parameter(format!("{SEED_ENV}={raw:?} is not an unsigned integer")))?;
        return Ok((seed, SeedSource::Env));
    }
    Ok(match flag {
        Some(seed) => (seed, SeedSource::Flag),
        None => (0, SeedSource::Default),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(ExperimentError::Parameter(format!("unknown output format {s:?} (expected json or csv)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

/// Everything needed to rerun an estimate. Embedded in its report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Instance spec, see [`InstanceSpec`].
    pub instance: String,
    pub algorithm: String,
    /// `random`, `descending` or `file:PATH`; `None` picks the instance's
    /// default.
    pub weights: Option<String>,
    pub trials: u64,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub emit: OutputFormat,
    pub output: Option<String>,
}

/// `uniform:k:n`, `graphic:FILE`, `complete:n`, `hat:n:alpha`, `broom:n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstanceSpec {
    Uniform { k: usize, n: usize },
    Graphic { path: String },
    Complete { n: usize },
    Hat { n: usize, alpha: (u64, u64) },
    Broom { n: usize },
}

impl FromStr for InstanceSpec {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| ExperimentError::Parameter(format!("instance spec {s:?}: {why}"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad(&format!("{t:?} is not a natural number")));
        let fields: Vec<&str> = s.split(':').collect();
        match fields.as_slice() {
            ["uniform", k, n] => Ok(InstanceSpec::Uniform { k: num(k)?, n: num(n)? }),
            ["graphic", rest @ ..] if !rest.is_empty() => Ok(InstanceSpec::Graphic { path: rest.join(":") }),
            ["complete", n] => Ok(InstanceSpec::Complete { n: num(n)? }),
            ["hat", n, alpha] => {
                let alpha = parse_rational(alpha).map_err(|e| bad(&e.to_string()))?;
                Ok(InstanceSpec::Hat { n: num(n)?, alpha })
            }
            ["broom", n] => Ok(InstanceSpec::Broom { n: num(n)? }),
            _ => Err(bad("expected uniform:k:n, graphic:FILE, complete:n, hat:n:alpha or broom:n")),
        }
    }
}
