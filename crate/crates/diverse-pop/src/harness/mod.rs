//! Experiment configuration, single runs, seed sweeps, and telemetry.
//!
//! A run is described by a JSON [`ExperimentConfig`], executes one engine
//! deterministically from its seed, streams [`crate::metrics::PotentialSnapshot`]
//! records as JSONL, and ends in a [`RunReport`]. Sweeps run many seeds in
//! isolation (optionally in parallel) and aggregate per-seed results into
//! a CSV with one summary row.

mod runner;
mod sweep;
pub mod stats;

pub use runner::{run_experiment, RunArtifacts};
pub use sweep::{run_sweep, SweepOutcome, SweepRow, SWEEP_CSV_HEADER};

use crate::adversary::RecoveryRecord;
use crate::metrics::{FairnessReport, PotentialSnapshot, RegionParams, SustainabilityVerdict};
use crate::protocol::Configuration;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    #[default]
    Counts,
    Agentwise,
    Derandomized,
}

impl std::str::FromStr for EngineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counts" => Ok(Self::Counts),
            "agentwise" => Ok(Self::Agentwise),
            "derandomized" => Ok(Self::Derandomized),
            other => Err(Error::BadConfig(format!(
                "unknown engine '{other}' (expected counts|agentwise|derandomized)"
            ))),
        }
    }
}

/// How the population starts out. All-dark unless explicitly overridden
/// through `explicit` light counts (an off-model start, useful only for
/// experiments).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCondition {
    /// Near-equal dark counts per colour.
    #[default]
    Uniform,
    /// One colour holds `n - k + 1` agents, every other colour one dark
    /// agent: the slowest start for convergence.
    AdversarialWorst,
    /// Explicit counts.
    Explicit { dark: Vec<u64>, light: Vec<u64> },
}

impl InitialCondition {
    pub fn build(&self, n: u64, k: usize) -> Result<Configuration> {
        if k == 0 {
            return Err(Error::BadConfig("at least one colour is required".into()));
        }
        match self {
            InitialCondition::Uniform => {
                let base = n / k as u64;
                let extra = (n % k as u64) as usize;
                let dark: Vec<u64> =
                    (0..k).map(|i| base + u64::from(i < extra)).collect();
                if dark.iter().any(|&d| d == 0) {
                    return Err(Error::BadConfig(format!("n = {n} cannot cover {k} colours")));
                }
                Ok(Configuration::all_dark(dark))
            }
            InitialCondition::AdversarialWorst => {
                if n < k as u64 {
                    return Err(Error::BadConfig(format!("n = {n} cannot cover {k} colours")));
                }
                let mut dark = vec![1u64; k];
                dark[0] = n - (k as u64 - 1);
                Ok(Configuration::all_dark(dark))
            }
            InitialCondition::Explicit { dark, light } => {
                if dark.len() != k || light.len() != k {
                    return Err(Error::BadConfig(format!(
                        "explicit counts cover {} colours, config has {k}",
                        dark.len()
                    )));
                }
                let config = Configuration::new(dark.clone(), light.clone())?;
                if config.n != n {
                    return Err(Error::BadConfig(format!(
                        "explicit counts sum to {}, config says n = {n}",
                        config.n
                    )));
                }
                Ok(config)
            }
        }
    }
}

fn default_strict() -> bool {
    true
}

/// One experiment, loadable from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: u64,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub engine: EngineKind,
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    /// Snapshot cadence in steps; default `max(1, n/10)`.
    #[serde(default)]
    pub snapshot_every: Option<u64>,
    /// Region parameters (epsilon, delta, potential bound constant).
    #[serde(default)]
    pub regions: Option<RegionParams>,
    /// Number of agents followed exactly: 0 or 1 on the counts engine,
    /// any number up to n on the agentwise engine.
    #[serde(default)]
    pub tracked_agents: u32,
    /// Path to an adversary schedule (JSON array of events).
    #[serde(default)]
    pub events: Option<std::path::PathBuf>,
    #[serde(default = "default_strict")]
    pub strict_sustainability: bool,
    /// Diversity band; default `10 / sqrt(n)`.
    #[serde(default)]
    pub diversity_band: Option<f64>,
    /// Steps discarded before fairness/diversity measurement windows.
    #[serde(default)]
    pub burn_in: u64,
    /// Steps the diversity errors must stay in band to call the run
    /// converged; default `10 * n`.
    #[serde(default)]
    pub confirmation_window: Option<u64>,
}

impl ExperimentConfig {
    pub fn minimal(n: u64, weights: Vec<f64>, steps: u64, seed: u64) -> Self {
        Self {
            n,
            weights,
            initial: InitialCondition::default(),
            engine: EngineKind::default(),
            steps,
            seed,
            snapshot_every: None,
            regions: None,
            tracked_agents: 0,
            events: None,
            strict_sustainability: true,
            diversity_band: None,
            burn_in: 0,
            confirmation_window: None,
        }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(json)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::NoPartner);
        }
        if self.weights.is_empty() {
            return Err(Error::BadConfig("at least one colour weight is required".into()));
        }
        for (i, &w) in self.weights.iter().enumerate() {
            if !(w >= 1.0) {
                return Err(Error::WeightBelowOne {
                    colour: crate::protocol::ColourId(i as u32),
                    weight: w,
                });
            }
        }
        if self.burn_in > self.steps {
            return Err(Error::BadConfig("burn_in exceeds total steps".into()));
        }
        Ok(())
    }

    pub fn snapshot_cadence(&self) -> u64 {
        self.snapshot_every.unwrap_or_else(|| (self.n / 10).max(1))
    }

    pub fn band(&self) -> f64 {
        self.diversity_band.unwrap_or(10.0 / (self.n as f64).sqrt())
    }

    pub fn window(&self) -> u64 {
        self.confirmation_window.unwrap_or(10 * self.n)
    }

    pub fn region_params(&self) -> RegionParams {
        self.regions.unwrap_or_default()
    }
}

/// Everything a completed run reports; reproducible from the seed except
/// for the wall-clock fields.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub n: u64,
    pub k: usize,
    pub weights: Vec<f64>,
    pub engine: EngineKind,
    pub seed: u64,
    pub steps: u64,
    /// `steps / n`, the parallel-time scale.
    pub parallel_time: f64,
    pub diversity_band: f64,
    pub confirmation_window: u64,
    /// First step after which diversity errors stayed inside the band for
    /// the whole confirmation window (checked on sampled snapshots).
    pub convergence_step: Option<u64>,
    pub max_diversity_error_post_burn_in: f64,
    /// Steps at which `phi` first dropped below its peak over 2, 4, 8, ...
    pub phi_halving_steps: Vec<u64>,
    pub psi_halving_steps: Vec<u64>,
    pub fairness: Vec<FairnessReport>,
    pub sustainability: SustainabilityVerdict,
    pub recoveries: Vec<RecoveryRecord>,
    pub final_configuration: Configuration,
    /// Metrics of the final configuration under the final weight table.
    pub final_snapshot: PotentialSnapshot,
    pub wall_clock_seconds: f64,
    pub steps_per_second: f64,
}

impl RunReport {
    /// Exit-status contract: true iff every enabled monitor passed.
    pub fn monitors_pass(&self) -> bool {
        self.sustainability.ok
    }
}
