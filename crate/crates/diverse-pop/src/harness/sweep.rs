//! Parallel seed sweeps with CSV aggregation.
//!
//! Every seed gets a fully isolated run (own RNG, own state); results are
//! collected and sorted by seed, so the aggregate does not depend on the
//! parallelism degree. `DIVERSE_POP_THREADS` caps the worker pool when no
//! explicit parallelism is requested.

use super::stats::quantile;
use super::{run_experiment, ExperimentConfig};
use crate::Result;
use rayon::prelude::*;
use serde::Serialize;

/// Fixed header of the aggregate CSV: one row per seed plus a summary row
/// (`seed = "median"`) holding per-column medians over successful rows.
pub const SWEEP_CSV_HEADER: &[&str] = &[
    "seed",
    "status",
    "n",
    "k",
    "steps",
    "convergence_step",
    "max_diversity_error_post_burn_in",
    "phi_final",
    "psi_final",
    "sigma_sq_final",
    "fairness_max_rel_error",
    "sustainable",
    "steps_per_second",
];

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub status: String,
    pub convergence_step: Option<u64>,
    pub max_diversity_error_post_burn_in: Option<f64>,
    pub phi_final: Option<f64>,
    pub psi_final: Option<f64>,
    pub sigma_sq_final: Option<f64>,
    pub fairness_max_rel_error: Option<f64>,
    pub sustainable: Option<bool>,
    pub steps_per_second: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// False when any seed failed; the summary then covers survivors only.
    pub complete: bool,
    pub n: u64,
    pub k: usize,
    pub steps: u64,
}

impl SweepOutcome {
    pub fn median_convergence_step(&self) -> Option<f64> {
        let values: Vec<f64> =
            self.rows.iter().filter_map(|r| r.convergence_step.map(|v| v as f64)).collect();
        quantile(&values, 0.5)
    }

    /// Serialises rows plus the summary row under [`SWEEP_CSV_HEADER`].
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SWEEP_CSV_HEADER).map_err(csv_err)?;
        let fmt_u = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let fmt_f = |v: Option<f64>| v.map(|x| format!("{x:.9e}")).unwrap_or_default();
        for row in &self.rows {
            w.write_record([
                row.seed.to_string(),
                row.status.clone(),
                self.n.to_string(),
                self.k.to_string(),
                self.steps.to_string(),
                fmt_u(row.convergence_step),
                fmt_f(row.max_diversity_error_post_burn_in),
                fmt_f(row.phi_final),
                fmt_f(row.psi_final),
                fmt_f(row.sigma_sq_final),
                fmt_f(row.fairness_max_rel_error),
                row.sustainable.map(|b| b.to_string()).unwrap_or_default(),
                fmt_f(row.steps_per_second),
            ])
            .map_err(csv_err)?;
        }
        let med = |f: fn(&SweepRow) -> Option<f64>| {
            let values: Vec<f64> = self.rows.iter().filter_map(f).collect();
            quantile(&values, 0.5)
        };
        w.write_record([
            "median".to_string(),
            if self.complete { "complete".into() } else { "incomplete".into() },
            self.n.to_string(),
            self.k.to_string(),
            self.steps.to_string(),
            fmt_f(self.median_convergence_step()),
            fmt_f(med(|r| r.max_diversity_error_post_burn_in)),
            fmt_f(med(|r| r.phi_final)),
            fmt_f(med(|r| r.psi_final)),
            fmt_f(med(|r| r.sigma_sq_final)),
            fmt_f(med(|r| r.fairness_max_rel_error)),
            self.rows.iter().all(|r| r.sustainable.unwrap_or(false)).to_string(),
            fmt_f(med(|r| r.steps_per_second)),
        ])
        .map_err(csv_err)?;
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::BadConfig(format!("csv write failed: {e}"))
}

/// Worker cap: explicit argument, else `DIVERSE_POP_THREADS`, else rayon's
/// default pool size.
pub fn thread_cap(explicit: Option<usize>) -> Option<usize> {
    explicit.or_else(|| std::env::var("DIVERSE_POP_THREADS").ok().and_then(|v| v.parse().ok()))
}

/// Runs the experiment once per seed; seeds must be distinct.
pub fn run_sweep(
    base: &ExperimentConfig,
    seeds: &[u64],
    parallelism: Option<usize>,
) -> Result<SweepOutcome> {
    {
        let mut sorted = seeds.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(crate::Error::BadConfig("sweep seeds must be distinct".into()));
        }
    }
    base.validate()?;

    let body = |&seed: &u64| -> SweepRow {
        let mut config = base.clone();
        config.seed = seed;
        match run_experiment(&config, None, false) {
            Ok(artifacts) => {
                let report = artifacts.report;
                let fairness_worst = report
                    .fairness
                    .iter()
                    .map(|f| f.max_relative_error)
                    .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
                SweepRow {
                    seed,
                    status: "ok".into(),
                    convergence_step: report.convergence_step,
                    max_diversity_error_post_burn_in: Some(report.max_diversity_error_post_burn_in),
                    phi_final: Some(report.final_snapshot.phi),
                    psi_final: Some(report.final_snapshot.psi),
                    sigma_sq_final: Some(report.final_snapshot.sigma_sq),
                    fairness_max_rel_error: fairness_worst,
                    sustainable: Some(report.sustainability.ok),
                    steps_per_second: Some(report.steps_per_second),
                    error: None,
                }
            }
            Err(e) => SweepRow {
                seed,
                status: "failed".into(),
                convergence_step: None,
                max_diversity_error_post_burn_in: None,
                phi_final: None,
                psi_final: None,
                sigma_sq_final: None,
                fairness_max_rel_error: None,
                sustainable: None,
                steps_per_second: None,
                error: Some(e.to_string()),
            },
        }
    };

    let mut rows: Vec<SweepRow> = match thread_cap(parallelism) {
        Some(threads) if threads > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| crate::Error::BadConfig(e.to_string()))?;
            pool.install(|| seeds.par_iter().map(body).collect())
        }
        _ => seeds.par_iter().map(body).collect(),
    };
    rows.sort_by_key(|r| r.seed);
    let complete = rows.iter().all(|r| r.status == "ok");
    Ok(SweepOutcome { rows, complete, n: base.n, k: base.weights.len(), steps: base.steps })
}
