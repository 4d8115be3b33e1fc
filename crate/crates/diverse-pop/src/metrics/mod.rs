//! Potential functions, diversity errors, region membership, and the
//! property verdicts measured over trajectories.
//!
//! The two quadratic potentials drive convergence:
//!
//! ```text
//! phi  = sum_i sum_j (A_i/w_i - A_j/w_j)^2      (dark dispersion)
//! psi  = sum_i sum_j (a_i/w_i - a_j/w_j)^2      (light dispersion)
//! sigma^2 = (A/w - a)^2                          (shade balance)
//! ```
//!
//! `phi = 0` exactly when all `A_i/w_i` agree, likewise `psi` for the light
//! counts. The diversity error of colour `i` is `|C_i/n - w_i/w|` with
//! `C_i = A_i + a_i`.

mod fairness;
mod regions;
mod sustainability;

pub use fairness::{fairness_report, ColourOccupancy, FairnessReport};
pub use regions::{classify_regions, RegionFlags, RegionParams};
pub use sustainability::{SustainabilityMonitor, SustainabilityVerdict};

use crate::protocol::{ColourId, Configuration, WeightTable};
use serde::{Deserialize, Serialize};

/// Dark-count dispersion, the double sum over ordered colour pairs.
pub fn potential_phi(config: &Configuration, weights: &WeightTable) -> f64 {
    pair_dispersion(config, weights, |c, colour| c.dark(colour) as f64)
}

/// Light-count dispersion.
pub fn potential_psi(config: &Configuration, weights: &WeightTable) -> f64 {
    pair_dispersion(config, weights, |c, colour| c.light(colour) as f64)
}

fn pair_dispersion(
    config: &Configuration,
    weights: &WeightTable,
    count: impl Fn(&Configuration, ColourId) -> f64,
) -> f64 {
    let ratios: Vec<f64> =
        weights.active_colours().map(|(c, w)| count(config, c) / w).collect();
    let mut acc = 0.0;
    for &qi in &ratios {
        for &qj in &ratios {
            let d = qi - qj;
            acc += d * d;
        }
    }
    acc
}

/// `phi` via the moment identity `2 k Q_2 - 2 Q_1^2`, `Q_r = sum (A_i/w_i)^r`.
///
/// Algebraically equal to [`potential_phi`]; kept as an independent route
/// for consistency checks.
pub fn potential_phi_moments(config: &Configuration, weights: &WeightTable) -> f64 {
    moments_form(config, weights, |c, colour| c.dark(colour) as f64)
}

/// `psi` via the moment identity.
pub fn potential_psi_moments(config: &Configuration, weights: &WeightTable) -> f64 {
    moments_form(config, weights, |c, colour| c.light(colour) as f64)
}

fn moments_form(
    config: &Configuration,
    weights: &WeightTable,
    count: impl Fn(&Configuration, ColourId) -> f64,
) -> f64 {
    let k = weights.num_active() as f64;
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    for (c, w) in weights.active_colours() {
        let q = count(config, c) / w;
        q1 += q;
        q2 += q * q;
    }
    2.0 * k * q2 - 2.0 * q1 * q1
}

/// Shade balance `(A/w - a)^2`.
pub fn potential_sigma_sq(config: &Configuration, weights: &WeightTable) -> f64 {
    let a_total = config.total_dark() as f64;
    let light_total = config.total_light() as f64;
    let d = a_total / weights.total_weight() - light_total;
    d * d
}

/// Per-colour diversity errors `|C_i/n - w_i/w|`, in active-colour id order.
pub fn diversity_error(config: &Configuration, weights: &WeightTable) -> Vec<(ColourId, f64)> {
    let n = config.n as f64;
    let w = weights.total_weight();
    weights
        .active_colours()
        .map(|(c, w_i)| (c, (config.support(c) as f64 / n - w_i / w).abs()))
        .collect()
}

/// Largest diversity error over active colours.
pub fn max_diversity_error(config: &Configuration, weights: &WeightTable) -> f64 {
    diversity_error(config, weights).into_iter().map(|(_, e)| e).fold(0.0, f64::max)
}

/// One telemetry record: potentials, diversity errors, region flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialSnapshot {
    pub t: u64,
    pub phi: f64,
    pub psi: f64,
    pub sigma_sq: f64,
    /// Diversity errors in active-colour id order.
    pub err: Vec<f64>,
    pub regions: RegionFlags,
}

impl PotentialSnapshot {
    pub fn measure(config: &Configuration, weights: &WeightTable, params: &RegionParams) -> Self {
        let phi = potential_phi(config, weights);
        let psi = potential_psi(config, weights);
        let regions = regions::classify_with_potentials(config, weights, params, phi, psi);
        Self {
            t: config.step,
            phi,
            psi,
            sigma_sq: potential_sigma_sq(config, weights),
            err: diversity_error(config, weights).into_iter().map(|(_, e)| e).collect(),
            regions,
        }
    }

    pub fn max_err(&self) -> f64 {
        self.err.iter().copied().fold(0.0, f64::max)
    }
}
