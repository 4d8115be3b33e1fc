//! Analytic oracles the simulation is checked against: the 2k-state
//! equilibrium chain and its perturbations, gambler's-ruin closed forms,
//! brute-force kernel enumeration over agent pairs, and the exact Markov
//! chain on small configuration spaces.

mod equilibrium;
mod pairs;
mod perturbed;
mod ruin;
mod small_chain;

pub use equilibrium::{build_equilibrium_chain, stationary_distribution, ChainState, EquilibriumChain};
pub use pairs::kernel_by_pair_enumeration;
pub use perturbed::{build_perturbed_chain, scaled_deviation, simulate_hit_count, Direction, PerturbedChain};
pub use ruin::{gamblers_ruin, ruin_by_linear_solve, simulate_ruin, GamblersRuinSpec, RuinOutcome};
pub use small_chain::ConfigChain;

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Stationary vector of a row-stochastic matrix by direct linear solve:
/// `pi (P - I) = 0` with the last balance equation swapped for `sum pi = 1`.
pub(crate) fn solve_stationary_dense(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = rows.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            // (P^T - I) pi = 0
            a[(i, j)] = rows[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let lu = a.lu();
    let pi = lu.solve(&b).ok_or(Error::BadConfig("stationary solve: singular system".into()))?;
    let mut out: Vec<f64> = pi.iter().copied().collect();
    for v in &mut out {
        if *v < 0.0 && *v > -1e-9 {
            *v = 0.0;
        }
    }
    let residual = stationary_residual(rows, &out);
    if residual > 1e-9 || out.iter().any(|&v| v < 0.0) {
        return Err(Error::StationaryMismatch { residual, tolerance: 1e-9 });
    }
    Ok(out)
}

/// `max_j |(pi P)_j - pi_j|`.
pub fn stationary_residual(rows: &[Vec<f64>], pi: &[f64]) -> f64 {
    let m = rows.len();
    let mut worst = 0.0f64;
    for j in 0..m {
        let mut acc = 0.0;
        for i in 0..m {
            acc += pi[i] * rows[i][j];
        }
        worst = worst.max((acc - pi[j]).abs());
    }
    worst
}
