//! The 2k-state chain a single agent follows when the population sits in
//! perfect equilibrium.
//!
//! States are `{D_1..D_k, L_1..L_k}`; the nonzero entries are
//!
//! ```text
//! P(L_j, D_i) = w_i / ((1+w) n)          for all i, j
//! P(L_i, L_i) = 1 - w / ((1+w) n)
//! P(D_i, L_i) = 1 / ((1+w) n)
//! P(D_i, D_i) = 1 - 1 / ((1+w) n)
//! ```
//!
//! with stationary distribution `pi(D_i) = w_i/(1+w)`,
//! `pi(L_i) = (w_i/w)/(1+w)`.

use super::{solve_stationary_dense, stationary_residual};
use crate::protocol::{ColourId, WeightTable};
use crate::{Error, Result};
use serde::Serialize;

/// A state of the single-agent chain, indexed into the chain's colour list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChainState {
    Dark(usize),
    Light(usize),
}

impl ChainState {
    pub fn matrix_index(self, k: usize) -> usize {
        match self {
            ChainState::Dark(i) => i,
            ChainState::Light(i) => k + i,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumChain {
    /// Active colours, in id order; matrix states are `D` then `L` in this order.
    pub colours: Vec<(ColourId, f64)>,
    pub n: u64,
    /// Row-stochastic 2k x 2k matrix.
    pub matrix: Vec<Vec<f64>>,
}

impl EquilibriumChain {
    pub fn k(&self) -> usize {
        self.colours.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.colours.iter().map(|(_, w)| w).sum()
    }

    pub fn entry(&self, from: ChainState, to: ChainState) -> f64 {
        let k = self.k();
        self.matrix[from.matrix_index(k)][to.matrix_index(k)]
    }

    /// `max_i |sum_j P(i,j) - 1|`.
    pub fn row_sum_error(&self) -> f64 {
        self.matrix
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Populates the matrix exactly per the four entry formulas.
pub fn build_equilibrium_chain(weights: &WeightTable, n: u64) -> Result<EquilibriumChain> {
    if n < 2 {
        return Err(Error::NoPartner);
    }
    let colours: Vec<(ColourId, f64)> = weights.active_colours().collect();
    let k = colours.len();
    if k == 0 {
        return Err(Error::BadConfig("weight table has no active colours".into()));
    }
    let w = weights.total_weight();
    let n_f = n as f64;
    let scale = 1.0 / ((1.0 + w) * n_f);
    let mut matrix = vec![vec![0.0; 2 * k]; 2 * k];
    for i in 0..k {
        matrix[i][k + i] = scale; // D_i -> L_i
        matrix[i][i] = 1.0 - scale; // D_i -> D_i
    }
    for j in 0..k {
        for i in 0..k {
            matrix[k + j][i] = colours[i].1 * scale; // L_j -> D_i
        }
        matrix[k + j][k + j] = 1.0 - w * scale; // L_j -> L_j
    }
    Ok(EquilibriumChain { colours, n, matrix })
}

/// Closed-form stationary distribution, verified against `pi P = pi`.
///
/// Returns the vector in matrix state order (`D` block then `L` block).
/// A residual above 1e-12 means the formulas and the matrix disagree,
/// which is an internal error, not a data condition.
pub fn stationary_distribution(chain: &EquilibriumChain) -> Result<Vec<f64>> {
    let k = chain.k();
    let w = chain.total_weight();
    let mut pi = vec![0.0; 2 * k];
    for (i, &(_, w_i)) in chain.colours.iter().enumerate() {
        pi[i] = w_i / (1.0 + w);
        pi[k + i] = (w_i / w) / (1.0 + w);
    }
    let residual = stationary_residual(&chain.matrix, &pi);
    if residual > 1e-12 {
        return Err(Error::StationaryMismatch { residual, tolerance: 1e-12 });
    }
    Ok(pi)
}

impl EquilibriumChain {
    /// Stationary vector by generic linear solve, for cross-checking the
    /// closed form and for perturbed variants.
    pub fn stationary_by_solve(&self) -> Result<Vec<f64>> {
        solve_stationary_dense(&self.matrix)
    }
}
