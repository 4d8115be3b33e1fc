//! Perturbed single-agent chains `P±` that majorise a tracked agent's
//! hit counts while the population hovers near equilibrium.
//!
//! `err` here measures deviations of the *n-scaled* entries: every nonzero
//! entry of `P` is of the form `c/n`, and the population's distance from
//! equilibrium shifts those numerators by up to `err`, i.e. the absolute
//! entry shift is `err / n`. (Read literally as an absolute shift, the
//! construction would push entries of order `1/n` negative and the
//! stationary mass of the target would move by order `n * err` rather than
//! `O(err)`.)
//!
//! For the plus direction and target `D_l` the shifted entries are
//!
//! ```text
//! (D_l, L_l) -= e          (D_l, D_l) += e
//! (D_i, L_i) += e          (D_i, D_i) -= e          i != l
//! (L_i, D_l) += k e        (L_i, D_j) -= e (j != l) (L_i, L_i) -= e
//! ```
//!
//! with `e = err/n`; rows stay stochastic by construction. The minus
//! direction flips every sign. The paper's analogue for a light target is
//! not spelled out entry by entry; it is resolved here by symmetry: all
//! dark rows push one step toward light, rows `L_i (i != l)` route toward
//! `D_l` exactly as above, and the target row boosts staying put,
//! `(L_l, L_l) += k e`, `(L_l, D_j) -= e` for all `j`.

use super::{solve_stationary_dense, ChainState, EquilibriumChain};
use crate::protocol::{Configuration, SimRng, WeightTable};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

#[derive(Clone, Debug)]
pub struct PerturbedChain {
    pub matrix: Vec<Vec<f64>>,
    pub target: ChainState,
    pub direction: Direction,
    /// The n-scaled perturbation magnitude (entry shift is `err/n`).
    pub err: f64,
    pub k: usize,
}

impl PerturbedChain {
    pub fn stationary(&self) -> Result<Vec<f64>> {
        solve_stationary_dense(&self.matrix)
    }

    pub fn row_sum_error(&self) -> f64 {
        self.matrix
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds `P±` for the given target state.
///
/// Fails with [`Error::ErrTooLarge`] if any shifted entry leaves `[0, 1]`.
pub fn build_perturbed_chain(
    base: &EquilibriumChain,
    target: ChainState,
    direction: Direction,
    err: f64,
) -> Result<PerturbedChain> {
    if !(err >= 0.0) || !err.is_finite() {
        return Err(Error::BadConfig(format!("err must be a nonnegative real, got {err}")));
    }
    let k = base.k();
    let e = match direction {
        Direction::Plus => err / base.n as f64,
        Direction::Minus => -err / base.n as f64,
    };
    let ke = k as f64 * e;
    let mut m = base.matrix.clone();
    match target {
        ChainState::Dark(l) => {
            for i in 0..k {
                if i == l {
                    m[i][k + i] -= e;
                    m[i][i] += e;
                } else {
                    m[i][k + i] += e;
                    m[i][i] -= e;
                }
            }
            for i in 0..k {
                let row = k + i;
                m[row][l] += ke;
                for j in 0..k {
                    if j != l {
                        m[row][j] -= e;
                    }
                }
                m[row][row] -= e;
            }
        }
        ChainState::Light(l) => {
            for i in 0..k {
                m[i][k + i] += e;
                m[i][i] -= e;
            }
            for i in 0..k {
                let row = k + i;
                if i == l {
                    m[row][row] += ke;
                    for j in 0..k {
                        m[row][j] -= e;
                    }
                } else {
                    m[row][l] += ke;
                    for j in 0..k {
                        if j != l {
                            m[row][j] -= e;
                        }
                    }
                    m[row][row] -= e;
                }
            }
        }
    }
    for row in &m {
        for &p in row {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ErrTooLarge { err });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::ErrTooLarge { err });
        }
    }
    Ok(PerturbedChain { matrix: m, target, direction, err, k })
}

/// Number of visits to `target` over `steps` transitions from `start`.
pub fn simulate_hit_count(
    matrix: &[Vec<f64>],
    start: usize,
    steps: u64,
    target: usize,
    rng: &mut SimRng,
) -> u64 {
    let mut state = start;
    let mut hits = 0u64;
    for _ in 0..steps {
        let mut u = rng.unit();
        let row = &matrix[state];
        let mut next = row.len() - 1;
        for (j, &p) in row.iter().enumerate() {
            if u < p {
                next = j;
                break;
            }
            u -= p;
        }
        state = next;
        if state == target {
            hits += 1;
        }
    }
    hits
}

/// Largest n-scaled deviation between the one-step law a tracked agent
/// actually faces at `config` and the equilibrium chain's entries.
///
/// This is the empirical counterpart of `err`: feeding the running maximum
/// of this quantity into [`build_perturbed_chain`] yields chains whose hit
/// counts sandwich the tracked agent's.
pub fn scaled_deviation(config: &Configuration, weights: &WeightTable) -> f64 {
    let n = config.n as f64;
    let w = weights.total_weight();
    let mut worst = 0.0f64;
    let mut dark_total = 0.0;
    for (c, w_i) in weights.active_colours() {
        let a_i = config.dark(c) as f64;
        // tracked dark-i flips w.p. (A_i - 1)/(w_i n (n-1)); n-scaled entry
        // (A_i - 1)/(w_i (n-1)) vs the chain's 1/(1+w)
        let flip_scaled = (a_i - 1.0).max(0.0) / (w_i * (n - 1.0));
        worst = worst.max((flip_scaled - 1.0 / (1.0 + w)).abs());
        // tracked light adopts colour i w.p. A_i/(n (n-1)); n-scaled entry
        // A_i/(n-1) vs w_i/(1+w)
        let adopt_scaled = a_i / (n - 1.0);
        worst = worst.max((adopt_scaled - w_i / (1.0 + w)).abs());
        dark_total += a_i;
    }
    // light self-loop: n-scaled leave rate A/(n-1) vs w/(1+w)
    worst = worst.max((dark_total / (n - 1.0) - w / (1.0 + w)).abs());
    worst
}
