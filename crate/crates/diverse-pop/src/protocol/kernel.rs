//! One-step transition kernel over configurations.
//!
//! With `u` scheduled uniformly among `n` agents and the partner `v`
//! uniform among the other `n - 1`, the counts move by at most one agent:
//!
//! - `(A_i - 1, a_i + 1)` with mass `A_i (A_i - 1) / (w_i n (n-1))`
//!   (two dark-`i` agents meet and the `1/w_i` coin fires);
//! - `(a_i - 1, A_j + 1)` with mass `a_i A_j / (n (n-1))` for every ordered
//!   pair `(i, j)` including `j = i` (a light-`i` agent adopts dark `j`);
//! - otherwise the configuration is unchanged.

use super::{ColourId, Configuration, WeightTable};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A single-agent state change, the only moves the protocol allows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    /// A dark agent of this colour turned light.
    DarkToLight(ColourId),
    /// A light agent of colour `from` adopted colour `to` and turned dark.
    LightToDark { from: ColourId, to: ColourId },
    /// Nothing changed.
    Stay,
}

impl Move {
    /// Applies the move to the counts (the step counter is untouched).
    pub fn apply(self, config: &mut Configuration) {
        match self {
            Move::DarkToLight(i) => {
                config.dark_counts[i.index()] -= 1;
                config.light_counts[i.index()] += 1;
            }
            Move::LightToDark { from, to } => {
                config.light_counts[from.index()] -= 1;
                config.dark_counts[to.index()] += 1;
            }
            Move::Stay => {}
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Outcome {
    pub mv: Move,
    pub probability: f64,
}

/// Full one-step outcome distribution in floating point.
#[derive(Clone, Debug)]
pub struct TransitionKernel {
    pub outcomes: Vec<Outcome>,
}

impl TransitionKernel {
    /// Mass of the no-op outcome.
    pub fn stay_probability(&self) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| o.mv == Move::Stay)
            .map(|o| o.probability)
            .sum()
    }

    /// Expectation of `f` over the post-step configuration.
    pub fn expect(&self, config: &Configuration, mut f: impl FnMut(&Configuration) -> f64) -> f64 {
        let mut acc = 0.0;
        let mut scratch = config.clone();
        for o in &self.outcomes {
            o.mv.apply(&mut scratch);
            acc += o.probability * f(&scratch);
            // undo, cheaper than cloning per outcome
            match o.mv {
                Move::DarkToLight(i) => {
                    scratch.dark_counts[i.index()] += 1;
                    scratch.light_counts[i.index()] -= 1;
                }
                Move::LightToDark { from, to } => {
                    scratch.light_counts[from.index()] += 1;
                    scratch.dark_counts[to.index()] -= 1;
                }
                Move::Stay => {}
            }
        }
        acc
    }
}

/// Same distribution with exact rational masses; needs integer weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactKernel {
    pub outcomes: Vec<(Move, BigRational)>,
}

impl ExactKernel {
    pub fn total_mass(&self) -> BigRational {
        self.outcomes.iter().map(|(_, p)| p.clone()).sum()
    }

    /// Probability of a given move (zero if absent).
    pub fn mass_of(&self, mv: Move) -> BigRational {
        self.outcomes
            .iter()
            .filter(|(m, _)| *m == mv)
            .map(|(_, p)| p.clone())
            .sum()
    }

    /// Outcomes keyed by move, sorted, zero-mass entries dropped.
    pub fn normalised(&self) -> Vec<(Move, BigRational)> {
        let mut map: std::collections::BTreeMap<Move, BigRational> = std::collections::BTreeMap::new();
        for (m, p) in &self.outcomes {
            if !p.is_zero() {
                *map.entry(*m).or_insert_with(BigRational::zero) += p.clone();
            }
        }
        map.into_iter().collect()
    }
}

fn check_preconditions(config: &Configuration, weights: &WeightTable) -> Result<()> {
    if config.n < 2 {
        return Err(Error::NoPartner);
    }
    config.validate(weights)
}

/// Enumerates the exact one-step law of the counts process.
pub fn enumerate_kernel(config: &Configuration, weights: &WeightTable) -> Result<TransitionKernel> {
    check_preconditions(config, weights)?;
    let n = config.n as f64;
    let pairs = n * (n - 1.0);
    let mut outcomes = Vec::new();
    let mut stay = 1.0;
    for (i, w_i) in weights.active_colours() {
        let a_dark = config.dark(i) as f64;
        if a_dark >= 2.0 {
            let p = a_dark * (a_dark - 1.0) / (w_i * pairs);
            stay -= p;
            outcomes.push(Outcome { mv: Move::DarkToLight(i), probability: p });
        }
    }
    for (i, _) in weights.active_colours() {
        let light_i = config.light(i) as f64;
        if light_i < 1.0 {
            continue;
        }
        for (j, _) in weights.active_colours() {
            let dark_j = config.dark(j) as f64;
            if dark_j < 1.0 {
                continue;
            }
            let p = light_i * dark_j / pairs;
            stay -= p;
            outcomes.push(Outcome { mv: Move::LightToDark { from: i, to: j }, probability: p });
        }
    }
    outcomes.push(Outcome { mv: Move::Stay, probability: stay.max(0.0) });
    Ok(TransitionKernel { outcomes })
}

/// Enumerates the same law with exact rational arithmetic.
///
/// The `1/w_i` coin must be an exact rational, so integer weights are
/// required (matching the derandomised variant's precondition).
pub fn enumerate_kernel_exact(config: &Configuration, weights: &WeightTable) -> Result<ExactKernel> {
    check_preconditions(config, weights)?;
    let int_weights = weights.integer_weights()?;
    let slot_weight: Vec<u64> = {
        // integer_weights() yields active colours in id order; spread back to slots
        let mut v = vec![0u64; weights.num_slots()];
        for ((c, _), w) in weights.active_colours().zip(int_weights) {
            v[c.index()] = w;
        }
        v
    };
    let n = config.n;
    let pairs = BigInt::from(n) * BigInt::from(n - 1);
    let mut outcomes = Vec::new();
    let mut stay = BigRational::one();
    for (i, _) in weights.active_colours() {
        let dark = config.dark(i);
        if dark >= 2 {
            let num = BigInt::from(dark) * BigInt::from(dark - 1);
            let den = BigInt::from(slot_weight[i.index()]) * pairs.clone();
            let p = BigRational::new(num, den);
            stay -= p.clone();
            outcomes.push((Move::DarkToLight(i), p));
        }
    }
    for (i, _) in weights.active_colours() {
        let light_i = config.light(i);
        if light_i == 0 {
            continue;
        }
        for (j, _) in weights.active_colours() {
            let dark_j = config.dark(j);
            if dark_j == 0 {
                continue;
            }
            let p = BigRational::new(BigInt::from(light_i) * BigInt::from(dark_j), pairs.clone());
            stay -= p.clone();
            outcomes.push((Move::LightToDark { from: i, to: j }, p));
        }
    }
    outcomes.push((Move::Stay, stay));
    Ok(ExactKernel { outcomes })
}
