//! Exact simulation of the diversification protocol on the complete graph.
//!
//! The default engine works on aggregate counts (`A_i` dark, `a_i` light per
//! colour), which is lossless on the complete graph and costs O(k) per tick.
//! A literal per-agent engine ([`agentwise`]) is kept as a correctness
//! oracle, and a tracked-agent engine ([`tracked`]) follows one agent's
//! trajectory exactly for fairness measurements.

mod agentwise;
mod engine;
mod kernel;
mod rng;
mod tracked;

pub use agentwise::{step_agentwise, Agent, AgentPopulation};
pub use engine::{run, step_counts, Observer, StepEvent};
pub use kernel::{enumerate_kernel, enumerate_kernel_exact, ExactKernel, Move, Outcome, TransitionKernel};
pub use rng::SimRng;
pub use tracked::{step_with_tracking, TrackedAgent};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Stable identifier of a colour within a run.
///
/// Ids are dense indices into the weight table; ids of removed colours are
/// never reused, their slots just go inactive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColourId(pub u32);

impl ColourId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ColourId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "colour#{}", self.0)
    }
}

/// Colour weights `w_i >= 1` plus the derived total `w` over active colours.
#[derive(Clone, Debug, Serialize)]
pub struct WeightTable {
    weights: Vec<f64>,
    active: Vec<bool>,
    total: f64,
    active_count: usize,
}

impl WeightTable {
    /// Builds a table from per-colour weights; every weight must be >= 1.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 1.0) || !w.is_finite() {
                return Err(Error::WeightBelowOne { colour: ColourId(i as u32), weight: w });
            }
        }
        let total = weights.iter().sum();
        let active_count = weights.len();
        Ok(Self { active: vec![true; weights.len()], weights, total, active_count })
    }

    /// Total weight `w` of the active colours.
    #[inline]
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// Number of active colours `k`.
    #[inline]
    pub fn num_active(&self) -> usize {
        self.active_count
    }

    /// Number of colour slots ever allocated (active or not).
    #[inline]
    pub fn num_slots(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_active(&self, colour: ColourId) -> bool {
        self.active.get(colour.index()).copied().unwrap_or(false)
    }

    /// Weight of an active colour.
    #[inline]
    pub fn weight(&self, colour: ColourId) -> Result<f64> {
        if self.is_active(colour) {
            Ok(self.weights[colour.index()])
        } else {
            Err(Error::UnknownColour(colour))
        }
    }

    /// Weight by raw slot index, without the active check. Intended for hot
    /// loops that already know the colour is active.
    #[inline]
    pub fn weight_unchecked(&self, idx: usize) -> f64 {
        self.weights[idx]
    }

    /// Iterate over `(id, weight)` of active colours in id order.
    pub fn active_colours(&self) -> impl Iterator<Item = (ColourId, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| self.active[*i])
            .map(|(i, &w)| (ColourId(i as u32), w))
    }

    /// Registers a fresh colour and returns its id.
    pub fn add_colour(&mut self, weight: f64) -> Result<ColourId> {
        let id = ColourId(self.weights.len() as u32);
        if !(weight >= 1.0) || !weight.is_finite() {
            return Err(Error::WeightBelowOne { colour: id, weight });
        }
        self.weights.push(weight);
        self.active.push(true);
        self.total += weight;
        self.active_count += 1;
        Ok(id)
    }

    /// Removes a colour from the active set and from the total weight.
    pub fn deactivate(&mut self, colour: ColourId) -> Result<()> {
        if !self.is_active(colour) {
            return Err(Error::UnknownColour(colour));
        }
        self.active[colour.index()] = false;
        self.active_count -= 1;
        self.total = self
            .weights
            .iter()
            .zip(&self.active)
            .filter(|(_, &a)| a)
            .map(|(&w, _)| w)
            .sum();
        Ok(())
    }

    /// The weights as positive integers, as required by the derandomised
    /// engine. Fails on any non-integer active weight.
    pub fn integer_weights(&self) -> Result<Vec<u64>> {
        self.active_colours()
            .map(|(c, w)| {
                if w.fract() == 0.0 && w >= 1.0 && w <= 2f64.powi(53) {
                    Ok(w as u64)
                } else {
                    Err(Error::NonIntegerWeight { colour: c, weight: w })
                }
            })
            .collect()
    }
}

/// The aggregate state: dark counts `A_i` and light counts `a_i` per colour
/// slot, the population size `n`, and the tick counter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub step: u64,
    pub dark_counts: Vec<u64>,
    pub light_counts: Vec<u64>,
    pub n: u64,
}

impl Configuration {
    /// Builds a configuration from explicit per-colour counts.
    pub fn new(dark: Vec<u64>, light: Vec<u64>) -> Result<Self> {
        if dark.len() != light.len() {
            return Err(Error::BadConfig(format!(
                "dark and light count vectors differ in length ({} vs {})",
                dark.len(),
                light.len()
            )));
        }
        let n = dark.iter().sum::<u64>() + light.iter().sum::<u64>();
        Ok(Self { step: 0, dark_counts: dark, light_counts: light, n })
    }

    /// All agents dark, counts as given (`b_u(0) = 1` for every agent).
    pub fn all_dark(dark: Vec<u64>) -> Self {
        let n = dark.iter().sum();
        let light = vec![0; dark.len()];
        Self { step: 0, dark_counts: dark, light_counts: light, n }
    }

    #[inline]
    pub fn num_slots(&self) -> usize {
        self.dark_counts.len()
    }

    #[inline]
    pub fn dark(&self, colour: ColourId) -> u64 {
        self.dark_counts[colour.index()]
    }

    #[inline]
    pub fn light(&self, colour: ColourId) -> u64 {
        self.light_counts[colour.index()]
    }

    /// Colour support `C_i = A_i + a_i`.
    #[inline]
    pub fn support(&self, colour: ColourId) -> u64 {
        self.dark(colour) + self.light(colour)
    }

    /// Total dark count `A`.
    pub fn total_dark(&self) -> u64 {
        self.dark_counts.iter().sum()
    }

    /// Total light count `a`.
    pub fn total_light(&self) -> u64 {
        self.light_counts.iter().sum()
    }

    /// Checks conservation and agreement with the weight table.
    pub fn validate(&self, weights: &WeightTable) -> Result<()> {
        if self.dark_counts.len() != weights.num_slots() {
            return Err(Error::BadConfig(format!(
                "configuration has {} colour slots, weight table has {}",
                self.dark_counts.len(),
                weights.num_slots()
            )));
        }
        let sum = self.total_dark() + self.total_light();
        if sum != self.n {
            return Err(Error::InvariantViolation {
                step: self.step,
                reason: format!("counts sum to {} but n = {}", sum, self.n),
            });
        }
        for i in 0..self.num_slots() {
            let c = ColourId(i as u32);
            if !weights.is_active(c) && self.support(c) != 0 {
                return Err(Error::UnknownColour(c));
            }
        }
        Ok(())
    }
}
