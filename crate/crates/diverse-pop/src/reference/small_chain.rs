//! Exact Markov chain over small configuration spaces.
//!
//! Enumerates every state with `A_i >= 1`, `a_i >= 0`, `sum = n` (the space
//! is closed: a dark count only ever decrements from 2 or more), wires the
//! one-step kernel into a sparse row-stochastic matrix, and exposes t-step
//! distributions, the stationary distribution, and exact expected supports
//! for validating the engines.

use super::solve_stationary_dense;
use crate::protocol::{enumerate_kernel, Configuration, WeightTable};
use crate::{Error, Result};
use std::collections::HashMap;

const STATE_LIMIT: usize = 5_000;

#[derive(Debug)]
pub struct ConfigChain {
    /// `(dark, light)` count vectors per state.
    pub states: Vec<(Vec<u64>, Vec<u64>)>,
    index: HashMap<(Vec<u64>, Vec<u64>), usize>,
    /// Sparse rows of `(target state, probability)`.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub n: u64,
}

/// `|Omega|` without enumerating: dark vectors with positive entries times
/// light vectors with nonnegative entries, summed over the dark total.
fn count_states(n: u64, k: usize) -> usize {
    fn binomial(n: u64, r: u64) -> u128 {
        if r > n {
            return 0;
        }
        let r = r.min(n - r);
        let mut acc: u128 = 1;
        for i in 0..r {
            acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        }
        acc
    }
    let k = k as u64;
    let mut total: u128 = 0;
    for dark_total in k..=n {
        let dark_ways = binomial(dark_total - 1, k - 1);
        let light_ways = binomial(n - dark_total + k - 1, k - 1);
        total = total.saturating_add(dark_ways.saturating_mul(light_ways));
    }
    total.min(usize::MAX as u128) as usize
}

fn enumerate_compositions(n: u64, parts: usize, min: u64) -> Vec<Vec<u64>> {
    // all vectors of length `parts` with entries >= min summing to n
    fn rec(remaining: u64, parts: usize, min: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if parts == 1 {
            if remaining >= min {
                prefix.push(remaining);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        let reserve = min * (parts as u64 - 1);
        let mut v = min;
        while v + reserve <= remaining {
            prefix.push(v);
            rec(remaining - v, parts - 1, min, prefix, out);
            prefix.pop();
            v += 1;
        }
    }
    let mut out = Vec::new();
    if n >= min * parts as u64 {
        rec(n, parts, min, &mut Vec::new(), &mut out);
    }
    out
}

impl ConfigChain {
    /// Builds the chain for all of `Omega` at this population size.
    pub fn build(weights: &WeightTable, n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::NoPartner);
        }
        if weights.num_active() != weights.num_slots() {
            return Err(Error::BadConfig("exact chain supports tables without removed colours".into()));
        }
        let k = weights.num_active();
        let predicted = count_states(n, k);
        if predicted > STATE_LIMIT {
            return Err(Error::StateSpaceTooLarge { states: predicted, limit: STATE_LIMIT });
        }
        let mut states = Vec::new();
        for dark_total in k as u64..=n {
            for dark in enumerate_compositions(dark_total, k, 1) {
                for light in enumerate_compositions(n - dark_total, k, 0) {
                    states.push((dark.clone(), light));
                }
            }
        }
        states.sort();
        debug_assert_eq!(states.len(), predicted);
        let index: HashMap<_, _> =
            states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut rows = Vec::with_capacity(states.len());
        for (dark, light) in &states {
            let config = Configuration {
                step: 0,
                dark_counts: dark.clone(),
                light_counts: light.clone(),
                n,
            };
            let kernel = enumerate_kernel(&config, weights)?;
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(kernel.outcomes.len());
            for outcome in kernel.outcomes {
                if outcome.probability == 0.0 {
                    continue;
                }
                let mut next = config.clone();
                outcome.mv.apply(&mut next);
                let key = (next.dark_counts, next.light_counts);
                let j = *index.get(&key).ok_or_else(|| Error::InvariantViolation {
                    step: 0,
                    reason: format!("kernel left the state space via {:?}", outcome.mv),
                })?;
                match row.iter_mut().find(|(t, _)| *t == j) {
                    Some((_, p)) => *p += outcome.probability,
                    None => row.push((j, outcome.probability)),
                }
            }
            rows.push(row);
        }
        Ok(Self { states, index, rows, n })
    }

    pub fn state_index(&self, config: &Configuration) -> Option<usize> {
        self.index.get(&(config.dark_counts.clone(), config.light_counts.clone())).copied()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Distribution after `t` steps from a point mass on `start`.
    pub fn distribution_after(&self, start: usize, t: u64) -> Vec<f64> {
        let m = self.num_states();
        let mut dist = vec![0.0; m];
        dist[start] = 1.0;
        let mut next = vec![0.0; m];
        for _ in 0..t {
            next.iter_mut().for_each(|v| *v = 0.0);
            for (i, &mass) in dist.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                for &(j, p) in &self.rows[i] {
                    next[j] += mass * p;
                }
            }
            std::mem::swap(&mut dist, &mut next);
        }
        dist
    }

    /// Stationary distribution of the restricted chain by dense solve.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let m = self.num_states();
        let mut dense = vec![vec![0.0; m]; m];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                dense[i][j] += p;
            }
        }
        solve_stationary_dense(&dense)
    }

    /// Exact `E[C_i]` per colour under a distribution over states.
    pub fn expected_supports(&self, dist: &[f64]) -> Vec<f64> {
        let k = self.states[0].0.len();
        let mut out = vec![0.0; k];
        for (s, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let (dark, light) = &self.states[s];
            for i in 0..k {
                out[i] += mass * (dark[i] + light[i]) as f64;
            }
        }
        out
    }

    /// Is any mass outside states with every dark count at least 1?
    /// Always false by construction; kept as an explicit sustainability
    /// statement for tests.
    pub fn mass_outside_sustained_states(&self, dist: &[f64]) -> f64 {
        dist.iter()
            .enumerate()
            .filter(|(s, _)| self.states[*s].0.iter().any(|&d| d == 0))
            .map(|(_, &m)| m)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::max_diversity_error;

    #[test]
    fn two_agent_single_colour_alternates() {
        let weights = WeightTable::new(vec![1.0]).unwrap();
        let chain = ConfigChain::build(&weights, 2).unwrap();
        let pi = chain.stationary().unwrap();
        assert_eq!(chain.num_states(), 2);
        let idx_20 = chain
            .state_index(&Configuration { step: 0, dark_counts: vec![2], light_counts: vec![0], n: 2 })
            .unwrap();
        let idx_11 = chain
            .state_index(&Configuration { step: 0, dark_counts: vec![1], light_counts: vec![1], n: 2 })
            .unwrap();
        // (2,0) -> (1,1) with probability 1
        let row = &chain.rows[idx_20];
        assert_eq!(row.len(), 1);
        assert_eq!(row[0].0, idx_11);
        assert!((row[0].1 - 1.0).abs() < 1e-15);
        // (1,1) -> (2,0) w.p. 1/2, stays w.p. 1/2
        let row = &chain.rows[idx_11];
        let to_20 = row.iter().find(|(j, _)| *j == idx_20).unwrap().1;
        let stay = row.iter().find(|(j, _)| *j == idx_11).unwrap().1;
        assert!((to_20 - 0.5).abs() < 1e-15);
        assert!((stay - 0.5).abs() < 1e-15);
        // stationary (1/3, 2/3)
        assert!((pi[idx_20] - 1.0 / 3.0).abs() < 1e-12);
        assert!((pi[idx_11] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_mass_is_sustained() {
        let weights = WeightTable::new(vec![1.0, 2.0]).unwrap();
        let chain = ConfigChain::build(&weights, 6).unwrap();
        let pi = chain.stationary().unwrap();
        assert!(chain.mass_outside_sustained_states(&pi) == 0.0);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expected_supports_head_toward_fair_shares() {
        let weights = WeightTable::new(vec![1.0, 2.0]).unwrap();
        let chain = ConfigChain::build(&weights, 6).unwrap();
        let start = chain
            .state_index(&Configuration {
                step: 0,
                dark_counts: vec![4, 1],
                light_counts: vec![1, 0],
                n: 6,
            })
            .unwrap();
        let dist = chain.distribution_after(start, 2_000);
        let expected = chain.expected_supports(&dist);
        // fair shares are (2, 4); small n keeps a bias, but the ordering and
        // vicinity must hold
        assert!((expected[0] + expected[1] - 6.0).abs() < 1e-9);
        assert!(expected[1] > expected[0]);
        assert!((expected[1] - 4.0).abs() < 0.8, "E[C_2] = {}", expected[1]);
    }

    #[test]
    fn state_space_cap_enforced() {
        let weights = WeightTable::new(vec![1.0; 6]).unwrap();
        match ConfigChain::build(&weights, 40) {
            Err(Error::StateSpaceTooLarge { .. }) => {}
            other => panic!("expected a state-space refusal, got {other:?}"),
        }
    }

    #[test]
    fn average_diversity_error_shrinks_under_evolution() {
        let weights = WeightTable::new(vec![1.0, 1.0]).unwrap();
        let chain = ConfigChain::build(&weights, 8).unwrap();
        let start = chain
            .state_index(&Configuration {
                step: 0,
                dark_counts: vec![7, 1],
                light_counts: vec![0, 0],
                n: 8,
            })
            .unwrap();
        let err_at = |dist: &[f64]| {
            dist.iter()
                .enumerate()
                .map(|(s, &m)| {
                    let (dark, light) = &chain.states[s];
                    let config = Configuration {
                        step: 0,
                        dark_counts: dark.clone(),
                        light_counts: light.clone(),
                        n: 8,
                    };
                    m * max_diversity_error(&config, &weights)
                })
                .sum::<f64>()
        };
        let early = err_at(&chain.distribution_after(start, 0));
        let late = err_at(&chain.distribution_after(start, 400));
        assert!(late < early * 0.6, "early {early}, late {late}");
    }
}
