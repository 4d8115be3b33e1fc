//! Brute-force kernel oracle: enumerate every ordered agent pair.
//!
//! Materialises the population, walks all `n(n-1)` ordered `(u, v)` pairs
//! at mass `1/(n(n-1))` each, applies the update rule, and splits the
//! dark-dark-same-colour case by the exact `1/w_i` coin. Independent of the
//! class-based enumeration in the protocol module; used to certify it.

use crate::protocol::{AgentPopulation, Configuration, ExactKernel, Move, WeightTable};
use crate::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

pub fn kernel_by_pair_enumeration(
    config: &Configuration,
    weights: &WeightTable,
) -> Result<ExactKernel> {
    if config.n < 2 {
        return Err(crate::Error::NoPartner);
    }
    config.validate(weights)?;
    let int_weights = weights.integer_weights()?;
    let weight_of = {
        let mut v = vec![0u64; weights.num_slots()];
        for ((c, _), w) in weights.active_colours().zip(int_weights) {
            v[c.index()] = w;
        }
        v
    };

    let agents = AgentPopulation::from_configuration(config).agents;
    let n = agents.len();
    let pair_mass = BigRational::new(BigInt::one(), BigInt::from(n as u64) * BigInt::from((n - 1) as u64));
    let mut masses: BTreeMap<Move, BigRational> = BTreeMap::new();
    let mut add = |mv: Move, p: BigRational| {
        *masses.entry(mv).or_insert_with(BigRational::zero) += p;
    };

    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let au = agents[u];
            let av = agents[v];
            if !au.dark && av.dark {
                add(Move::LightToDark { from: au.colour, to: av.colour }, pair_mass.clone());
            } else if au.dark && av.dark && au.colour == av.colour {
                let w = weight_of[au.colour.index()];
                let coin = BigRational::new(BigInt::one(), BigInt::from(w));
                add(Move::DarkToLight(au.colour), pair_mass.clone() * coin.clone());
                add(Move::Stay, pair_mass.clone() * (BigRational::one() - coin));
            } else {
                add(Move::Stay, pair_mass.clone());
            }
        }
    }
    Ok(ExactKernel { outcomes: masses.into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::enumerate_kernel_exact;

    #[test]
    fn pair_oracle_agrees_on_the_four_agent_example() {
        let config = Configuration::new(vec![2, 1], vec![1, 0]).unwrap();
        let weights = WeightTable::new(vec![1.0, 1.0]).unwrap();
        let by_pairs = kernel_by_pair_enumeration(&config, &weights).unwrap();
        let by_classes = enumerate_kernel_exact(&config, &weights).unwrap();
        assert_eq!(by_pairs.normalised(), by_classes.normalised());
        assert!(by_pairs.total_mass().is_one());
    }
}
