//! Naive per-agent engine, kept as the correctness oracle.
//!
//! Stores every agent explicitly and applies the update rule literally.
//! Its induced count process must match the enumerated kernel; the counts
//! engine is validated against it statistically.

use super::{ColourId, Configuration, Move, SimRng, WeightTable};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Agent {
    pub colour: ColourId,
    pub dark: bool,
}

/// A flat list of agents mirroring a configuration.
#[derive(Clone, Debug)]
pub struct AgentPopulation {
    pub agents: Vec<Agent>,
    slots: usize,
}

impl AgentPopulation {
    /// Materialises agents from counts: per colour, dark agents first.
    pub fn from_configuration(config: &Configuration) -> Self {
        let mut agents = Vec::with_capacity(config.n as usize);
        for i in 0..config.num_slots() {
            let c = ColourId(i as u32);
            agents.extend(std::iter::repeat_n(Agent { colour: c, dark: true }, config.dark(c) as usize));
            agents.extend(std::iter::repeat_n(Agent { colour: c, dark: false }, config.light(c) as usize));
        }
        Self { agents, slots: config.num_slots() }
    }

    pub fn to_configuration(&self, step: u64) -> Configuration {
        let mut dark = vec![0u64; self.slots];
        let mut light = vec![0u64; self.slots];
        for a in &self.agents {
            if a.dark {
                dark[a.colour.index()] += 1;
            } else {
                light[a.colour.index()] += 1;
            }
        }
        let n = self.agents.len() as u64;
        Configuration { step, dark_counts: dark, light_counts: light, n }
    }

    pub fn step(&mut self, weights: &WeightTable, rng: &mut SimRng) -> Result<Move> {
        step_agentwise(&mut self.agents, weights, rng)
    }
}

/// One literal tick: schedule `u` uniformly, sample `v` uniformly among the
/// others, apply the rule to `u` only.
pub fn step_agentwise(agents: &mut [Agent], weights: &WeightTable, rng: &mut SimRng) -> Result<Move> {
    let n = agents.len() as u64;
    if n < 2 {
        return Err(Error::NoPartner);
    }
    let u = rng.below(n) as usize;
    let mut v = rng.below(n - 1) as usize;
    if v >= u {
        v += 1;
    }
    let au = agents[u];
    let av = agents[v];
    let mv = if !au.dark && av.dark {
        // light u adopts the colour of its dark partner
        agents[u] = Agent { colour: av.colour, dark: true };
        Move::LightToDark { from: au.colour, to: av.colour }
    } else if au.dark && av.dark && au.colour == av.colour {
        let w = weights.weight(au.colour)?;
        if w <= 1.0 || rng.unit() < 1.0 / w {
            agents[u].dark = false;
            Move::DarkToLight(au.colour)
        } else {
            Move::Stay
        }
    } else {
        Move::Stay
    };
    Ok(mv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_interaction_flips_exactly_one() {
        let weights = WeightTable::new(vec![1.0]).unwrap();
        let mut agents = vec![Agent { colour: ColourId(0), dark: true }; 2];
        let mut rng = SimRng::from_seed(5);
        let mv = step_agentwise(&mut agents, &weights, &mut rng).unwrap();
        assert_eq!(mv, Move::DarkToLight(ColourId(0)));
        assert_eq!(agents.iter().filter(|a| a.dark).count(), 1);
    }

    #[test]
    fn light_adopts_dark_partner() {
        // with exactly one light and one dark agent, any scheduling of the
        // light agent makes it adopt; scheduling the dark one does nothing
        let weights = WeightTable::new(vec![1.0, 1.0]).unwrap();
        let mut rng = SimRng::from_seed(11);
        let mut saw_adoption = false;
        for _ in 0..50 {
            let mut agents = vec![
                Agent { colour: ColourId(0), dark: false },
                Agent { colour: ColourId(1), dark: true },
            ];
            let mv = step_agentwise(&mut agents, &weights, &mut rng).unwrap();
            match mv {
                Move::LightToDark { from, to } => {
                    assert_eq!((from, to), (ColourId(0), ColourId(1)));
                    assert_eq!(agents[0], Agent { colour: ColourId(1), dark: true });
                    assert_eq!(agents[1], Agent { colour: ColourId(1), dark: true });
                    saw_adoption = true;
                }
                Move::Stay => assert!(agents[1].dark),
                other => panic!("impossible move {other:?}"),
            }
        }
        assert!(saw_adoption);
    }

    #[test]
    fn dark_scheduled_on_light_partner_is_noop() {
        // dark u observing a light v falls under the rule's third line; in
        // this two-agent population the only possible change is the light
        // agent adopting, never the dark one moving
        let weights = WeightTable::new(vec![1.0, 1.0]).unwrap();
        let mut rng = SimRng::from_seed(2);
        let mut stays = 0;
        for _ in 0..100 {
            let mut agents = vec![
                Agent { colour: ColourId(0), dark: true },
                Agent { colour: ColourId(1), dark: false },
            ];
            let before = agents.clone();
            match step_agentwise(&mut agents, &weights, &mut rng).unwrap() {
                Move::Stay => {
                    assert_eq!(agents, before, "the dark agent was scheduled; nothing changes");
                    stays += 1;
                }
                Move::LightToDark { from, to } => {
                    assert_eq!((from, to), (ColourId(1), ColourId(0)));
                }
                other => panic!("impossible move {other:?}"),
            }
        }
        assert!(stays > 20, "scheduling the dark agent is a no-op about half the time");
    }

    #[test]
    fn round_trips_through_configuration() {
        let config = Configuration::new(vec![3, 0, 2], vec![1, 4, 0]).unwrap();
        let pop = AgentPopulation::from_configuration(&config);
        assert_eq!(pop.to_configuration(0), config);
    }
}
