//! Counts engine with one distinguished agent followed exactly.
//!
//! The tracked agent is scheduled with probability exactly `1/n`; class
//! sampling conditions on whether the tracked agent is the scheduled one,
//! the partner, or a bystander, so the joint law equals the per-agent
//! engine's. Visit counters per `(colour, shade)` feed the fairness report.

use super::{ColourId, Configuration, Move, SimRng, WeightTable};
use crate::{Error, Result};

/// One agent's state plus occupancy bookkeeping.
#[derive(Clone, Debug)]
pub struct TrackedAgent {
    pub colour: ColourId,
    pub dark: bool,
    /// `[light, dark]` tick counts per colour slot (post-step states).
    visit_counts: Vec<[u64; 2]>,
    /// Number of state changes the agent underwent.
    pub transitions: u64,
    steps_tracked: u64,
}

impl TrackedAgent {
    pub fn new(colour: ColourId, dark: bool, slots: usize) -> Self {
        Self { colour, dark, visit_counts: vec![[0, 0]; slots], transitions: 0, steps_tracked: 0 }
    }

    #[inline]
    pub fn visits(&self, colour: ColourId, dark: bool) -> u64 {
        self.visit_counts[colour.index()][dark as usize]
    }

    pub fn visit_counts(&self) -> &[[u64; 2]] {
        &self.visit_counts
    }

    pub fn steps_tracked(&self) -> u64 {
        self.steps_tracked
    }

    pub fn total_visits(&self) -> u64 {
        self.visit_counts.iter().map(|v| v[0] + v[1]).sum()
    }

    /// Clears counters (e.g. after burn-in) without touching the state.
    pub fn reset_counters(&mut self) {
        for v in &mut self.visit_counts {
            *v = [0, 0];
        }
        self.transitions = 0;
        self.steps_tracked = 0;
    }

    /// Grows the counter table when the adversary adds colours.
    pub fn ensure_slots(&mut self, slots: usize) {
        if self.visit_counts.len() < slots {
            self.visit_counts.resize(slots, [0, 0]);
        }
    }

    /// Books the current (post-step) state as one tick of occupancy. The
    /// tracked-counts engine does this itself; callers driving an external
    /// engine (e.g. per-agent) record ticks through here.
    #[inline]
    pub fn record_tick(&mut self) {
        self.visit_counts[self.colour.index()][self.dark as usize] += 1;
        self.steps_tracked += 1;
    }

    fn consistent_with(&self, config: &Configuration) -> bool {
        let idx = self.colour.index();
        idx < config.num_slots()
            && if self.dark { config.dark_counts[idx] >= 1 } else { config.light_counts[idx] >= 1 }
    }
}

/// Walks the class counts with the tracked agent's class reduced by one.
#[inline]
fn locate_excluding(
    config: &Configuration,
    excl_colour: usize,
    excl_dark: bool,
    mut r: u64,
) -> (usize, bool) {
    for (i, &c) in config.dark_counts.iter().enumerate() {
        let c = if excl_dark && i == excl_colour { c - 1 } else { c };
        if r < c {
            return (i, true);
        }
        r -= c;
    }
    for (i, &c) in config.light_counts.iter().enumerate() {
        let c = if !excl_dark && i == excl_colour { c - 1 } else { c };
        if r < c {
            return (i, false);
        }
        r -= c;
    }
    unreachable!("counts must cover the draw")
}

/// One tick of the counts engine with the tracked agent handled exactly.
pub fn step_with_tracking(
    config: &mut Configuration,
    tracked: &mut TrackedAgent,
    weights: &WeightTable,
    rng: &mut SimRng,
) -> Result<Move> {
    let n = config.n;
    if n < 2 {
        return Err(Error::NoPartner);
    }
    if !tracked.consistent_with(config) {
        return Err(Error::InvariantViolation {
            step: config.step,
            reason: format!(
                "tracked agent is {} {} but that class is empty",
                if tracked.dark { "dark" } else { "light" },
                tracked.colour
            ),
        });
    }

    let tc = tracked.colour.index();
    let td = tracked.dark;
    let r = rng.below(n);

    let mv = if r == 0 {
        // tracked agent scheduled; partner drawn from the other n-1 agents
        let rv = rng.below(n - 1);
        let (vc, vdark) = locate_excluding(config, tc, td, rv);
        if !td && vdark {
            tracked.colour = ColourId(vc as u32);
            tracked.dark = true;
            tracked.transitions += 1;
            Move::LightToDark { from: ColourId(tc as u32), to: ColourId(vc as u32) }
        } else if td && vdark && vc == tc {
            let w = weights.weight_unchecked(tc);
            if w <= 1.0 || rng.unit() < 1.0 / w {
                tracked.dark = false;
                tracked.transitions += 1;
                Move::DarkToLight(ColourId(tc as u32))
            } else {
                Move::Stay
            }
        } else {
            Move::Stay
        }
    } else {
        // a bystander u is scheduled (uniform over the n-1 non-tracked agents)
        let (uc, udark) = locate_excluding(config, tc, td, r - 1);
        // its partner is the tracked agent with probability 1/(n-1)
        let rv = rng.below(n - 1);
        let (vc, vdark) = if rv == 0 {
            (tc, td)
        } else {
            // neither u nor the tracked agent: walk counts minus both
            let mut r2 = rv - 1;
            let mut found = None;
            for (i, &c) in config.dark_counts.iter().enumerate() {
                let mut c = c;
                if td && i == tc {
                    c -= 1;
                }
                if udark && i == uc {
                    c -= 1;
                }
                if r2 < c {
                    found = Some((i, true));
                    break;
                }
                r2 -= c;
            }
            match found {
                Some(f) => f,
                None => {
                    let mut f = None;
                    for (i, &c) in config.light_counts.iter().enumerate() {
                        let mut c = c;
                        if !td && i == tc {
                            c -= 1;
                        }
                        if !udark && i == uc {
                            c -= 1;
                        }
                        if r2 < c {
                            f = Some((i, false));
                            break;
                        }
                        r2 -= c;
                    }
                    f.expect("counts must cover the draw")
                }
            }
        };
        if !udark && vdark {
            Move::LightToDark { from: ColourId(uc as u32), to: ColourId(vc as u32) }
        } else if udark && vdark && uc == vc {
            let w = weights.weight_unchecked(uc);
            if w <= 1.0 || rng.unit() < 1.0 / w {
                Move::DarkToLight(ColourId(uc as u32))
            } else {
                Move::Stay
            }
        } else {
            Move::Stay
        }
    };

    mv.apply(config);
    config.step += 1;
    tracked.record_tick();
    Ok(mv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_agent_flip_probability_is_half() {
        // n=2, both dark colour 0, w=1: the tracked agent flips iff it is
        // scheduled, i.e. with probability exactly 1/2
        let weights = WeightTable::new(vec![1.0]).unwrap();
        let mut flips = 0u32;
        let trials = 40_000;
        for seed in 0..trials {
            let mut config = Configuration::all_dark(vec![2]);
            let mut tracked = TrackedAgent::new(ColourId(0), true, 1);
            let mut rng = SimRng::from_seed(seed as u64);
            step_with_tracking(&mut config, &mut tracked, &weights, &mut rng).unwrap();
            if !tracked.dark {
                flips += 1;
            }
        }
        let rate = flips as f64 / trials as f64;
        assert!((rate - 0.5).abs() < 0.01, "flip rate {rate}");
    }

    #[test]
    fn visit_totals_match_steps() {
        let weights = WeightTable::new(vec![1.0, 2.0]).unwrap();
        let mut config = Configuration::all_dark(vec![20, 10]);
        let mut tracked = TrackedAgent::new(ColourId(0), true, 2);
        let mut rng = SimRng::from_seed(3);
        for _ in 0..10_000 {
            step_with_tracking(&mut config, &mut tracked, &weights, &mut rng).unwrap();
        }
        assert_eq!(tracked.total_visits(), 10_000);
        assert_eq!(tracked.steps_tracked(), 10_000);
        assert!(config.validate(&weights).is_ok());
    }

    #[test]
    fn inconsistent_tracked_state_is_rejected() {
        let weights = WeightTable::new(vec![1.0, 1.0]).unwrap();
        let mut config = Configuration::all_dark(vec![2, 0]);
        let mut tracked = TrackedAgent::new(ColourId(1), true, 2);
        let mut rng = SimRng::from_seed(0);
        let err = step_with_tracking(&mut config, &mut tracked, &weights, &mut rng).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { .. }));
    }

    #[test]
    fn counts_stay_consistent_with_tracked_agent() {
        let weights = WeightTable::new(vec![1.0, 3.0]).unwrap();
        let mut config = Configuration::all_dark(vec![5, 5]);
        let mut tracked = TrackedAgent::new(ColourId(1), true, 2);
        let mut rng = SimRng::from_seed(77);
        for _ in 0..50_000 {
            step_with_tracking(&mut config, &mut tracked, &weights, &mut rng).unwrap();
            let idx = tracked.colour.index();
            let class_count =
                if tracked.dark { config.dark_counts[idx] } else { config.light_counts[idx] };
            assert!(class_count >= 1, "tracked class emptied out");
            assert_eq!(config.total_dark() + config.total_light(), config.n);
        }
    }
}
