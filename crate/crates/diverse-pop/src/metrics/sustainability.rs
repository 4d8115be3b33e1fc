//! Sustainability: no active colour's support may ever reach zero.
//!
//! In strict mode the monitor demands a dark representative per active
//! colour (`A_i >= 1`), which the protocol kernel preserves by itself: a
//! dark count only decrements when two dark agents of that colour meet, so
//! it is at least 1 afterwards. Adversarial recolouring may legitimately
//! remove a colour; deactivating it in the weight table records the removal
//! as sanctioned and drops it from the monitored set.

use crate::protocol::{ColourId, Configuration, Move, WeightTable};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SustainabilityVerdict {
    pub ok: bool,
    pub first_violation_step: Option<u64>,
    pub first_violation_colour: Option<ColourId>,
}

/// Fails fast at the first step where an active colour loses its support.
#[derive(Clone, Debug)]
pub struct SustainabilityMonitor {
    strict: bool,
    verdict: SustainabilityVerdict,
}

impl SustainabilityMonitor {
    /// `strict` demands `A_i >= 1`; lenient only `A_i + a_i >= 1`.
    pub fn new(strict: bool) -> Self {
        Self {
            strict,
            verdict: SustainabilityVerdict {
                ok: true,
                first_violation_step: None,
                first_violation_colour: None,
            },
        }
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    fn record(&mut self, step: u64, colour: ColourId) {
        if self.verdict.ok {
            self.verdict = SustainabilityVerdict {
                ok: false,
                first_violation_step: Some(step),
                first_violation_colour: Some(colour),
            };
        }
    }

    /// O(1) check of the single colour a move could have drained.
    #[inline]
    pub fn check_move(&mut self, config: &Configuration, weights: &WeightTable, mv: Move) -> bool {
        match mv {
            Move::DarkToLight(i) => {
                if self.strict && weights.is_active(i) && config.dark(i) == 0 {
                    self.record(config.step, i);
                }
            }
            Move::LightToDark { from, .. } => {
                if !self.strict && weights.is_active(from) && config.support(from) == 0 {
                    self.record(config.step, from);
                }
            }
            Move::Stay => {}
        }
        self.verdict.ok
    }

    /// Full O(k) sweep over active colours, for snapshots and event edges.
    pub fn check_full(&mut self, config: &Configuration, weights: &WeightTable) -> bool {
        for (c, _) in weights.active_colours() {
            let drained = if self.strict { config.dark(c) == 0 } else { config.support(c) == 0 };
            if drained {
                self.record(config.step, c);
                break;
            }
        }
        self.verdict.ok
    }

    pub fn verdict(&self) -> SustainabilityVerdict {
        self.verdict
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{step_counts, SimRng};

    #[test]
    fn protocol_only_run_passes_strict() {
        let weights = WeightTable::new(vec![1.0, 2.0]).unwrap();
        let mut config = Configuration::all_dark(vec![18, 2]);
        let mut rng = SimRng::from_seed(12);
        let mut monitor = SustainabilityMonitor::new(true);
        for _ in 0..100_000 {
            let mv = step_counts(&mut config, &weights, &mut rng).unwrap();
            assert!(monitor.check_move(&config, &weights, mv));
        }
        assert!(monitor.verdict().ok);
    }

    #[test]
    fn illegal_trajectory_fails_at_the_step() {
        // hand-built: A drops 1 -> 0 without a sanctioned event
        let weights = WeightTable::new(vec![1.0, 1.0]).unwrap();
        let mut config = Configuration::new(vec![1, 3], vec![0, 0]).unwrap();
        let mut monitor = SustainabilityMonitor::new(true);
        assert!(monitor.check_full(&config, &weights));
        config.dark_counts[0] = 0;
        config.light_counts[0] = 1;
        config.step = 7;
        assert!(!monitor.check_full(&config, &weights));
        let verdict = monitor.verdict();
        assert_eq!(verdict.first_violation_step, Some(7));
        assert_eq!(verdict.first_violation_colour, Some(ColourId(0)));
    }

    #[test]
    fn sanctioned_removal_is_not_a_failure() {
        // recolouring colour 0 away and deactivating it drops it from the
        // monitored set
        let mut weights = WeightTable::new(vec![1.0, 1.0]).unwrap();
        let mut config = Configuration::new(vec![0, 4], vec![0, 1]).unwrap();
        weights.deactivate(ColourId(0)).unwrap();
        let mut monitor = SustainabilityMonitor::new(true);
        assert!(monitor.check_full(&config, &weights));
        config.step = 3;
        assert!(monitor.check_full(&config, &weights));
        assert!(monitor.verdict().ok);
    }
}
