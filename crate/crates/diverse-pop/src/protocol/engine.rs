//! Aggregate-count engine: one scheduled interaction per tick, O(k) time.
//!
//! The complete graph makes the protocol lumpable to per-colour counts, so
//! the engine samples the scheduled agent's class and the partner's class
//! from their exact joint law instead of touching individual agents. The
//! induced law on counts is identical to the per-agent oracle engine.

use super::{ColourId, Configuration, Move, SimRng, WeightTable};
use crate::{Error, Result};

/// What a single tick did to the counts.
pub type StepEvent = Move;

/// Advances the configuration by exactly one scheduled interaction.
///
/// The scheduled agent `u` is uniform among the `n` agents, the partner `v`
/// uniform among the other `n - 1`; the update rule is applied to `u` only.
/// Sampling is two-stage over classes and reproduces the enumerated kernel
/// exactly.
#[inline]
pub fn step_counts(config: &mut Configuration, weights: &WeightTable, rng: &mut SimRng) -> Result<StepEvent> {
    let n = config.n;
    if n < 2 {
        return Err(Error::NoPartner);
    }
    let slots = config.dark_counts.len();
    if slots != weights.num_slots() {
        return Err(Error::BadConfig(format!(
            "configuration has {} colour slots, weight table has {}",
            slots,
            weights.num_slots()
        )));
    }

    let mut r = rng.below(n);
    let mut u_colour = usize::MAX;
    let mut u_dark = true;
    for (i, &c) in config.dark_counts.iter().enumerate() {
        if r < c {
            u_colour = i;
            break;
        }
        r -= c;
    }
    if u_colour == usize::MAX {
        u_dark = false;
        for (i, &c) in config.light_counts.iter().enumerate() {
            if r < c {
                u_colour = i;
                break;
            }
            r -= c;
        }
    }
    debug_assert!(u_colour != usize::MAX, "counts must sum to n");

    let mv = if u_dark {
        // only a dark partner of the same colour can do anything
        let same_others = config.dark_counts[u_colour] - 1;
        if rng.below(n - 1) < same_others {
            let w = weights.weight_unchecked(u_colour);
            if w <= 1.0 || rng.unit() < 1.0 / w {
                Move::DarkToLight(ColourId(u_colour as u32))
            } else {
                Move::Stay
            }
        } else {
            Move::Stay
        }
    } else {
        // a light agent adopts whichever dark class the partner draw lands in
        let mut r2 = rng.below(n - 1);
        let mut target = usize::MAX;
        for (j, &c) in config.dark_counts.iter().enumerate() {
            if r2 < c {
                target = j;
                break;
            }
            r2 -= c;
        }
        if target != usize::MAX {
            Move::LightToDark { from: ColourId(u_colour as u32), to: ColourId(target as u32) }
        } else {
            Move::Stay
        }
    };

    mv.apply(config);
    config.step += 1;
    Ok(mv)
}

/// A callback fired every `every` ticks (on absolute step numbers).
pub struct Observer<'a> {
    pub every: u64,
    #[allow(clippy::type_complexity)]
    pub callback: Box<dyn FnMut(&Configuration, StepEvent) -> std::result::Result<(), String> + 'a>,
}

impl<'a> Observer<'a> {
    pub fn new(
        every: u64,
        callback: impl FnMut(&Configuration, StepEvent) -> std::result::Result<(), String> + 'a,
    ) -> Self {
        Self { every: every.max(1), callback: Box::new(callback) }
    }
}

/// Runs `steps` ticks, invoking observers at their cadences.
///
/// Deterministic given the seed. An observer error aborts the run with the
/// step index in the diagnostic.
pub fn run(
    config: &mut Configuration,
    weights: &WeightTable,
    steps: u64,
    rng: &mut SimRng,
    observers: &mut [Observer<'_>],
) -> Result<()> {
    config.validate(weights)?;
    if steps == 0 {
        return Ok(());
    }
    let mut next_fire: Vec<u64> = observers
        .iter()
        .map(|o| (config.step / o.every + 1) * o.every)
        .collect();
    for _ in 0..steps {
        let event = step_counts(config, weights, rng)?;
        for (idx, obs) in observers.iter_mut().enumerate() {
            if config.step == next_fire[idx] {
                next_fire[idx] += obs.every;
                (obs.callback)(config, event).map_err(|reason| Error::ObserverFailure {
                    step: config.step,
                    reason,
                })?;
            }
        }
    }
    Ok(())
}
