//! Occupancy-based fairness report for a tracked agent.
//!
//! Fairness asks that over a long window an agent holds colour `i` for a
//! `w_i/w` share of the time, splitting `w_i/(1+w)` dark versus
//! `(w_i/w)/(1+w)` light, so the dark:light time ratio per colour tends to
//! `w`. The asymptotic definition is operationalised with a finite window
//! and a relative tolerance, both stated in the report.

use crate::protocol::{ColourId, TrackedAgent, WeightTable};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColourOccupancy {
    pub colour: ColourId,
    /// Share of window ticks spent on this colour, either shade.
    pub fraction: f64,
    /// Target share `w_i / w`.
    pub target: f64,
    pub relative_error: f64,
    pub dark_fraction: f64,
    pub light_fraction: f64,
    /// Per-shade targets `w_i/(1+w)` and `(w_i/w)/(1+w)`.
    pub dark_target: f64,
    pub light_target: f64,
    /// Time ratio dark:light; tends to `w`. Infinite if never light.
    pub dark_light_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FairnessReport {
    pub window_start: u64,
    pub window_end: u64,
    pub per_colour: Vec<ColourOccupancy>,
    pub max_relative_error: f64,
}

/// Builds the report from a tracked agent's counters.
///
/// The counters must cover exactly the window: reset them at
/// `window_start`, then hand the agent over once the run reaches
/// `window_end`.
pub fn fairness_report(
    tracked: &TrackedAgent,
    window: (u64, u64),
    weights: &WeightTable,
) -> Result<FairnessReport> {
    let (start, end) = window;
    if end <= start {
        return Err(Error::EmptyWindow);
    }
    let span = end - start;
    if tracked.steps_tracked() != span {
        return Err(Error::BadConfig(format!(
            "tracked counters cover {} ticks but the window spans {}",
            tracked.steps_tracked(),
            span
        )));
    }
    let w = weights.total_weight();
    let span_f = span as f64;
    let mut per_colour = Vec::new();
    let mut max_rel = 0.0f64;
    for (c, w_i) in weights.active_colours() {
        let dark = tracked.visits(c, true) as f64 / span_f;
        let light = tracked.visits(c, false) as f64 / span_f;
        let fraction = dark + light;
        let target = w_i / w;
        let relative_error = (fraction - target).abs() / target;
        max_rel = max_rel.max(relative_error);
        per_colour.push(ColourOccupancy {
            colour: c,
            fraction,
            target,
            relative_error,
            dark_fraction: dark,
            light_fraction: light,
            dark_target: w_i / (1.0 + w),
            light_target: (w_i / w) / (1.0 + w),
            dark_light_ratio: if light > 0.0 { dark / light } else { f64::INFINITY },
        });
    }
    Ok(FairnessReport { window_start: start, window_end: end, per_colour, max_relative_error: max_rel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{step_with_tracking, Configuration, SimRng};

    #[test]
    fn single_colour_occupancy_is_one() {
        let weights = WeightTable::new(vec![2.0]).unwrap();
        let mut config = Configuration::all_dark(vec![30]);
        let mut tracked = TrackedAgent::new(ColourId(0), true, 1);
        let mut rng = SimRng::from_seed(8);
        for _ in 0..5_000 {
            step_with_tracking(&mut config, &mut tracked, &weights, &mut rng).unwrap();
        }
        let report = fairness_report(&tracked, (0, 5_000), &weights).unwrap();
        assert_eq!(report.per_colour.len(), 1);
        assert!((report.per_colour[0].fraction - 1.0).abs() < 1e-12);
        let sum: f64 = report.per_colour.iter().map(|c| c.fraction).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_window_rejected() {
        let weights = WeightTable::new(vec![1.0]).unwrap();
        let tracked = TrackedAgent::new(ColourId(0), true, 1);
        assert!(matches!(fairness_report(&tracked, (5, 5), &weights), Err(Error::EmptyWindow)));
    }

    #[test]
    fn fractions_sum_to_one_across_colours() {
        let weights = WeightTable::new(vec![1.0, 3.0]).unwrap();
        let mut config = Configuration::all_dark(vec![25, 25]);
        let mut tracked = TrackedAgent::new(ColourId(0), true, 2);
        let mut rng = SimRng::from_seed(21);
        for _ in 0..20_000 {
            step_with_tracking(&mut config, &mut tracked, &weights, &mut rng).unwrap();
        }
        let report = fairness_report(&tracked, (0, 20_000), &weights).unwrap();
        let sum: f64 = report.per_colour.iter().map(|c| c.fraction).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}
