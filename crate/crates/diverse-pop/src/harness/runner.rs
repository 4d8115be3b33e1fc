//! Single-run execution: engine loop, adversary events, monitors,
//! telemetry.

use super::{EngineKind, ExperimentConfig, RunReport};
use crate::adversary::{apply_event, EventSchedule, RecoveryRecord};
use crate::derandomized::{project_to_binary, DerandomizedEngine, ShadedConfiguration};
use crate::metrics::{fairness_report, FairnessReport, PotentialSnapshot, SustainabilityMonitor};
use crate::protocol::{
    step_agentwise, step_counts, step_with_tracking, AgentPopulation, ColourId, Configuration,
    Move, SimRng, TrackedAgent, WeightTable,
};
use crate::{Error, Result};
use std::io::Write;
use std::time::Instant;

/// A completed run: the report plus (optionally) the snapshot series.
#[derive(Debug)]
pub struct RunArtifacts {
    pub report: RunReport,
    pub snapshots: Vec<PotentialSnapshot>,
}

enum EngineState {
    Counts {
        counts: Configuration,
        tracked: Option<TrackedAgent>,
    },
    Agentwise {
        pop: AgentPopulation,
        counts: Configuration,
        tracked: Vec<(usize, TrackedAgent)>,
    },
    Derandomized {
        shaded: ShadedConfiguration,
        counts: Configuration,
        engine: DerandomizedEngine,
    },
}

impl EngineState {
    fn counts(&self) -> &Configuration {
        match self {
            EngineState::Counts { counts, .. } => counts,
            EngineState::Agentwise { counts, .. } => counts,
            EngineState::Derandomized { counts, .. } => counts,
        }
    }

    #[inline]
    fn tick(&mut self, weights: &WeightTable, rng: &mut SimRng) -> Result<Move> {
        match self {
            EngineState::Counts { counts, tracked: None } => step_counts(counts, weights, rng),
            EngineState::Counts { counts, tracked: Some(tracked) } => {
                step_with_tracking(counts, tracked, weights, rng)
            }
            EngineState::Agentwise { pop, counts, tracked } => {
                let mv = step_agentwise(&mut pop.agents, weights, rng)?;
                mv.apply(counts);
                counts.step += 1;
                for (idx, tr) in tracked.iter_mut() {
                    let agent = pop.agents[*idx];
                    if agent.colour != tr.colour || agent.dark != tr.dark {
                        tr.transitions += 1;
                        tr.colour = agent.colour;
                        tr.dark = agent.dark;
                    }
                    tr.record_tick();
                }
                Ok(mv)
            }
            EngineState::Derandomized { shaded, counts, engine } => {
                let shaded_mv = engine.step(shaded, rng)?;
                let mv = shaded_mv.project();
                mv.apply(counts);
                counts.step += 1;
                Ok(mv)
            }
        }
    }

    fn tracked_agents(&self) -> Vec<&TrackedAgent> {
        match self {
            EngineState::Counts { tracked, .. } => tracked.iter().collect(),
            EngineState::Agentwise { tracked, .. } => tracked.iter().map(|(_, t)| t).collect(),
            EngineState::Derandomized { .. } => Vec::new(),
        }
    }

    fn reset_tracked_counters(&mut self) {
        match self {
            EngineState::Counts { tracked, .. } => {
                if let Some(t) = tracked.as_mut() {
                    t.reset_counters();
                }
            }
            EngineState::Agentwise { tracked, .. } => {
                for (_, t) in tracked.iter_mut() {
                    t.reset_counters();
                }
            }
            EngineState::Derandomized { .. } => {}
        }
    }
}

/// Picks the class of the tracked agent: first colour with a dark agent,
/// else first with a light one.
fn tracked_start(config: &Configuration) -> Result<(ColourId, bool)> {
    for i in 0..config.num_slots() {
        if config.dark_counts[i] > 0 {
            return Ok((ColourId(i as u32), true));
        }
    }
    for i in 0..config.num_slots() {
        if config.light_counts[i] > 0 {
            return Ok((ColourId(i as u32), false));
        }
    }
    Err(Error::BadConfig("empty population".into()))
}

fn build_state(config: &ExperimentConfig, weights: &WeightTable) -> Result<EngineState> {
    let initial = config.initial.build(config.n, config.weights.len())?;
    initial.validate(weights)?;
    match config.engine {
        EngineKind::Counts => {
            let tracked = match config.tracked_agents {
                0 => None,
                1 => {
                    let (colour, dark) = tracked_start(&initial)?;
                    Some(TrackedAgent::new(colour, dark, initial.num_slots()))
                }
                more => {
                    return Err(Error::BadConfig(format!(
                        "counts engine tracks at most one agent exactly; asked for {more} \
                         (use the agentwise engine for several)"
                    )))
                }
            };
            Ok(EngineState::Counts { counts: initial, tracked })
        }
        EngineKind::Agentwise => {
            let pop = AgentPopulation::from_configuration(&initial);
            if config.tracked_agents as u64 > config.n {
                return Err(Error::BadConfig("more tracked agents than agents".into()));
            }
            let tracked = (0..config.tracked_agents as usize)
                .map(|idx| {
                    let agent = pop.agents[idx];
                    (idx, TrackedAgent::new(agent.colour, agent.dark, initial.num_slots()))
                })
                .collect();
            Ok(EngineState::Agentwise { pop, counts: initial, tracked })
        }
        EngineKind::Derandomized => {
            if config.tracked_agents > 0 {
                return Err(Error::BadConfig(
                    "tracked agents are not supported on the derandomised engine".into(),
                ));
            }
            let engine = DerandomizedEngine::new(weights)?;
            // dark counts start at full shade, explicit light counts at 0
            let mut shaded = ShadedConfiguration::full_shade(
                &(0..initial.num_slots())
                    .map(|i| initial.dark_counts[i])
                    .collect::<Vec<_>>(),
                weights,
            )?;
            for i in 0..initial.num_slots() {
                shaded.counts[i][0] = initial.light_counts[i];
            }
            shaded.n = initial.n;
            let counts = project_to_binary(&shaded);
            Ok(EngineState::Derandomized { shaded, counts, engine })
        }
    }
}

struct ConvergenceTracker {
    band: f64,
    window: u64,
    candidate: Option<u64>,
    confirmed: Option<u64>,
}

impl ConvergenceTracker {
    fn observe(&mut self, step: u64, max_err: f64) {
        if self.confirmed.is_some() {
            return;
        }
        if max_err <= self.band {
            let candidate = *self.candidate.get_or_insert(step);
            if step - candidate >= self.window {
                self.confirmed = Some(candidate);
            }
        } else {
            self.candidate = None;
        }
    }

    fn reset(&mut self) {
        self.candidate = None;
    }
}

struct HalvingTracker {
    peak: f64,
    next_threshold: f64,
    halvings: Vec<u64>,
}

impl HalvingTracker {
    fn new() -> Self {
        Self { peak: 0.0, next_threshold: 0.0, halvings: Vec::new() }
    }

    fn observe(&mut self, step: u64, value: f64) {
        if value > self.peak {
            self.peak = value;
            self.next_threshold = value / 2.0;
            self.halvings.clear();
            return;
        }
        while self.next_threshold > 0.0 && value <= self.next_threshold && self.halvings.len() < 60 {
            self.halvings.push(step);
            self.next_threshold /= 2.0;
        }
    }
}

/// Executes one experiment.
///
/// Snapshots go to `telemetry` as JSONL if given (byte-identical for equal
/// `(config, seed)`), and are retained in memory when `collect_snapshots`
/// is set. Adversary events are supported on the counts engine.
pub fn run_experiment(
    config: &ExperimentConfig,
    mut telemetry: Option<&mut dyn Write>,
    collect_snapshots: bool,
) -> Result<RunArtifacts> {
    config.validate()?;
    let mut weights = WeightTable::new(config.weights.clone())?;
    let mut state = build_state(config, &weights)?;
    let mut rng = SimRng::from_seed_and_stream(config.seed, 0);

    let schedule = match &config.events {
        Some(path) => {
            let json = std::fs::read_to_string(path)?;
            let schedule = EventSchedule::from_json(&json, config.strict_sustainability)?;
            if !schedule.is_empty() && !matches!(state, EngineState::Counts { .. }) {
                return Err(Error::BadConfig(
                    "adversary schedules are supported on the counts engine".into(),
                ));
            }
            schedule
        }
        None => EventSchedule::new(vec![], config.strict_sustainability),
    };

    let params = config.region_params();
    let cadence = config.snapshot_cadence();
    let band = config.band();
    let window = config.window();
    let mut monitor = SustainabilityMonitor::new(config.strict_sustainability);
    let mut convergence = ConvergenceTracker { band, window, candidate: None, confirmed: None };
    let mut phi_halving = HalvingTracker::new();
    let mut psi_halving = HalvingTracker::new();
    let mut recoveries: Vec<RecoveryRecord> = Vec::new();
    let mut snapshots = Vec::new();
    let mut max_err_post_burn_in = 0.0f64;

    let emit = |state_counts: &Configuration,
                    weights: &WeightTable,
                    telemetry: &mut Option<&mut dyn Write>,
                    snapshots: &mut Vec<PotentialSnapshot>,
                    convergence: &mut ConvergenceTracker,
                    phi_halving: &mut HalvingTracker,
                    psi_halving: &mut HalvingTracker,
                    recoveries: &mut Vec<RecoveryRecord>,
                    max_err_post_burn_in: &mut f64|
     -> Result<()> {
        let snap = PotentialSnapshot::measure(state_counts, weights, &params);
        let max_err = snap.max_err();
        convergence.observe(snap.t, max_err);
        phi_halving.observe(snap.t, snap.phi);
        psi_halving.observe(snap.t, snap.psi);
        if snap.t >= config.burn_in {
            *max_err_post_burn_in = max_err_post_burn_in.max(max_err);
        }
        for rec in recoveries.iter_mut() {
            if rec.reentry_e_step.is_none() && snap.regions.e {
                rec.reentry_e_step = Some(snap.t);
            }
            if rec.reentry_band_step.is_none() && max_err <= band {
                rec.reentry_band_step = Some(snap.t);
            }
        }
        if let Some(w) = telemetry.as_mut() {
            serde_json::to_writer(&mut *w, &snap)?;
            w.write_all(b"\n")?;
        }
        if collect_snapshots {
            snapshots.push(snap);
        }
        Ok(())
    };

    let started = Instant::now();
    emit(
        state.counts(),
        &weights,
        &mut telemetry,
        &mut snapshots,
        &mut convergence,
        &mut phi_halving,
        &mut psi_halving,
        &mut recoveries,
        &mut max_err_post_burn_in,
    )?;

    let mut pending = schedule.events().iter().enumerate().peekable();
    let mut next_event_at =
        pending.peek().map(|(_, e)| e.at).unwrap_or(u64::MAX);
    let end = config.steps;
    let mut next_snapshot = cadence;

    while state.counts().step < end {
        while state.counts().step >= next_event_at {
            let (idx, event) = pending.next().expect("peeked");
            let EngineState::Counts { counts, tracked } = &mut state else {
                unreachable!("schedules rejected for other engines above")
            };
            apply_event(counts, &mut weights, event, config.strict_sustainability)?;
            if let Some(t) = tracked.as_mut() {
                t.ensure_slots(weights.num_slots());
            }
            recoveries.push(RecoveryRecord {
                event_index: idx,
                at_step: event.at,
                reentry_e_step: None,
                reentry_band_step: None,
            });
            monitor.check_full(state.counts(), &weights);
            // structural change moves the diversity targets
            convergence.reset();
            emit(
                state.counts(),
                &weights,
                &mut telemetry,
                &mut snapshots,
                &mut convergence,
                &mut phi_halving,
                &mut psi_halving,
                &mut recoveries,
                &mut max_err_post_burn_in,
            )?;
            next_event_at = pending.peek().map(|(_, e)| e.at).unwrap_or(u64::MAX);
        }
        let mv = state.tick(&weights, &mut rng)?;
        let step = state.counts().step;
        monitor.check_move(state.counts(), &weights, mv);
        if step == config.burn_in && config.burn_in > 0 {
            state.reset_tracked_counters();
        }
        if step >= next_snapshot {
            next_snapshot += cadence;
            emit(
                state.counts(),
                &weights,
                &mut telemetry,
                &mut snapshots,
                &mut convergence,
                &mut phi_halving,
                &mut psi_halving,
                &mut recoveries,
                &mut max_err_post_burn_in,
            )?;
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    let fairness: Vec<FairnessReport> = {
        let window = (config.burn_in, config.steps);
        state
            .tracked_agents()
            .into_iter()
            .filter(|t| t.steps_tracked() > 0)
            .map(|t| fairness_report(t, window, &weights))
            .collect::<Result<Vec<_>>>()?
    };

    let final_snapshot = PotentialSnapshot::measure(state.counts(), &weights, &params);
    let report = RunReport {
        n: config.n,
        k: weights.num_active(),
        weights: config.weights.clone(),
        engine: config.engine,
        seed: config.seed,
        steps: config.steps,
        parallel_time: config.steps as f64 / config.n as f64,
        diversity_band: band,
        confirmation_window: window,
        convergence_step: convergence.confirmed,
        max_diversity_error_post_burn_in: max_err_post_burn_in,
        phi_halving_steps: phi_halving.halvings,
        psi_halving_steps: psi_halving.halvings,
        fairness,
        sustainability: monitor.verdict(),
        recoveries,
        final_configuration: state.counts().clone(),
        final_snapshot,
        wall_clock_seconds: elapsed,
        steps_per_second: if elapsed > 0.0 { config.steps as f64 / elapsed } else { f64::INFINITY },
    };
    Ok(RunArtifacts { report, snapshots })
}
