use crate::protocol::ColourId;
use thiserror::Error;

/// Errors surfaced by engines, metrics, reference models, and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("population must be at least 2 (a scheduled agent needs a partner)")]
    NoPartner,

    #[error("unknown or inactive colour {0}")]
    UnknownColour(ColourId),

    #[error("colour {colour} has weight {weight}, but weights must be >= 1")]
    WeightBelowOne { colour: ColourId, weight: f64 },

    #[error("the derandomised engine needs positive integer weights; colour {colour} has weight {weight}")]
    NonIntegerWeight { colour: ColourId, weight: f64 },

    #[error("invariant violated at step {step}: {reason}")]
    InvariantViolation { step: u64, reason: String },

    #[error("observer failed at step {step}: {reason}")]
    ObserverFailure { step: u64, reason: String },

    #[error("fairness window is empty")]
    EmptyWindow,

    #[error("perturbation err={err} pushes a transition probability out of [0, 1]")]
    ErrTooLarge { err: f64 },

    #[error("gambler's ruin closed forms are singular near p = 1/2 (need |p - 1/2| >= 1e-6)")]
    RuinSingularP,

    #[error("invalid gambler's ruin spec: {0}")]
    RuinInvalid(String),

    #[error("exact chain oracle refused: {states} states exceeds the {limit}-state limit")]
    StateSpaceTooLarge { states: usize, limit: usize },

    #[error("closed-form stationary distribution fails pi P = pi: residual {residual:e} > {tolerance:e}")]
    StationaryMismatch { residual: f64, tolerance: f64 },

    #[error("adversary event at step {at_step} rejected: {reason}")]
    EventRejected { at_step: u64, reason: String },

    #[error("bad experiment config: {0}")]
    BadConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
