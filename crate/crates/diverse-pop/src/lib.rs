//! Simulation engine and experiment harness for a weighted diversification
//! population protocol on the complete graph.
//!
//! Agents carry a colour `i` with weight `w_i >= 1` and a one-bit shade
//! (dark/light). Each time-step one scheduled agent samples a partner
//! uniformly among the other agents: a light agent adopts the colour of a
//! dark partner and turns dark; two dark agents of the same colour `i` make
//! the scheduled one turn light with probability `1/w_i`; every other
//! interaction is a no-op. The population converges to colour shares
//! `w_i/w` and keeps them; the crate simulates that process exactly,
//! measures potential functions and region memberships along the way, and
//! checks it against analytic reference models.
//!
//! Entry points:
//! - [`protocol`] — exact engines (aggregate counts, per-agent oracle,
//!   tracked-agent) and the one-step transition kernel.
//! - [`derandomized`] — the shades-of-grey variant for integer weights.
//! - [`metrics`] — potentials `phi`, `psi`, `sigma^2`, diversity errors,
//!   region classification, fairness and sustainability verdicts.
//! - [`reference`] — the 2k-state equilibrium chain, its perturbations,
//!   gambler's-ruin closed forms, and the exact small-configuration chain.
//! - [`adversary`] — scripted structural interventions.
//! - [`harness`] — experiment configs, runs, sweeps, telemetry.
//!
//! The accompanying guide (`book/`) walks through the same material
//! chapter by chapter; its code snippets compile and run as doc-tests via
//! the [`guide`] module.

pub mod adversary;
pub mod derandomized;
mod error;
pub mod guide;
pub mod harness;
pub mod metrics;
pub mod protocol;
pub mod reference;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
