//! Waiting time to a second mutation in a two-stage mutation model.
//!
//! - [`exact_law`]: closed-form survival, density, quantiles and the
//!   conditional identities behind them.
//! - [`asymptotics`]: the three large-`n` limit laws and convergence traces.
//! - [`simulate`]: an exact event-driven sampler and a Moran-model Gillespie
//!   simulator, with seed-deterministic parallel batches.
//! - [`stats`]: empirical survival, KS distance, DKW bounds and comparison reports.

pub mod asymptotics;
pub mod error;
pub mod exact_law;
pub mod grid;
mod quad;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use exact_law::{ModelParams, SurvivalCurve};
