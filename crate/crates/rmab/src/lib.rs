//! Restless multi-armed bandit simulation library.
//!
//! A player picks one of `N` arms per slot; every arm is a finite-state
//! Markov reward chain that keeps evolving whether or not it is played, and
//! only the played arm's state is revealed. The library provides:
//!
//! - [`markov`]: chain validation and derived statistics (stationary
//!   distribution, spectral gap, hitting times);
//! - [`instance`]: cross-arm constants sizing exploration rates and
//!   confidence radii;
//! - [`asr`]: the adaptive sequencing-rules policy (per-arm exploration
//!   rates estimated online, random + deterministic exploration sub-blocks,
//!   geometric exploitation epochs);
//! - [`baselines`]: deterministic epoch sequencing, UCB over regenerative
//!   cycles, oracle, and uniform-random comparators;
//! - [`engine`]: the restless environment loop, pseudo-regret, and seeded
//!   Monte-Carlo aggregation;
//! - [`bound`]: the finite-sample logarithmic regret bound and its
//!   constants;
//! - [`scenario`] / [`experiment`]: Gilbert-Elliott presets, custom scenario
//!   files, and the CSV-emitting experiment runner behind the `rmab` CLI.
//!
//! Everything is deterministic given a master seed: per-run seeds come from
//! a stated SplitMix64 derivation and rerunning an identical configuration
//! reproduces output files byte for byte.

pub mod asr;
pub mod baselines;
pub mod bound;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod markov;
pub mod policy;
pub mod scenario;

pub use error::{Error, Result};
pub use instance::{instance_stats, Instance, InstanceStats};
pub use markov::{chain_stats, ArmSpec, ChainStats};
