//! Simulation and incentive analysis of rational secret sharing.
//!
//! Players who prefer learning a shared secret, and prefer that others do
//! not, will not cooperate in any protocol with a known last round. This
//! crate simulates the randomized alternative, in which each iteration
//! ends with everyone learning only with probability `alpha^3` and cheaters
//! cannot tell whether they are in the last round. It also quantifies what
//! each deviation gains and reproduces the bounded-horizon collapse on
//! small explicit games.
//!
//! * [`field`], [`shamir`]: GF(p), tagged threshold shares, additive subshares.
//! * [`protocol`]: the five-step coin mechanism and its m-of-n / 2-of-n lifts.
//! * [`strategies`], [`utility`]: decision rules, deviations, payoff tables.
//! * [`analysis`]: closed forms, the `alpha*` threshold, Monte Carlo audit.
//! * [`dominance`]: normal-form games and iterated weak-dominance deletion.
//! * [`cli`], [`report`]: the `rss` command implementations and report format.

pub mod analysis;
pub mod cli;
pub mod dominance;
pub mod error;
pub mod field;
pub mod protocol;
pub mod report;
pub mod rng;
pub mod shamir;
pub mod strategies;
pub mod utility;

pub use error::{Error, Result};
