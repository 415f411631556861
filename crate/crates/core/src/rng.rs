//! Seed expansion.
//!
//! Every stochastic command takes one 64-bit seed. Trial `t` uses the
//! ChaCha8 stream `t` of that seed; inside a trial, the issuer key, the
//! issuer's polynomial stream and each player's private coin stream are
//! seeded in that order from consecutive `u64` draws of the trial stream.
//! Results therefore do not depend on how trials are scheduled across
//! worker threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Root generator of trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Child generator seeded from the next draw of `parent`.
pub fn child(parent: &mut SimRng) -> SimRng {
    ChaCha8Rng::seed_from_u64(parent.next_u64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trial_rng(42, 7).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(trial_rng(42, 7).next_u64(), trial_rng(42, 8).next_u64());
        assert_ne!(trial_rng(42, 7).next_u64(), trial_rng(43, 7).next_u64());
    }
}
