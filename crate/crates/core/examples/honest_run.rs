//! One fully logged honest run of the 3-of-3 mechanism.

use rational_sharing::field::Field;
use rational_sharing::protocol::{run_mechanism, RunConfig, TranscriptMode};
use rational_sharing::strategies::StrategyProfile;

fn main() -> rational_sharing::Result<()> {
    let secret = Field::new(2_147_483_647)?.element(123_456)?;
    let config = RunConfig::new(0.5).with_transcripts(TranscriptMode::Full);
    let outcome = run_mechanism(secret, &StrategyProfile::honest(3), &config, 2024)?;

    for t in &outcome.transcripts {
        let heads: Vec<u8> = t.coins.iter().map(|c| c.map_or(0, |c| c.c as u8)).collect();
        println!(
            "iteration {:>2}: coins {:?} broadcasters {:?} -> {:?}",
            t.iteration,
            heads,
            t.broadcasters,
            t.event()
        );
    }
    println!(
        "{:?} after {} iterations ({} steps), learned {}, recovered {:?}",
        outcome.cause, outcome.iterations, outcome.total_steps, outcome.info, outcome.recovered
    );
    Ok(())
}
