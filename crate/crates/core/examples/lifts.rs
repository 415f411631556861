//! The three-leader mechanism driving larger sharings: m-of-n via groups and
//! 2-of-n via subshare bundles.

use std::sync::Arc;

use rational_sharing::field::Field;
use rational_sharing::protocol::{lift_2_of_n, lift_m_of_n, Layout, RunConfig};
use rational_sharing::strategies::{Behavior, StrategyProfile};

fn main() -> rational_sharing::Result<()> {
    let secret = Field::new(2_147_483_647)?.element(31_337)?;
    let config = RunConfig::new(0.5);

    for (m, n) in [(3, 6), (4, 5), (5, 9)] {
        let layout = Layout::m_of_n(m, n)?;
        let groups: Vec<_> = layout.groups.iter().map(|g| g.players.clone()).collect();
        let out = lift_m_of_n(secret, m, n, &StrategyProfile::honest(n), &config, 4)?;
        println!("{m}-of-{n}: groups {groups:?} -> {:?}, learned {}", out.cause, out.info);
    }

    for n in [3, 4, 6] {
        let out = lift_2_of_n(secret, n, &StrategyProfile::honest(n), &config, 4)?;
        println!("2-of-{n}: {:?}, learned {}", out.cause, out.info);
    }
    if let Err(e) = Layout::two_of_n(2) {
        println!("2-of-2: {e}");
    }

    let tamper = StrategyProfile::with_deviant(4, 1, Arc::new(Behavior::Tamper));
    let out = lift_2_of_n(secret, 4, &tamper, &config, 4)?;
    println!("2-of-4 with a tampering holder: {:?}, learned {}", out.cause, out.info);
    Ok(())
}
