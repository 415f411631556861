//! When does withholding a share pay? Closed form, exact enumeration and
//! simulation for the canonical payoffs (u_only = 2, u_all = 1, u_none = 0).

use std::sync::Arc;

use rational_sharing::analysis::{absorbed_distribution, expected_utility_withhold, withhold_split};
use rational_sharing::field::Field;
use rational_sharing::strategies::{Behavior, StrategyProfile};
use rational_sharing::utility::UtilityTable;

fn main() -> rational_sharing::Result<()> {
    let table = UtilityTable::canonical(3);
    let secret = Field::new(2_147_483_647)?.element(5)?;
    let profile = StrategyProfile::with_deviant(3, 1, Arc::new(Behavior::Withhold));

    println!("alpha  E[withhold]  enumerated  only-deviator (sim / exact)");
    for alpha in [0.2, 0.4, 0.5, 0.6, 0.8] {
        let closed = expected_utility_withhold(alpha, &table, 1)?;
        let exact = absorbed_distribution(&profile, [alpha; 3])?;
        let enumerated: f64 = exact.iter().map(|(v, p)| p * table.payoff(1, v)).sum();
        let split = withhold_split(secret, alpha, 20_000, 3)?;
        println!(
            "{alpha:<5}  {closed:>11.4}  {enumerated:>10.4}  {:.4} / {:.4}",
            split.observed_fraction, split.predicted_fraction
        );
    }
    println!("honest play pays u_all = 1; withholding pays off only above alpha* = 0.5");
    Ok(())
}
