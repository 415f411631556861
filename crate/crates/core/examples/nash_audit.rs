//! Audit of every catalog deviation below and above the threshold.

use rational_sharing::analysis::{alpha_star, nash_audit};
use rational_sharing::field::Field;
use rational_sharing::strategies::deviation_catalog;
use rational_sharing::utility::UtilityTable;

fn main() -> rational_sharing::Result<()> {
    let table = UtilityTable::canonical(3);
    let secret = Field::new(2_147_483_647)?.element(17)?;
    let deviations: Vec<String> = deviation_catalog().into_iter().map(|(name, _)| name).collect();
    println!("alpha* = {}", alpha_star(&table)?.global);

    for alpha in [0.25, 0.8] {
        let report = nash_audit(secret, alpha, &table, &deviations, 10_000, 1)?;
        println!("\nalpha = {alpha}");
        for e in &report.entries {
            println!(
                "  {:<12} player {}  {:.4} +- {:.4} (closed form {:?})  baseline {}  {:?}",
                e.deviation, e.deviator, e.estimate, e.standard_error, e.closed_form, e.baseline, e.verdict
            );
        }
    }
    Ok(())
}
