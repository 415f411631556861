//! Mean running time of honest play against 5 / alpha^3.

use rational_sharing::analysis::verify_running_time;
use rational_sharing::field::Field;

fn main() -> rational_sharing::Result<()> {
    let secret = Field::new(2_147_483_647)?.element(99)?;
    println!("{:>6} {:>10} {:>10} {:>8} {:>9}", "alpha", "5/a^3", "mean", "se", "rel.err");
    for alpha in [0.3, 0.5, 0.8, 1.0] {
        let r = verify_running_time(secret, alpha, 50_000, 11)?;
        println!(
            "{:>6} {:>10.3} {:>10.3} {:>8.3} {:>8.3}%",
            alpha,
            r.closed_form,
            r.mean_steps,
            r.standard_error,
            100.0 * r.relative_error
        );
    }
    Ok(())
}
