//! Scalar expansion, validation and the per-player threshold.

use rational_sharing::analysis::alpha_star;
use rational_sharing::utility::{validate_utilities, InfoVector, ScalarUtilities, UtilityTable};

fn main() -> rational_sharing::Result<()> {
    let table = UtilityTable::from_scalars(
        3,
        &[
            ScalarUtilities::CANONICAL,
            ScalarUtilities { u_only: 5.0, u_all: 1.0, u_none: 0.0 },
            ScalarUtilities { u_only: 3.0, u_all: 2.0, u_none: 0.0 },
        ],
    )?;
    for idx in 0..8 {
        let v = InfoVector::from_index(3, idx);
        let row: Vec<f64> = (1..=3).map(|i| table.payoff(i, &v)).collect();
        println!("{v}: {row:?}");
    }
    let a = alpha_star(&table)?;
    println!("alpha* per player {:?}, global {:.6}", a.per_player, a.global);

    let mut broken = table.clone();
    broken.set(2, &InfoVector::everyone(3), 9.0);
    for v in validate_utilities(&broken).violations {
        println!(
            "violation: player {} {:?}: u({}) = {} !> u({}) = {}",
            v.player, v.axiom, v.better, v.better_payoff, v.worse, v.worse_payoff
        );
    }
    println!("{}", serde_json::to_string(&table.to_document())?);
    Ok(())
}
