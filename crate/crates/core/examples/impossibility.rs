//! Bounded exchanges between two holders collapse to never sending.

use rational_sharing::dominance::{build_bounded_game, check_practical, iterate_deletion};
use rational_sharing::utility::UtilityTable;

fn main() -> rational_sharing::Result<()> {
    let table = UtilityTable::canonical(2);
    for rounds in [1, 2] {
        let g = build_bounded_game(rounds, &table)?;
        let trace = iterate_deletion(&g.game)?;
        println!("{rounds} round(s), {} strategies each", g.game.strategies(0));
        for (k, round) in trace.labelled(&g.game).rounds.iter().enumerate() {
            for (player, deleted) in round.deleted.iter().enumerate() {
                for (sigma, tau) in deleted {
                    println!("  round {k}: player {player} drops {sigma} (dominated by {tau})");
                }
            }
        }
        for &a in &trace.fixpoint[0] {
            for &b in &trace.fixpoint[1] {
                println!(
                    "  survivor ({}, {}) -> learned {}",
                    g.game.label(0, a),
                    g.game.label(1, b),
                    g.outcome(&[a, b])
                );
            }
        }
    }

    let g = build_bounded_game(1, &table)?;
    let send = g.strategy("Send").expect("label");
    println!("(Send, Send): {:?}", check_practical(&g.game, &[send, send])?);
    Ok(())
}
