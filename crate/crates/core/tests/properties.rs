mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rational_sharing::analysis::{alpha_star, alpha_star_scalars, withhold_value};
use rational_sharing::dominance::{dominates, iterate_deletion, weakly_dominated_set, NormalFormGame, Restriction};
use rational_sharing::field::{Field, DEFAULT_PRIME};
use rational_sharing::shamir::{Issuer, Share};
use rational_sharing::utility::{InfoVector, ScalarUtilities, UtilityTable};

fn game_of(sizes: &[usize], flat: &[i64]) -> (NormalFormGame, common::RefGame) {
    let players = sizes.len();
    let labels: Vec<Vec<String>> = sizes.iter().map(|&k| (0..k).map(|s| format!("s{s}")).collect()).collect();
    let total: usize = sizes.iter().product();
    let payoffs: Vec<Vec<i64>> = (0..total).map(|i| flat[i * players..(i + 1) * players].to_vec()).collect();
    let reference = common::RefGame { sizes: sizes.to_vec(), payoffs: payoffs.clone() };
    let game = NormalFormGame::from_integers(labels, |p| payoffs[reference.index(p)].clone()).unwrap();
    (game, reference)
}

fn scalars() -> impl Strategy<Value = ScalarUtilities> {
    (-50.0..50.0f64, 0.01..30.0f64, 0.01..30.0f64).prop_map(|(u_none, d1, d2)| ScalarUtilities {
        u_only: u_none + d1 + d2,
        u_all: u_none + d1,
        u_none,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dominated_sets_match_the_oracle_on_3x3x3_games(
        flat in prop::collection::vec(-3i64..=3, 27 * 3),
        mask in prop::collection::vec(any::<bool>(), 9),
    ) {
        let (game, reference) = game_of(&[3, 3, 3], &flat);
        let full = game.full_restriction();
        // a random restriction keeping at least one strategy per player
        let restricted: Restriction = (0..3)
            .map(|i| {
                let keep: Vec<usize> = (0..3).filter(|&s| mask[i * 3 + s]).collect();
                if keep.is_empty() { vec![i % 3] } else { keep }
            })
            .collect();
        for sets in [&full, &restricted] {
            for player in 0..3 {
                let engine: Vec<usize> =
                    weakly_dominated_set(&game, player, sets).unwrap().iter().map(|d| d.dominated).collect();
                prop_assert_eq!(engine, reference.dominated(sets, player));
            }
        }
    }

    #[test]
    fn deletion_traces_are_sound_and_monotone(flat in prop::collection::vec(-2i64..=2, 27 * 3)) {
        let (game, reference) = game_of(&[3, 3, 3], &flat);
        let trace = iterate_deletion(&game).unwrap();
        for (k, round) in trace.rounds.iter().enumerate() {
            for (i, deleted) in round.deleted.iter().enumerate() {
                for d in deleted {
                    prop_assert!(round.surviving[i].contains(&d.by));
                    prop_assert!(dominates(&game, i, d.by, d.dominated, &round.surviving));
                }
            }
            if let Some(next) = trace.rounds.get(k + 1) {
                for i in 0..3 {
                    prop_assert!(next.surviving[i].iter().all(|s| round.surviving[i].contains(s)));
                }
            }
        }
        let history = reference.delete_all();
        prop_assert_eq!(&trace.fixpoint, history.last().unwrap());
    }

    #[test]
    fn alpha_star_matches_bisection(s in scalars()) {
        let closed = alpha_star_scalars(s).unwrap();
        let bisected = common::alpha_star_bisection(s.u_only, s.u_all, s.u_none);
        prop_assert!((closed - bisected).abs() < 1e-9, "{} vs {}", closed, bisected);
        let table = UtilityTable::uniform(3, s).unwrap();
        prop_assert!((alpha_star(&table).unwrap().global - closed).abs() < 1e-12);
        // withholding pays exactly above the threshold
        if closed > 1e-6 && closed < 1.0 - 1e-6 {
            prop_assert!(withhold_value(closed * 0.999, s) < s.u_all);
            prop_assert!(withhold_value((closed * 1.001).min(0.999999), s) > s.u_all);
        }
    }

    #[test]
    fn withhold_value_increases_with_alpha(s in scalars()) {
        let grid: Vec<f64> = (1..100).map(|k| withhold_value(k as f64 / 100.0, s)).collect();
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn random_subsets_reconstruct(
        secret in 0..DEFAULT_PRIME,
        seed in any::<u64>(),
        m in 1usize..6,
        extra in 0usize..4,
        order in prop::collection::vec(any::<u32>(), 9),
    ) {
        let n = m + extra;
        let field = Field::new(DEFAULT_PRIME).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let issuer = Issuer::random(field, &mut rng);
        let shares = issuer.issue_shares(field.element(secret).unwrap(), m, n, 7, &mut rng).unwrap();
        let mut picked: Vec<Share> = shares.clone();
        picked.sort_by_key(|s| order[s.holder - 1]);
        let k = m + (order[0] as usize % (extra + 1));
        prop_assert_eq!(issuer.reconstruct(&picked[..k], m).unwrap().value(), secret);
        if m > 1 {
            prop_assert!(issuer.reconstruct(&picked[..m - 1], m).is_err());
        }
    }

    #[test]
    fn info_vector_strings_round_trip(bits in prop::collection::vec(any::<bool>(), 1..12)) {
        let v = InfoVector::new(bits.clone());
        let back: InfoVector = v.to_string().parse().unwrap();
        prop_assert_eq!(&back, &v);
        prop_assert_eq!(InfoVector::from_index(bits.len(), v.index()), v);
    }
}
