use std::sync::Arc;

use rational_sharing::analysis::{self, expected_steps, withhold_value, BatchStats};
use rational_sharing::field::{Field, FieldElement};
use rational_sharing::protocol::{
    lift_2_of_n, lift_m_of_n, run_trial, CoinTriple, Decision, IterationEvent, Layout, Mechanism, RunConfig,
    TerminalCause, TranscriptMode,
};
use rational_sharing::rng::trial_rng;
use rational_sharing::strategies::{Behavior, CheatEvidence, StrategyProfile};
use rational_sharing::utility::{InfoVector, ScalarUtilities};
use rational_sharing::Error;

fn secret() -> FieldElement {
    Field::new(2_147_483_647).unwrap().element(271_828).unwrap()
}

fn assignments() -> Vec<[CoinTriple; 3]> {
    let all = CoinTriple::all();
    let mut out = Vec::new();
    for a in all {
        for b in all {
            for c in all {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn honest_mechanism() -> Mechanism {
    Mechanism::new(
        secret(),
        Layout::three_of_three(),
        StrategyProfile::honest(3),
        RunConfig::new(0.5).with_transcripts(TranscriptMode::Summary),
        trial_rng(5, 0),
    )
    .unwrap()
}

/// After an honest iteration: either everyone learned and stopped, or nobody
/// can reconstruct and everyone restarts.
fn check_atomic(m: &Mechanism, coins: &[CoinTriple; 3], decisions: &[Option<Decision>; 3]) {
    let heads = coins.iter().filter(|c| c.c).count();
    let learned: Vec<bool> = (1..=3).map(|p| m.state(p).learned).collect();
    if heads == 3 {
        assert_eq!(learned, vec![true; 3]);
        assert!(decisions.iter().all(|d| *d == Some(Decision::Stop { learned: true })));
        // property (*): a player holding every share stops instead of drawing new coins
        assert!((1..=3).all(|p| m.state(p).holds_all_shares() && !m.state(p).active));
    } else {
        assert_eq!(learned, vec![false; 3], "{coins:?}");
        assert!(decisions.iter().all(|d| *d == Some(Decision::Restart)));
        for p in 1..=3 {
            let st = m.state(p);
            assert!(st.active && !st.holds_all_shares());
            let held = st.current_holdings().unwrap().known_holders();
            assert!(held.contains(&p));
            assert!(held.len() <= 2);
        }
    }
}

#[test]
fn honest_iterations_are_atomic_over_every_assignment_to_depth_two() {
    let mut success_paths = 0;
    for first in assignments() {
        let mut m = honest_mechanism();
        let t = m.play_iteration_with_coins(first);
        check_atomic(&m, &first, &t.decisions);
        let parity = first.iter().fold(false, |acc, c| acc ^ c.c);
        assert_eq!(t.parity, [Some(parity); 3]);
        if t.event() == Some(IterationEvent::Success) {
            success_paths += 1;
            continue;
        }
        for second in assignments() {
            let mut m = honest_mechanism();
            m.play_iteration_with_coins(first);
            let t = m.play_iteration_with_coins(second);
            check_atomic(&m, &second, &t.decisions);
            let parity = second.iter().fold(false, |acc, c| acc ^ c.c);
            assert_eq!(t.parity, [Some(parity); 3]);
            if t.event() == Some(IterationEvent::Success) {
                success_paths += 1;
                let out = m.finish(false);
                assert_eq!(out.info, InfoVector::everyone(3));
                assert_eq!(out.recovered, vec![Some(secret().value()); 3]);
            }
        }
    }
    // 8 of 64 assignments have three heads; 56 restarts each branch into 8 more
    assert_eq!(success_paths, 8 + 56 * 8);
}

#[test]
fn restart_epochs_do_not_combine() {
    let mut m = honest_mechanism();
    let lone = [CoinTriple::new(true, false), CoinTriple::new(false, false), CoinTriple::new(false, true)];
    m.play_iteration_with_coins(lone);
    let old: Vec<_> = m.state(2).holdings[&0].shares.values().copied().collect();
    m.play_iteration_with_coins(lone);
    let new: Vec<_> = m.state(2).holdings[&1].shares.values().copied().collect();
    assert_eq!(old.len(), 2);
    let mixed = vec![old[0], old[1], new.into_iter().find(|s| s.holder == 2).unwrap()];
    assert!(matches!(m.issuer().reconstruct(&mixed, 3), Err(Error::EpochMismatch(..))));
}

#[test]
fn honest_lifts_end_with_everyone_learning() {
    let cfg = RunConfig::new(0.5);
    for seed in 0..40 {
        for (m, n) in [(3, 6), (4, 5), (3, 4), (5, 9)] {
            let out = lift_m_of_n(secret(), m, n, &StrategyProfile::honest(n), &cfg, seed).unwrap();
            assert_eq!(out.cause, TerminalCause::AllLearned, "{m}-of-{n} seed {seed}");
            assert_eq!(out.recovered, vec![Some(secret().value()); n]);
            assert_eq!(out.parity_disagreements, 0);
        }
        for n in [3, 4, 5] {
            let out = lift_2_of_n(secret(), n, &StrategyProfile::honest(n), &cfg, seed).unwrap();
            assert_eq!(out.cause, TerminalCause::AllLearned, "2-of-{n} seed {seed}");
            assert_eq!(out.recovered, vec![Some(secret().value()); n]);
        }
    }
}

#[test]
fn two_of_two_has_no_lift() {
    let err = lift_2_of_n(secret(), 2, &StrategyProfile::honest(2), &RunConfig::new(0.5), 0).unwrap_err();
    assert!(matches!(err, Error::Layout(_)));
    assert!(Layout::for_threshold(2, 2).is_err());
}

#[test]
fn withheld_forward_aborts_the_group() {
    // 4-of-5: player 2 must forward its share to leader 1
    let profile = StrategyProfile::with_deviant(5, 2, Arc::new(Behavior::WithholdForward));
    for seed in 0..10 {
        let out = lift_m_of_n(secret(), 4, 5, &profile, &RunConfig::new(0.5), seed).unwrap();
        assert_eq!(out.cause, TerminalCause::MissingBitAbort);
        assert_eq!(out.info, InfoVector::none(5));
        assert_eq!(out.iterations, 1);
    }
}

#[test]
fn tampered_subshares_are_rejected() {
    let profile = StrategyProfile::with_deviant(4, 1, Arc::new(Behavior::Tamper));
    let out = lift_2_of_n(secret(), 4, &profile, &RunConfig::new(0.5), 1).unwrap();
    assert_eq!(out.info, InfoVector::none(4));
    assert_ne!(out.cause, TerminalCause::AllLearned);
    let bad_tags = out.cheat_evidence.iter().flatten().filter(|e| matches!(e, CheatEvidence::BadTag { .. })).count();
    assert!(bad_tags > 0);
}

#[test]
fn identical_inputs_give_identical_transcripts() {
    let cfg = RunConfig::new(0.4).with_transcripts(TranscriptMode::Full);
    let layout = Layout::m_of_n(4, 5).unwrap();
    let profile = StrategyProfile::honest(5);
    let a = run_trial(secret(), &layout, &profile, &cfg, 17, 3).unwrap();
    let b = run_trial(secret(), &layout, &profile, &cfg, 17, 3).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = run_trial(secret(), &layout, &profile, &cfg, 17, 4).unwrap();
    assert_ne!(serde_json::to_string(&a.transcripts).unwrap(), serde_json::to_string(&c.transcripts).unwrap());
}

#[test]
fn transcript_mode_does_not_change_outcomes() {
    let layout = Layout::three_of_three();
    let profile = StrategyProfile::with_deviant(3, 2, Arc::new(Behavior::GarbleStep2));
    for t in 0..20 {
        let full =
            run_trial(secret(), &layout, &profile, &RunConfig::new(0.6).with_transcripts(TranscriptMode::Full), 9, t);
        let off =
            run_trial(secret(), &layout, &profile, &RunConfig::new(0.6).with_transcripts(TranscriptMode::Off), 9, t);
        let (full, off) = (full.unwrap(), off.unwrap());
        assert_eq!((full.iterations, full.info, full.cause), (off.iterations, off.info, off.cause));
    }
}

#[test]
fn simulation_agrees_with_closed_forms_on_the_alpha_grid() {
    let s = ScalarUtilities::CANONICAL;
    let trials = 2_000;
    for k in 1..=9 {
        let alpha = k as f64 / 10.0;
        let honest = analysis::simulate(
            secret(),
            &Layout::three_of_three(),
            &StrategyProfile::honest(3),
            &RunConfig::new(alpha),
            trials,
            100 + k,
            0,
        )
        .unwrap();
        let stats = BatchStats::from_runs(&honest);
        let closed = expected_steps(alpha).unwrap();
        assert!((stats.mean_steps - closed).abs() < 3.0 * stats.steps_standard_error, "alpha {alpha}: steps");
        assert_eq!(stats.partial_outcomes, 0);
        assert!(honest.iter().all(|r| r.info.all()));

        let profile = StrategyProfile::with_deviant(3, 1, Arc::new(Behavior::Withhold));
        let runs = analysis::simulate(
            secret(),
            &Layout::three_of_three(),
            &profile,
            &RunConfig::new(alpha),
            trials,
            200 + k,
            0,
        )
        .unwrap();
        let payoff = |v: &InfoVector| match (v.learned(1), v.count()) {
            (true, 1) => s.u_only,
            (false, 0) => s.u_none,
            _ => panic!("withholding run ended in {v}"),
        };
        let values: Vec<f64> = runs.iter().map(|r| payoff(&r.info)).collect();
        let mean = values.iter().sum::<f64>() / trials as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
        let se = (var / trials as f64).sqrt();
        assert!((mean - withhold_value(alpha, s)).abs() < 3.0 * se, "alpha {alpha}: withhold {mean} vs closed form");
    }
}
