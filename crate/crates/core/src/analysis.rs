//! Closed forms for the coin mechanism and Monte Carlo checks against them.
//!
//! Under honest play an iteration ends in one of three ways: three heads
//! (everyone broadcasts and learns), exactly one head (a lone broadcast,
//! then a restart) or even parity (silence, then a restart). A leader that
//! withholds when `p = c_i = 1` ends the run either learning alone (both
//! others had heads) or with nobody learning (both had tails), so its
//! expected payoff is
//!
//! ```text
//!   [a^2 u_only + (1-a)^2 u_none] / [a^2 + (1-a)^2]
//! ```
//!
//! Withholding pays iff this exceeds `u_all`, i.e. iff
//! `a^2 (u_only - u_all) > (1-a)^2 (u_all - u_none)`. The boundary is
//! `a* = sqrt(R) / (1 + sqrt(R))` with `R = (u_all - u_none) / (u_only - u_all)`.
//!
//! Monte Carlo batches run trial `t` on stream `t` of the seed (see
//! [`crate::rng`]) and aggregate integer histograms, so results do not depend
//! on thread count.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::protocol::{
    self, CoinTriple, IterationEvent, Layout, Mechanism, RunConfig, RunOutcome, TerminalCause, TranscriptMode,
    STEPS_PER_ITERATION,
};
use crate::rng;
use crate::strategies::{Behavior, Strategy, StrategyProfile};
use crate::utility::{utility_of_run, validate_utilities, InfoVector, ScalarUtilities, UtilityTable};

/// Monte Carlo verdict gate, in standard errors.
pub const SIGMA_GATE: f64 = 3.0;

/// Minimum trials per audit cell.
pub const MIN_AUDIT_TRIALS: u64 = 10_000;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

fn check_open_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Per-iteration outcome probabilities under honest play.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationDistribution {
    pub p_success: f64,
    pub p_lone_send: f64,
    pub p_silent_restart: f64,
}

impl IterationDistribution {
    pub fn get(&self, event: IterationEvent) -> f64 {
        match event {
            IterationEvent::Success => self.p_success,
            IterationEvent::LoneSend => self.p_lone_send,
            IterationEvent::SilentRestart => self.p_silent_restart,
        }
    }
}

pub fn iteration_distribution(alpha: f64) -> Result<IterationDistribution> {
    check_alpha(alpha)?;
    let q = 1.0 - alpha;
    Ok(IterationDistribution {
        p_success: alpha.powi(3),
        p_lone_send: 3.0 * alpha * q * q,
        p_silent_restart: q.powi(3) + 3.0 * alpha * alpha * q,
    })
}

/// Expected payoff of withholding, from the scalar payoffs.
pub fn withhold_value(alpha: f64, s: ScalarUtilities) -> f64 {
    let heads = alpha * alpha;
    let tails = (1.0 - alpha) * (1.0 - alpha);
    (heads * s.u_only + tails * s.u_none) / (heads + tails)
}

/// True iff withholding strictly beats honesty for these payoffs.
pub fn withholding_pays(alpha: f64, s: ScalarUtilities) -> bool {
    withhold_value(alpha, s) > s.u_all
}

fn validated(table: &UtilityTable) -> Result<()> {
    validate_utilities(table).into_result()
}

/// Expected payoff of `player` withholding at step 3 against honest opponents.
pub fn expected_utility_withhold(alpha: f64, table: &UtilityTable, player: usize) -> Result<f64> {
    check_alpha(alpha)?;
    validated(table)?;
    Ok(withhold_value(alpha, table.scalars(player)))
}

/// Expected payoff of honest play: the run ends with everyone learning almost surely.
pub fn expected_utility_honest(alpha: f64, table: &UtilityTable, player: usize) -> Result<f64> {
    check_open_alpha(alpha)?;
    validated(table)?;
    Ok(table.scalars(player).u_all)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaStar {
    pub per_player: Vec<f64>,
    pub global: f64,
}

/// Threshold below which withholding never pays; equality counts as no incentive.
pub fn alpha_star_scalars(s: ScalarUtilities) -> Option<f64> {
    if !(s.u_only > s.u_all && s.u_all > s.u_none) {
        return None;
    }
    let r = (s.u_all - s.u_none) / (s.u_only - s.u_all);
    let root = r.sqrt();
    Some(root / (1.0 + root))
}

pub fn alpha_star(table: &UtilityTable) -> Result<AlphaStar> {
    validated(table)?;
    let per_player = (1..=table.players())
        .map(|i| alpha_star_scalars(table.scalars(i)).ok_or(Error::DegenerateUtilities(i)))
        .collect::<Result<Vec<f64>>>()?;
    let global = per_player.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(AlphaStar { per_player, global })
}

/// Expected total steps of an honest run.
pub fn expected_steps(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(STEPS_PER_ITERATION as f64 / alpha.powi(3))
}

/// Compact per-run result kept by batch drivers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub iterations: u64,
    pub info: InfoVector,
    pub cause: TerminalCause,
    pub parity_disagreements: u64,
    /// Every learner reconstructed the true secret.
    pub recovered_correctly: bool,
}

impl RunSummary {
    pub fn from_outcome(outcome: &RunOutcome, secret: FieldElement) -> Self {
        let recovered_correctly = outcome
            .recovered
            .iter()
            .zip(outcome.info.bits())
            .all(|(r, &learned)| !learned || *r == Some(secret.value()));
        RunSummary {
            iterations: outcome.iterations,
            info: outcome.info.clone(),
            cause: outcome.cause,
            parity_disagreements: outcome.parity_disagreements,
            recovered_correctly,
        }
    }
}

/// Runs `trials` independent trials in parallel; element `t` is trial `t`.
pub fn simulate(
    secret: FieldElement,
    layout: &Layout,
    profile: &StrategyProfile,
    config: &RunConfig,
    trials: u64,
    seed: u64,
    first_stream: u64,
) -> Result<Vec<RunSummary>> {
    config.validate()?;
    let config = RunConfig { transcripts: TranscriptMode::Off, ..config.clone() };
    (0..trials)
        .into_par_iter()
        .map(|t| {
            protocol::run_trial(secret, layout, profile, &config, seed, first_stream + t)
                .map(|o| RunSummary::from_outcome(&o, secret))
        })
        .collect()
}

/// Aggregates of a batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchStats {
    pub trials: u64,
    pub causes: BTreeMap<TerminalCause, u64>,
    pub info_histogram: BTreeMap<String, u64>,
    pub mean_iterations: f64,
    pub mean_steps: f64,
    pub steps_standard_error: f64,
    pub partial_outcomes: u64,
    pub parity_disagreements: u64,
    pub bad_recoveries: u64,
}

impl BatchStats {
    pub fn from_runs(runs: &[RunSummary]) -> Self {
        let trials = runs.len() as u64;
        let mut causes = BTreeMap::new();
        let mut info_histogram = BTreeMap::new();
        let mut iter_hist: BTreeMap<u64, u64> = BTreeMap::new();
        for r in runs {
            *causes.entry(r.cause).or_insert(0) += 1;
            *info_histogram.entry(r.info.to_string()).or_insert(0) += 1;
            *iter_hist.entry(r.iterations).or_insert(0) += 1;
        }
        let (mean, se) = mean_and_se(iter_hist.iter().map(|(&k, &c)| (STEPS_PER_ITERATION as f64 * k as f64, c)));
        BatchStats {
            trials,
            causes,
            info_histogram,
            mean_iterations: mean / STEPS_PER_ITERATION as f64,
            mean_steps: mean,
            steps_standard_error: se,
            partial_outcomes: runs.iter().filter(|r| r.info.is_partial()).count() as u64,
            parity_disagreements: runs.iter().map(|r| r.parity_disagreements).sum(),
            bad_recoveries: runs.iter().filter(|r| !r.recovered_correctly).count() as u64,
        }
    }

    pub fn fraction(&self, cause: TerminalCause) -> f64 {
        *self.causes.get(&cause).unwrap_or(&0) as f64 / self.trials as f64
    }
}

/// Mean and standard error of the mean from `(value, count)` pairs.
pub fn mean_and_se(weighted: impl Iterator<Item = (f64, u64)> + Clone) -> (f64, f64) {
    let n: u64 = weighted.clone().map(|(_, c)| c).sum();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = weighted.clone().map(|(v, c)| v * c as f64).sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = weighted.map(|(v, c)| (v - mean).powi(2) * c as f64).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunningTimeReport {
    pub alpha: f64,
    pub trials: u64,
    pub closed_form: f64,
    pub mean_steps: f64,
    pub standard_error: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// Relative tolerance for the running-time check.
pub const RUNNING_TIME_TOLERANCE: f64 = 0.02;

/// Compares the empirical mean of `5 x iterations` over honest runs with `5 / a^3`.
pub fn verify_running_time(secret: FieldElement, alpha: f64, trials: u64, seed: u64) -> Result<RunningTimeReport> {
    let closed_form = expected_steps(alpha)?;
    let runs = simulate(
        secret,
        &Layout::three_of_three(),
        &StrategyProfile::honest(3),
        &RunConfig::new(alpha),
        trials,
        seed,
        0,
    )?;
    let stats = BatchStats::from_runs(&runs);
    let relative_error = (stats.mean_steps - closed_form).abs() / closed_form;
    Ok(RunningTimeReport {
        alpha,
        trials,
        closed_form,
        mean_steps: stats.mean_steps,
        standard_error: stats.steps_standard_error,
        relative_error,
        tolerance: RUNNING_TIME_TOLERANCE,
        within_tolerance: relative_error <= RUNNING_TIME_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub alpha: f64,
    pub trials: u64,
    pub expected: IterationDistribution,
    pub observed: BTreeMap<IterationEvent, f64>,
    pub max_abs_error: f64,
}

/// Empirical frequencies of the three honest iteration events, one iteration per trial.
pub fn iteration_frequencies(secret: FieldElement, alpha: f64, trials: u64, seed: u64) -> Result<FrequencyReport> {
    let expected = iteration_distribution(alpha)?;
    let config = RunConfig::new(alpha).with_transcripts(TranscriptMode::Off);
    let events = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<IterationEvent> {
            let mut mech = Mechanism::new(
                secret,
                Layout::three_of_three(),
                StrategyProfile::honest(3),
                config.clone(),
                rng::trial_rng(seed, t),
            )?;
            mech.play_iteration()
                .event()
                .ok_or_else(|| Error::Invariant("honest leader skipped its coin commitment".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts: BTreeMap<IterationEvent, u64> = BTreeMap::new();
    for e in events {
        *counts.entry(e).or_insert(0) += 1;
    }
    let observed: BTreeMap<IterationEvent, f64> =
        [IterationEvent::Success, IterationEvent::LoneSend, IterationEvent::SilentRestart]
            .into_iter()
            .map(|e| (e, *counts.get(&e).unwrap_or(&0) as f64 / trials as f64))
            .collect();
    let max_abs_error = observed.iter().map(|(e, f)| (f - expected.get(*e)).abs()).fold(0.0, f64::max);
    Ok(FrequencyReport { alpha, trials, expected, observed, max_abs_error })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WithholdSplitReport {
    pub alpha: f64,
    pub trials: u64,
    pub deviator: usize,
    pub absorbed: u64,
    pub only_deviator: u64,
    pub nobody: u64,
    pub observed_fraction: f64,
    pub predicted_fraction: f64,
}

/// Share of terminated withholding runs in which only the withholder learns.
pub fn withhold_split(secret: FieldElement, alpha: f64, trials: u64, seed: u64) -> Result<WithholdSplitReport> {
    check_alpha(alpha)?;
    let deviator = 1;
    let profile = StrategyProfile::with_deviant(3, deviator, Arc::new(Behavior::Withhold));
    let runs = simulate(secret, &Layout::three_of_three(), &profile, &RunConfig::new(alpha), trials, seed, 0)?;
    let absorbed: Vec<&RunSummary> = runs.iter().filter(|r| r.cause != TerminalCause::IterationCapHit).collect();
    let only = InfoVector::only(3, deviator);
    let only_deviator = absorbed.iter().filter(|r| r.info == only).count() as u64;
    let nobody = absorbed.iter().filter(|r| r.info.count() == 0).count() as u64;
    let heads = alpha * alpha;
    let tails = (1.0 - alpha) * (1.0 - alpha);
    Ok(WithholdSplitReport {
        alpha,
        trials,
        deviator,
        absorbed: absorbed.len() as u64,
        only_deviator,
        nobody,
        observed_fraction: only_deviator as f64 / absorbed.len() as f64,
        predicted_fraction: heads / (heads + tails),
    })
}

/// Exact distribution of the final learned-vector for a 3-of-3 profile whose
/// behaviour is the same every iteration, by enumerating all 64 committed
/// coin assignments of one iteration and conditioning on the run ending.
/// `biases[k]` is the probability that ring position `k + 1` commits `c = 1`.
pub fn absorbed_distribution(profile: &StrategyProfile, biases: [f64; 3]) -> Result<BTreeMap<InfoVector, f64>> {
    let secret = crate::field::Field::new(101)?.element(1)?;
    let mut restart_mass = 0.0;
    let mut terminal: BTreeMap<InfoVector, f64> = BTreeMap::new();
    let all = CoinTriple::all();
    for a in all {
        for b in all {
            for c in all {
                let coins = [a, b, c];
                let weight: f64 =
                    coins.iter().zip(biases).map(|(t, bias)| if t.c { bias } else { 1.0 - bias } * 0.5).product();
                if weight == 0.0 {
                    continue;
                }
                let mut mech = Mechanism::new(
                    secret,
                    Layout::three_of_three(),
                    profile.clone(),
                    RunConfig::new(0.5).with_transcripts(TranscriptMode::Off),
                    rng::trial_rng(0, 0),
                )?;
                let t = mech.play_iteration_with_coins(coins);
                if t.decisions.iter().all(|d| *d == Some(protocol::Decision::Restart)) {
                    restart_mass += weight;
                } else {
                    let out = mech.run();
                    *terminal.entry(out.info).or_insert(0.0) += weight;
                }
            }
        }
    }
    let absorbed = 1.0 - restart_mass;
    if absorbed <= 0.0 {
        return Err(Error::Invariant("profile never terminates".into()));
    }
    Ok(terminal.into_iter().map(|(v, w)| (v, w / absorbed)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NoIncentive,
    ProfitableDeviation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub deviation: String,
    pub deviator: usize,
    pub closed_form: Option<f64>,
    pub estimate: f64,
    pub standard_error: f64,
    pub baseline: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashAuditReport {
    pub alpha: f64,
    pub trials: u64,
    pub seed: u64,
    pub entries: Vec<AuditEntry>,
}

impl NashAuditReport {
    pub fn profitable(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::ProfitableDeviation)
    }
}

pub fn verdict(estimate: f64, standard_error: f64, baseline: f64, closed_form: Option<f64>) -> Verdict {
    let mc = estimate - baseline > SIGMA_GATE * standard_error;
    let exact = closed_form.is_some_and(|c| c > baseline);
    if mc || exact {
        Verdict::ProfitableDeviation
    } else {
        Verdict::NoIncentive
    }
}

/// Estimates every listed unilateral deviation of every player against
/// honest opponents in the 3-of-3 mechanism. Audit cell `k` (deviation-major,
/// then deviator) uses streams `k * trials .. (k + 1) * trials`.
pub fn nash_audit(
    secret: FieldElement,
    alpha: f64,
    table: &UtilityTable,
    deviations: &[String],
    trials: u64,
    seed: u64,
) -> Result<NashAuditReport> {
    check_open_alpha(alpha)?;
    if trials < MIN_AUDIT_TRIALS {
        return Err(Error::config("trials", format!("audit needs at least {MIN_AUDIT_TRIALS} trials")));
    }
    if table.players() != 3 {
        return Err(Error::config("utilities", "the audit runs the 3-player mechanism"));
    }
    validated(table)?;
    let behaviors = deviations.iter().map(|d| Behavior::parse(d)).collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    let config = RunConfig::new(alpha);
    for (d, behavior) in behaviors.iter().enumerate() {
        for deviator in 1..=3 {
            let cell = (d * 3 + deviator - 1) as u64;
            let profile = StrategyProfile::with_deviant(3, deviator, Arc::new(*behavior));
            let runs = simulate(secret, &Layout::three_of_three(), &profile, &config, trials, seed, cell * trials)?;
            let mut hist: BTreeMap<(InfoVector, bool), u64> = BTreeMap::new();
            for r in &runs {
                *hist.entry((r.info.clone(), r.cause == TerminalCause::IterationCapHit)).or_insert(0) += 1;
            }
            let values = hist.iter().map(|((info, capped), &count)| {
                let v = if *capped { InfoVector::none(3) } else { info.clone() };
                (table.payoff(deviator, &v), count)
            });
            let (estimate, standard_error) = mean_and_se(values.collect::<Vec<_>>().into_iter());
            let baseline = expected_utility_honest(alpha, table, deviator)?;
            let closed_form = match behavior {
                Behavior::Withhold => Some(expected_utility_withhold(alpha, table, deviator)?),
                _ => None,
            };
            entries.push(AuditEntry {
                deviation: behavior.name(),
                deviator,
                closed_form,
                estimate,
                standard_error,
                baseline,
                verdict: verdict(estimate, standard_error, baseline, closed_form),
            });
        }
    }
    Ok(NashAuditReport { alpha, trials, seed, entries })
}

/// Mean payoff of `player` over finished runs.
pub fn mean_utility(outcomes: &[RunOutcome], table: &UtilityTable, player: usize) -> f64 {
    outcomes.iter().map(|o| utility_of_run(o, table, player)).sum::<f64>() / outcomes.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_examples() {
        let d = iteration_distribution(0.5).unwrap();
        assert_eq!((d.p_success, d.p_lone_send, d.p_silent_restart), (0.125, 0.375, 0.5));
        let d = iteration_distribution(1.0).unwrap();
        assert_eq!((d.p_success, d.p_lone_send, d.p_silent_restart), (1.0, 0.0, 0.0));
        assert!(iteration_distribution(0.0).is_err());
        assert!(iteration_distribution(1.5).is_err());
    }

    #[test]
    fn distribution_sums_to_one() {
        for k in 1..=100 {
            let d = iteration_distribution(k as f64 / 100.0).unwrap();
            assert!((d.p_success + d.p_lone_send + d.p_silent_restart - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn distribution_matches_coin_enumeration() {
        // weight each of the 8 head patterns directly
        for alpha in [0.1f64, 0.3, 0.5, 0.8] {
            let mut by_event: BTreeMap<IterationEvent, f64> = BTreeMap::new();
            for pattern in 0..8u32 {
                let heads = pattern.count_ones();
                let w = alpha.powi(heads as i32) * (1.0 - alpha).powi(3 - heads as i32);
                *by_event.entry(IterationEvent::classify(heads as usize)).or_default() += w;
            }
            let d = iteration_distribution(alpha).unwrap();
            for (e, w) in by_event {
                assert!((d.get(e) - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn withhold_examples() {
        let t = UtilityTable::canonical(3);
        assert_eq!(expected_utility_withhold(0.5, &t, 1).unwrap(), 1.0);
        let near_zero = expected_utility_withhold(1e-6, &t, 1).unwrap();
        assert!((near_zero - 0.0).abs() < 1e-10);
        let v = expected_utility_withhold(0.8, &t, 2).unwrap();
        assert!((v - 0.64 * 2.0 / 0.68).abs() < 1e-12);
    }

    #[test]
    fn honest_value_is_u_all() {
        let t = UtilityTable::canonical(3);
        for k in 1..=9 {
            assert_eq!(expected_utility_honest(k as f64 / 10.0, &t, 1).unwrap(), 1.0);
        }
        assert!(expected_utility_honest(1.0, &t, 1).is_err());
        assert!(expected_utility_honest(0.0, &t, 1).is_err());
    }

    #[test]
    fn invalid_tables_are_rejected() {
        let mut t = UtilityTable::canonical(3);
        t.set(1, &InfoVector::none(3), 5.0);
        assert!(matches!(expected_utility_withhold(0.3, &t, 1), Err(Error::InvalidUtilities(_))));
        assert!(matches!(alpha_star(&t), Err(Error::InvalidUtilities(_))));
    }

    #[test]
    fn alpha_star_examples() {
        assert_eq!(alpha_star(&UtilityTable::canonical(3)).unwrap().global, 0.5);
        let s = ScalarUtilities { u_only: 5.0, u_all: 1.0, u_none: 0.0 };
        let a = alpha_star(&UtilityTable::uniform(3, s).unwrap()).unwrap();
        assert!((a.global - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(alpha_star_scalars(ScalarUtilities { u_only: 1.0, u_all: 1.0, u_none: 0.0 }), None);
    }

    #[test]
    fn asymmetric_tables_take_the_minimum() {
        let per = [
            ScalarUtilities::CANONICAL,
            ScalarUtilities { u_only: 5.0, u_all: 1.0, u_none: 0.0 },
            ScalarUtilities { u_only: 3.0, u_all: 2.0, u_none: 0.0 },
        ];
        let a = alpha_star(&UtilityTable::from_scalars(3, &per).unwrap()).unwrap();
        assert_eq!(a.per_player.len(), 3);
        assert!((a.global - 1.0 / 3.0).abs() < 1e-15);
        assert!(a.per_player[2] > 0.5);
    }

    #[test]
    fn steps_closed_form() {
        assert_eq!(expected_steps(0.5).unwrap(), 40.0);
        assert_eq!(expected_steps(1.0).unwrap(), 5.0);
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict(1.0, 0.0, 1.0, None), Verdict::NoIncentive);
        assert_eq!(verdict(1.2, 0.05, 1.0, None), Verdict::ProfitableDeviation);
        assert_eq!(verdict(1.1, 0.05, 1.0, None), Verdict::NoIncentive);
        assert_eq!(verdict(0.5, 0.01, 1.0, Some(1.0)), Verdict::NoIncentive);
        assert_eq!(verdict(0.5, 0.01, 1.0, Some(1.0000001)), Verdict::ProfitableDeviation);
    }

    #[test]
    fn weighted_mean_and_se() {
        let (m, se) = mean_and_se([(0.0, 1u64), (2.0, 1)].into_iter());
        assert_eq!(m, 1.0);
        assert!((se - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_matches_withhold_closed_form() {
        for alpha in [0.2, 0.5, 0.8] {
            let honest = absorbed_distribution(&StrategyProfile::honest(3), [alpha; 3]).unwrap();
            assert_eq!(honest.len(), 1);
            assert!((honest[&InfoVector::everyone(3)] - 1.0).abs() < 1e-12);

            let profile = StrategyProfile::with_deviant(3, 1, Arc::new(Behavior::Withhold));
            let d = absorbed_distribution(&profile, [alpha; 3]).unwrap();
            let t = UtilityTable::canonical(3);
            let exact: f64 = d.iter().map(|(v, w)| w * t.payoff(1, v)).sum();
            assert!((exact - expected_utility_withhold(alpha, &t, 1).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_of_pure_biases() {
        // a deviator that always commits heads cannot change the outcome distribution
        let profile = StrategyProfile::with_deviant(3, 2, Arc::new(Behavior::BiasedCoin(1.0)));
        let d = absorbed_distribution(&profile, [0.3, 1.0, 0.3]).unwrap();
        assert!((d[&InfoVector::everyone(3)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn audit_preconditions() {
        let s = crate::field::Field::new(101).unwrap().element(3).unwrap();
        let t = UtilityTable::canonical(3);
        assert!(nash_audit(s, 0.3, &t, &["withhold".into()], 100, 0).is_err());
        assert!(matches!(
            nash_audit(s, 0.3, &t, &["bribe".into()], MIN_AUDIT_TRIALS, 0),
            Err(Error::UnknownDeviation(_))
        ));
        assert!(nash_audit(s, 1.0, &t, &["withhold".into()], MIN_AUDIT_TRIALS, 0).is_err());
    }
}
