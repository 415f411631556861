//! Command implementations behind the `rss` binary.
//!
//! Every command returns a [`Report`]. Exit codes: 0 on success, 2 for a
//! configuration error (including an invalid utility table), 3 when a run
//! detects an invariant violation.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::analysis::{self, AlphaStar, BatchStats, IterationDistribution, NashAuditReport, RunSummary};
use crate::dominance::{self, check_practical, iterate_deletion, LabelledTrace, NormalFormGame, PracticalVerdict};
use crate::error::Error;
use crate::field::{Field, FieldElement, DEFAULT_PRIME};
use crate::protocol::{Layout, LayoutKind, Mechanism, RunConfig, TerminalCause, TranscriptMode, DEFAULT_CAP};
use crate::report::Report;
use crate::rng;
use crate::shamir::{hiding_check, HidingRow};
use crate::strategies::{deviation_catalog, Behavior, StrategyProfile};
use crate::utility::{validate_utilities, InfoVector, ScalarUtilities, UtilityTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rss", version, about = "Rational secret sharing: simulation and incentive analysis")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded trials of the mechanism and report outcome frequencies.
    Simulate(SimulateConfig),
    /// Compute the coin bias below which withholding never pays.
    AlphaStar(AlphaStarConfig),
    /// Estimate every unilateral deviation against honest play.
    Audit(AuditConfig),
    /// Iterated deletion of weakly dominated strategies on a finite game.
    Dominance(DominanceConfig),
    /// Exhaustive posterior-uniformity check of threshold sharing.
    Hiding(HidingConfig),
}

/// A coin bias, or `auto` for half the threshold of the utility table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaArg {
    Value(f64),
    Auto,
}

impl FromStr for AlphaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(AlphaArg::Auto);
        }
        s.parse().map(AlphaArg::Value).map_err(|_| format!("expected a number or `auto`, got {s:?}"))
    }
}

impl fmt::Display for AlphaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaArg::Value(a) => write!(f, "{a}"),
            AlphaArg::Auto => f.write_str("auto"),
        }
    }
}

impl Serialize for AlphaArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            AlphaArg::Value(a) => s.serialize_f64(*a),
            AlphaArg::Auto => s.serialize_str("auto"),
        }
    }
}

/// Utility table source: a JSON file, or scalar payoffs (default 2, 1, 0).
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct UtilityArgs {
    /// JSON utility table.
    #[arg(long)]
    pub utilities: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub u_only: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u_all: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u_none: Option<f64>,
}

impl UtilityArgs {
    pub fn scalars(u_only: f64, u_all: f64, u_none: f64) -> Self {
        UtilityArgs { utilities: None, u_only: Some(u_only), u_all: Some(u_all), u_none: Some(u_none) }
    }

    pub fn resolve(&self, players: usize) -> Result<UtilityTable, Failure> {
        let table = match &self.utilities {
            Some(path) => {
                if self.u_only.is_some() || self.u_all.is_some() || self.u_none.is_some() {
                    return Err(Error::config("utilities", "give either a table file or scalars, not both").into());
                }
                let text = std::fs::read_to_string(path).map_err(|e| Error::config("utilities", e.to_string()))?;
                UtilityTable::from_json(&text)?
            }
            None => {
                let c = ScalarUtilities::CANONICAL;
                let s = ScalarUtilities {
                    u_only: self.u_only.unwrap_or(c.u_only),
                    u_all: self.u_all.unwrap_or(c.u_all),
                    u_none: self.u_none.unwrap_or(c.u_none),
                };
                UtilityTable::uniform(players, s)?
            }
        };
        if table.players() != players {
            return Err(Error::config(
                "utilities",
                format!("table has {} players, expected {players}", table.players()),
            )
            .into());
        }
        let validation = validate_utilities(&table);
        if !validation.is_valid() {
            let details = serde_json::to_value(&validation).ok();
            return Err(Failure { error: validation.into_result().unwrap_err(), details });
        }
        Ok(table)
    }
}

/// A command error, optionally with structured detail for the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub error: Error,
    pub details: Option<Value>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, details: None }
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self.error {
            Error::Invariant(_) => EXIT_INVARIANT,
            _ => EXIT_CONFIG,
        }
    }
}

pub type CmdResult = Result<Report, Failure>;

fn resolve_alpha(alpha: AlphaArg, table: &UtilityTable) -> Result<f64, Failure> {
    match alpha {
        AlphaArg::Value(a) => Ok(a),
        AlphaArg::Auto => Ok(analysis::alpha_star(table)?.global / 2.0),
    }
}

fn secret_for(prime: u64, secret: Option<u64>, seed: u64) -> Result<FieldElement, Failure> {
    let field = Field::new(prime).map_err(|e| Error::config("prime", e.to_string()))?;
    Ok(match secret {
        Some(v) => field.element(v).map_err(|e| Error::config("secret", e.to_string()))?,
        None => field.random(&mut rng::trial_rng(seed, u64::MAX)),
    })
}

fn parse_deviant(spec: &str, n: usize) -> Result<(usize, Behavior), Failure> {
    let (player, name) = spec
        .split_once(':')
        .ok_or_else(|| Error::config("deviant", format!("expected <player>:<strategy>, got {spec:?}")))?;
    let player: usize = player.parse().map_err(|_| Error::config("deviant", format!("bad player in {spec:?}")))?;
    if !(1..=n).contains(&player) {
        return Err(Error::config("deviant", format!("player {player} not in 1..={n}")).into());
    }
    Ok((player, Behavior::parse(name)?))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateConfig {
    /// Coin bias in (0, 1], or `auto`.
    #[arg(long)]
    pub alpha: AlphaArg,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Iteration cap per run.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    pub prime: u64,
    /// Secret value; drawn from the seed when absent.
    #[arg(long)]
    pub secret: Option<u64>,
    /// `<player>:<strategy>`, repeatable.
    #[arg(long = "deviant")]
    pub deviants: Vec<String>,
    #[command(flatten)]
    pub utilities: UtilityArgs,
    /// Write every run's messages and iteration summaries as JSON lines.
    #[arg(long)]
    pub dump_transcripts: Option<PathBuf>,
}

impl SimulateConfig {
    pub fn new(alpha: f64, trials: u64, seed: u64) -> Self {
        SimulateConfig {
            alpha: AlphaArg::Value(alpha),
            trials,
            seed,
            cap: DEFAULT_CAP,
            m: 3,
            n: 3,
            prime: DEFAULT_PRIME,
            secret: None,
            deviants: Vec::new(),
            utilities: UtilityArgs::default(),
            dump_transcripts: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Expected {
    pub steps: f64,
    pub iteration: IterationDistribution,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateResults {
    pub alpha: f64,
    pub layout: LayoutKind,
    pub leaders: [usize; 3],
    pub strategies: Vec<String>,
    pub stats: BatchStats,
    pub terminal_fractions: BTreeMap<TerminalCause, f64>,
    /// Info-vector frequencies among runs that ended before the cap.
    pub absorbed_info: BTreeMap<String, f64>,
    pub mean_utilities: Vec<f64>,
    /// Honest closed forms; present only for all-honest profiles.
    pub expected: Option<Expected>,
    pub invariant_violations: Vec<String>,
}

fn dump_runs(
    path: &PathBuf,
    secret: FieldElement,
    layout: &Layout,
    profile: &StrategyProfile,
    config: &RunConfig,
    cfg: &SimulateConfig,
) -> Result<Vec<RunSummary>, Failure> {
    let file = File::create(path).map_err(|e| Error::config("dump-transcripts", e.to_string()))?;
    let mut out = BufWriter::new(file);
    let config = config.clone().with_transcripts(TranscriptMode::Full);
    let mut runs = Vec::new();
    for t in 0..cfg.trials {
        let mech =
            Mechanism::new(secret, layout.clone(), profile.clone(), config.clone(), rng::trial_rng(cfg.seed, t))?;
        let outcome = mech.run();
        for tr in &outcome.transcripts {
            for msg in &tr.messages {
                writeln!(out, "{}", json!({"record": "message", "trial": t, "message": msg})).map_err(Error::from)?;
            }
            let summary = json!({
                "record": "iteration",
                "trial": t,
                "iteration": tr.iteration,
                "epoch": tr.epoch,
                "coins": tr.coins,
                "parity": tr.parity,
                "broadcasters": tr.broadcasters,
                "decisions": tr.decisions,
            });
            writeln!(out, "{summary}").map_err(Error::from)?;
        }
        let run = json!({
            "record": "run",
            "trial": t,
            "iterations": outcome.iterations,
            "total_steps": outcome.total_steps,
            "info": outcome.info,
            "cause": outcome.cause,
        });
        writeln!(out, "{run}").map_err(Error::from)?;
        runs.push(RunSummary::from_outcome(&outcome, secret));
    }
    out.flush().map_err(Error::from)?;
    Ok(runs)
}

pub fn cmd_simulate(cfg: &SimulateConfig) -> CmdResult {
    if cfg.trials == 0 {
        return Err(Error::config("trials", "must be at least 1").into());
    }
    let layout = Layout::for_threshold(cfg.m, cfg.n).map_err(|e| Error::config("m", e.to_string()))?;
    let table = cfg.utilities.resolve(cfg.n)?;
    let alpha = resolve_alpha(cfg.alpha, &table)?;
    let config = RunConfig::new(alpha).with_cap(cfg.cap);
    config.validate().map_err(|e| Error::config("alpha", e.to_string()))?;
    let mut profile = StrategyProfile::honest(cfg.n);
    for spec in &cfg.deviants {
        let (player, behavior) = parse_deviant(spec, cfg.n)?;
        profile.set(player, Arc::new(behavior));
    }
    let secret = secret_for(cfg.prime, cfg.secret, cfg.seed)?;
    let runs = match &cfg.dump_transcripts {
        Some(path) => dump_runs(path, secret, &layout, &profile, &config, cfg)?,
        None => analysis::simulate(secret, &layout, &profile, &config, cfg.trials, cfg.seed, 0)?,
    };
    let stats = BatchStats::from_runs(&runs);

    let mut absorbed: BTreeMap<String, u64> = BTreeMap::new();
    let mut utility_hist: BTreeMap<InfoVector, u64> = BTreeMap::new();
    for r in &runs {
        let capped = r.cause == TerminalCause::IterationCapHit;
        if !capped {
            *absorbed.entry(r.info.to_string()).or_insert(0) += 1;
        }
        let v = if capped { InfoVector::none(cfg.n) } else { r.info.clone() };
        *utility_hist.entry(v).or_insert(0) += 1;
    }
    let absorbed_total: u64 = absorbed.values().sum();
    let absorbed_info = absorbed.into_iter().map(|(k, c)| (k, c as f64 / absorbed_total as f64)).collect();
    let mean_utilities = (1..=cfg.n)
        .map(|i| utility_hist.iter().map(|(v, &c)| table.payoff(i, v) * c as f64).sum::<f64>() / cfg.trials as f64)
        .collect();
    let terminal_fractions = stats.causes.keys().map(|&c| (c, stats.fraction(c))).collect();

    let honest = profile.is_all_honest();
    let mut invariant_violations = Vec::new();
    if honest {
        if stats.parity_disagreements > 0 {
            invariant_violations.push(format!("{} honest parity disagreements", stats.parity_disagreements));
        }
        if stats.partial_outcomes > 0 {
            invariant_violations.push(format!("{} honest runs ended with a partial outcome", stats.partial_outcomes));
        }
    }
    if stats.bad_recoveries > 0 {
        invariant_violations.push(format!("{} runs reconstructed a wrong secret", stats.bad_recoveries));
    }
    let expected = if honest {
        Some(Expected { steps: analysis::expected_steps(alpha)?, iteration: analysis::iteration_distribution(alpha)? })
    } else {
        None
    };
    let results = SimulateResults {
        alpha,
        layout: layout.kind,
        leaders: layout.leaders(),
        strategies: profile.names(),
        stats,
        terminal_fractions,
        absorbed_info,
        mean_utilities,
        expected,
        invariant_violations,
    };
    Ok(Report::new("simulate", cfg, &results)?)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AlphaStarConfig {
    #[arg(long, default_value_t = 3)]
    pub players: usize,
    #[command(flatten)]
    pub utilities: UtilityArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaStarResults {
    pub alpha_star: AlphaStar,
    pub recommended_alpha: f64,
    pub expected_steps_at_recommended: f64,
}

pub fn cmd_alpha_star(cfg: &AlphaStarConfig) -> CmdResult {
    let table = cfg.utilities.resolve(cfg.players)?;
    let alpha_star = analysis::alpha_star(&table)?;
    let recommended_alpha = alpha_star.global / 2.0;
    let results = AlphaStarResults {
        expected_steps_at_recommended: analysis::expected_steps(recommended_alpha)?,
        alpha_star,
        recommended_alpha,
    };
    Ok(Report::new("alpha-star", cfg, &results)?)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AuditConfig {
    /// Coin bias in (0, 1), or `auto`.
    #[arg(long)]
    pub alpha: AlphaArg,
    #[arg(long, default_value_t = analysis::MIN_AUDIT_TRIALS)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Comma-separated deviations; the built-in catalog when absent.
    #[arg(long, value_delimiter = ',')]
    pub deviations: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    pub prime: u64,
    #[arg(long)]
    pub secret: Option<u64>,
    #[command(flatten)]
    pub utilities: UtilityArgs,
}

impl AuditConfig {
    pub fn new(alpha: f64, trials: u64, seed: u64) -> Self {
        AuditConfig {
            alpha: AlphaArg::Value(alpha),
            trials,
            seed,
            deviations: Vec::new(),
            prime: DEFAULT_PRIME,
            secret: None,
            utilities: UtilityArgs::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditResults {
    pub alpha_star: AlphaStar,
    pub audit: NashAuditReport,
    pub profitable: Vec<String>,
}

pub fn cmd_audit(cfg: &AuditConfig) -> CmdResult {
    let table = cfg.utilities.resolve(3)?;
    let alpha = resolve_alpha(cfg.alpha, &table)?;
    let deviations: Vec<String> = if cfg.deviations.is_empty() {
        deviation_catalog().into_iter().map(|(name, _)| name).collect()
    } else {
        cfg.deviations.clone()
    };
    let secret = secret_for(cfg.prime, cfg.secret, cfg.seed)?;
    let audit = analysis::nash_audit(secret, alpha, &table, &deviations, cfg.trials, cfg.seed)?;
    let profitable = audit.profitable().map(|e| format!("{}@{}", e.deviation, e.deviator)).collect();
    let results = AuditResults { alpha_star: analysis::alpha_star(&table)?, audit, profitable };
    Ok(Report::new("audit", cfg, &results)?)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DominanceConfig {
    /// One of the built-in games.
    #[arg(long, conflicts_with = "game")]
    pub builtin: Option<String>,
    /// JSON game document.
    #[arg(long)]
    pub game: Option<PathBuf>,
    /// Comma-separated strategy labels, one per player, to check for practicality.
    #[arg(long, value_delimiter = ',')]
    pub recommended: Vec<String>,
    #[command(flatten)]
    pub utilities: UtilityArgs,
}

impl DominanceConfig {
    pub fn builtin(name: &str) -> Self {
        DominanceConfig {
            builtin: Some(name.to_string()),
            game: None,
            recommended: Vec::new(),
            utilities: UtilityArgs::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SharingSummary {
    /// Learned-vector of every surviving profile.
    pub surviving_outcomes: BTreeMap<String, String>,
    pub survivor_ever_sends: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceResults {
    pub strategies: Vec<Vec<String>>,
    pub trace: LabelledTrace,
    pub deletion_rounds: usize,
    pub fixpoint: Vec<Vec<String>>,
    pub sharing: Option<SharingSummary>,
    pub recommended: Option<Vec<String>>,
    pub verdict: Option<PracticalVerdict>,
}

pub fn cmd_dominance(cfg: &DominanceConfig) -> CmdResult {
    let (game, sharing_game) = match (&cfg.builtin, &cfg.game) {
        (Some(name), None) => match name.as_str() {
            "oneshot-2of2" | "bounded-r1" | "bounded-r2" => {
                let rounds = if name == "bounded-r2" { 2 } else { 1 };
                let g = dominance::build_bounded_game(rounds, &cfg.utilities.resolve(2)?)?;
                (g.game.clone(), Some(g))
            }
            other => (dominance::builtin(other, &UtilityTable::canonical(2))?, None),
        },
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::config("game", e.to_string()))?;
            let doc = serde_json::from_str(&text).map_err(|e| Error::config("game", e.to_string()))?;
            (NormalFormGame::from_document(&doc)?, None)
        }
        _ => return Err(Error::config("builtin", "give exactly one of --builtin or --game").into()),
    };
    let trace = iterate_deletion(&game)?;
    let labelled = trace.labelled(&game);
    let sharing = sharing_game.as_ref().map(|g| {
        let mut surviving_outcomes = BTreeMap::new();
        for &a in &trace.fixpoint[0] {
            for &b in &trace.fixpoint[1] {
                let key = format!("{},{}", game.label(0, a), game.label(1, b));
                surviving_outcomes.insert(key, g.outcome(&[a, b]).to_string());
            }
        }
        let survivor_ever_sends = trace.fixpoint.iter().flatten().any(|&s| g.strategies[s].ever_sends());
        SharingSummary { surviving_outcomes, survivor_ever_sends }
    });
    let (recommended, verdict) = if cfg.recommended.is_empty() {
        (None, None)
    } else {
        if cfg.recommended.len() != game.players() {
            return Err(Error::config("recommended", format!("need {} labels", game.players())).into());
        }
        let profile = cfg
            .recommended
            .iter()
            .enumerate()
            .map(|(i, l)| {
                game.strategy_index(i, l).ok_or_else(|| Error::config("recommended", format!("unknown label {l:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        (Some(cfg.recommended.clone()), Some(check_practical(&game, &profile)?))
    };
    let results = DominanceResults {
        strategies: (0..game.players()).map(|i| game.labels(i).to_vec()).collect(),
        deletion_rounds: trace.deletion_rounds(),
        fixpoint: labelled.fixpoint.clone(),
        trace: labelled,
        sharing,
        recommended,
        verdict,
    };
    Ok(Report::new("dominance", cfg, &results)?)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HidingConfig {
    #[arg(long, default_value_t = 7)]
    pub prime: u64,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HidingResults {
    pub rows: Vec<HidingRow>,
    pub all_uniform: bool,
    pub invariant_violations: Vec<String>,
}

pub fn cmd_hiding(cfg: &HidingConfig) -> CmdResult {
    let field = Field::new(cfg.prime).map_err(|e| Error::config("prime", e.to_string()))?;
    let rows = hiding_check(field, cfg.m, cfg.n)?;
    let invariant_violations = rows
        .iter()
        .filter(|r| !r.uniform)
        .map(|r| format!("coalitions of size {} see a non-uniform posterior", r.subset_size))
        .collect::<Vec<_>>();
    let results = HidingResults { all_uniform: invariant_violations.is_empty(), rows, invariant_violations };
    Ok(Report::new("hiding", cfg, &results)?)
}

/// Outcome of one invocation.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

fn name_of(command: &Command) -> &'static str {
    match command {
        Command::Simulate(_) => "simulate",
        Command::AlphaStar(_) => "alpha-star",
        Command::Audit(_) => "audit",
        Command::Dominance(_) => "dominance",
        Command::Hiding(_) => "hiding",
    }
}

/// Runs a command; failures become a report carrying the error.
pub fn execute(command: &Command) -> Outcome {
    let start = Instant::now();
    let result = match command {
        Command::Simulate(c) => cmd_simulate(c),
        Command::AlphaStar(c) => cmd_alpha_star(c),
        Command::Audit(c) => cmd_audit(c),
        Command::Dominance(c) => cmd_dominance(c),
        Command::Hiding(c) => cmd_hiding(c),
    };
    let (report, exit_code) = match result {
        Ok(report) => {
            let violated =
                report.results.get("invariant_violations").and_then(Value::as_array).is_some_and(|v| !v.is_empty());
            (report, if violated { EXIT_INVARIANT } else { EXIT_OK })
        }
        Err(f) => {
            let results = json!({ "error": f.error.to_string(), "details": f.details });
            let report = Report::new(name_of(command), &Value::Null, &results).expect("json values serialize");
            (report, f.exit_code())
        }
    };
    Outcome { report: report.with_wall_clock(start.elapsed()), exit_code }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("rss").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn alpha_arg() {
        assert_eq!("auto".parse::<AlphaArg>().unwrap(), AlphaArg::Auto);
        assert_eq!("0.5".parse::<AlphaArg>().unwrap(), AlphaArg::Value(0.5));
        assert!("half".parse::<AlphaArg>().is_err());
    }

    #[test]
    fn seed_is_required() {
        assert!(Cli::try_parse_from(["rss", "simulate", "--alpha", "0.5"]).is_err());
        assert!(Cli::try_parse_from(["rss", "audit", "--alpha", "0.5"]).is_err());
    }

    #[test]
    fn alpha_star_command() {
        let cli = parse(&["alpha-star", "--u-only", "2", "--u-all", "1", "--u-none", "0"]);
        let out = execute(&cli.command);
        assert_eq!(out.exit_code, EXIT_OK);
        assert_eq!(out.report.results["alpha_star"]["global"], json!(0.5));
    }

    #[test]
    fn invalid_scalars_exit_2() {
        let cli = parse(&["alpha-star", "--u-only", "1", "--u-all", "2"]);
        let out = execute(&cli.command);
        assert_eq!(out.exit_code, EXIT_CONFIG);
        assert!(out.report.results["error"].as_str().unwrap().contains("player 1"));
    }

    #[test]
    fn bad_fields_are_named() {
        let out = execute(&parse(&["simulate", "--alpha", "1.5", "--seed", "1", "--trials", "1"]).command);
        assert_eq!(out.exit_code, EXIT_CONFIG);
        assert!(out.report.results["error"].as_str().unwrap().contains("alpha"));
        let out = execute(&parse(&["simulate", "--alpha", "0.5", "--seed", "1", "--deviant", "4:withhold"]).command);
        assert!(out.report.results["error"].as_str().unwrap().contains("deviant"));
        let out = execute(&parse(&["simulate", "--alpha", "0.5", "--seed", "1", "--deviant", "1:bribe"]).command);
        assert_eq!(out.exit_code, EXIT_CONFIG);
    }

    #[test]
    fn alpha_one_is_one_iteration() {
        let out = execute(&parse(&["simulate", "--alpha", "1", "--trials", "10", "--seed", "1"]).command);
        assert_eq!(out.exit_code, EXIT_OK);
        assert_eq!(out.report.results["stats"]["mean_iterations"], json!(1.0));
        assert_eq!(out.report.results["stats"]["info_histogram"]["111"], json!(10));
    }

    #[test]
    fn auto_alpha_is_half_threshold() {
        let out = execute(&parse(&["simulate", "--alpha", "auto", "--trials", "5", "--seed", "3"]).command);
        assert_eq!(out.report.results["alpha"], json!(0.25));
    }

    #[test]
    fn dominance_builtin() {
        let out = execute(&parse(&["dominance", "--builtin", "oneshot-2of2", "--recommended", "Send,Send"]).command);
        assert_eq!(out.exit_code, EXIT_OK);
        assert_eq!(out.report.results["fixpoint"], json!([["Withhold"], ["Withhold"]]));
        assert_eq!(out.report.results["verdict"]["is_nash"], json!(false));
        assert_eq!(out.report.results["sharing"]["survivor_ever_sends"], json!(false));
    }

    #[test]
    fn hiding_command() {
        let out = execute(&parse(&["hiding", "--m", "2", "--n", "3"]).command);
        assert_eq!(out.exit_code, EXIT_OK);
        assert_eq!(out.report.results["all_uniform"], json!(true));
    }
}
