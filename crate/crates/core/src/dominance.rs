//! Finite normal-form games and iterated deletion of weakly dominated strategies.
//!
//! Payoffs are exact rationals. Deletion is delete-all: in every round each
//! player loses every strategy that some other surviving pure strategy weakly
//! dominates against the surviving opponent profiles, all players at once.
//! Players and strategies are 0-based indices here.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::utility::{validate_utilities, InfoVector, UtilityTable};

/// Per-player restriction sets: sorted strategy indices.
pub type Restriction = Vec<Vec<usize>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormGame {
    labels: Vec<Vec<String>>,
    /// `payoffs[profile_index][player]`, profiles in row-major order (player 0 slowest).
    payoffs: Vec<Vec<BigRational>>,
}

impl NormalFormGame {
    pub fn new(labels: Vec<Vec<String>>, payoffs: Vec<Vec<BigRational>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidGame("no players".into()));
        }
        if let Some(i) = labels.iter().position(|l| l.is_empty()) {
            return Err(Error::EmptyStrategySet(i));
        }
        let size: usize = labels.iter().map(|l| l.len()).product();
        if payoffs.len() != size {
            return Err(Error::InvalidGame(format!("{} payoff rows for {size} profiles", payoffs.len())));
        }
        if payoffs.iter().any(|row| row.len() != labels.len()) {
            return Err(Error::InvalidGame("payoff row length differs from player count".into()));
        }
        Ok(NormalFormGame { labels, payoffs })
    }

    pub fn from_fn(labels: Vec<Vec<String>>, mut f: impl FnMut(&[usize]) -> Vec<BigRational>) -> Result<Self> {
        let sizes: Vec<usize> = labels.iter().map(|l| l.len()).collect();
        let payoffs = profiles(&sizes).map(|p| f(&p)).collect();
        Self::new(labels, payoffs)
    }

    /// Integer payoffs, convenient for fixtures.
    pub fn from_integers(labels: Vec<Vec<String>>, f: impl Fn(&[usize]) -> Vec<i64>) -> Result<Self> {
        Self::from_fn(labels, |p| f(p).into_iter().map(rational).collect())
    }

    pub fn players(&self) -> usize {
        self.labels.len()
    }

    pub fn strategies(&self, player: usize) -> usize {
        self.labels[player].len()
    }

    pub fn labels(&self, player: usize) -> &[String] {
        &self.labels[player]
    }

    pub fn label(&self, player: usize, strategy: usize) -> &str {
        &self.labels[player][strategy]
    }

    pub fn strategy_index(&self, player: usize, label: &str) -> Option<usize> {
        self.labels.get(player)?.iter().position(|l| l == label)
    }

    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.labels).fold(0, |acc, (&s, l)| acc * l.len() + s)
    }

    pub fn payoff(&self, profile: &[usize], player: usize) -> &BigRational {
        &self.payoffs[self.profile_index(profile)][player]
    }

    /// Every strategy of every player.
    pub fn full_restriction(&self) -> Restriction {
        self.labels.iter().map(|l| (0..l.len()).collect()).collect()
    }

    pub fn check_profile(&self, profile: &[usize]) -> Result<()> {
        if profile.len() != self.players() {
            return Err(Error::InvalidGame(format!("profile has {} entries", profile.len())));
        }
        for (i, &s) in profile.iter().enumerate() {
            if s >= self.strategies(i) {
                return Err(Error::InvalidGame(format!("player {i} has no strategy {s}")));
            }
        }
        Ok(())
    }

    fn check_restriction(&self, restriction: &Restriction) -> Result<()> {
        if restriction.len() != self.players() {
            return Err(Error::InvalidGame("restriction has the wrong number of players".into()));
        }
        for (i, set) in restriction.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::EmptyStrategySet(i));
            }
            if set.iter().any(|&s| s >= self.strategies(i)) {
                return Err(Error::InvalidGame(format!("restriction names a missing strategy of player {i}")));
            }
        }
        Ok(())
    }

    pub fn to_document(&self) -> GameDocument {
        let sizes: Vec<usize> = self.labels.iter().map(|l| l.len()).collect();
        let payoffs = profiles(&sizes)
            .map(|p| PayoffEntry {
                profile: p.iter().enumerate().map(|(i, &s)| self.labels[i][s].clone()).collect(),
                payoffs: self.payoffs[self.profile_index(&p)].iter().map(|x| x.to_string()).collect(),
            })
            .collect();
        GameDocument { players: self.players(), strategies: self.labels.clone(), payoffs }
    }

    pub fn from_document(doc: &GameDocument) -> Result<Self> {
        if doc.players != doc.strategies.len() {
            return Err(Error::InvalidGame("player count differs from strategy lists".into()));
        }
        let size: usize = doc.strategies.iter().map(|l| l.len()).product();
        let mut payoffs: Vec<Option<Vec<BigRational>>> = vec![None; size];
        let shell = NormalFormGame { labels: doc.strategies.clone(), payoffs: Vec::new() };
        for entry in &doc.payoffs {
            if entry.profile.len() != doc.players || entry.payoffs.len() != doc.players {
                return Err(Error::InvalidGame(format!("malformed entry {:?}", entry.profile)));
            }
            let profile = entry
                .profile
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    shell.strategy_index(i, l).ok_or_else(|| Error::InvalidGame(format!("unknown label {l:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let values = entry
                .payoffs
                .iter()
                .map(|x| x.parse::<BigRational>().map_err(|_| Error::InvalidGame(format!("bad rational {x:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let slot = &mut payoffs[shell.profile_index(&profile)];
            if slot.replace(values).is_some() {
                return Err(Error::InvalidGame(format!("duplicate entry {:?}", entry.profile)));
            }
        }
        let payoffs = payoffs
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidGame("payoff tensor is not total".into()))?;
        Self::new(doc.strategies.clone(), payoffs)
    }
}

/// Serialized game: rationals are written `a/b` or `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameDocument {
    pub players: usize,
    pub strategies: Vec<Vec<String>>,
    pub payoffs: Vec<PayoffEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffEntry {
    pub profile: Vec<String>,
    pub payoffs: Vec<String>,
}

pub fn rational(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Exact value of a finite float.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidUtilities(format!("non-finite payoff {x}")))
}

/// All profiles over `sizes`, row-major.
fn profiles(sizes: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = sizes.iter().product();
    (0..total).map(move |mut k| {
        let mut p = vec![0; sizes.len()];
        for (slot, &size) in p.iter_mut().zip(sizes).rev() {
            *slot = k % size;
            k /= size;
        }
        p
    })
}

/// Opponent profiles of `player` within `restriction`, as full profiles with
/// `player`'s slot left at 0.
fn opponent_profiles(restriction: &Restriction, player: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; restriction.len()]];
    for (j, set) in restriction.iter().enumerate() {
        if j == player {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|p| {
                set.iter().map(move |&s| {
                    let mut q = p.clone();
                    q[j] = s;
                    q
                })
            })
            .collect();
    }
    out
}

/// True iff `tau` weakly dominates `sigma` for `player` against the opponent profiles in `restriction`.
pub fn dominates(game: &NormalFormGame, player: usize, tau: usize, sigma: usize, restriction: &Restriction) -> bool {
    let mut strict = false;
    for mut p in opponent_profiles(restriction, player) {
        p[player] = tau;
        let a = game.payoff(&p, player).clone();
        p[player] = sigma;
        let b = game.payoff(&p, player);
        if a < *b {
            return false;
        }
        strict |= a > *b;
    }
    strict
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Domination {
    pub dominated: usize,
    pub by: usize,
}

/// Strategies of `player` weakly dominated by a pure strategy in its restricted set,
/// each with the first such dominator.
pub fn weakly_dominated_set(
    game: &NormalFormGame,
    player: usize,
    restriction: &Restriction,
) -> Result<Vec<Domination>> {
    game.check_restriction(restriction)?;
    if player >= game.players() {
        return Err(Error::InvalidGame(format!("no player {player}")));
    }
    let own = &restriction[player];
    Ok(own
        .iter()
        .filter_map(|&sigma| {
            own.iter()
                .find(|&&tau| tau != sigma && dominates(game, player, tau, sigma, restriction))
                .map(|&by| Domination { dominated: sigma, by })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeletionRound {
    /// `S^k`: sets in force during this round.
    pub surviving: Restriction,
    /// `DOM_i(S^k)` per player.
    pub deleted: Vec<Vec<Domination>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeletionTrace {
    pub rounds: Vec<DeletionRound>,
    pub fixpoint: Restriction,
}

impl DeletionTrace {
    /// Rounds that deleted something.
    pub fn deletion_rounds(&self) -> usize {
        self.rounds.iter().filter(|r| r.deleted.iter().any(|d| !d.is_empty())).count()
    }

    /// Round in which `strategy` of `player` was deleted, with its dominator.
    pub fn deletion_of(&self, player: usize, strategy: usize) -> Option<(usize, &Domination)> {
        self.rounds
            .iter()
            .enumerate()
            .find_map(|(k, r)| r.deleted[player].iter().find(|d| d.dominated == strategy).map(|d| (k, d)))
    }

    pub fn survives(&self, profile: &[usize]) -> bool {
        profile.iter().zip(&self.fixpoint).all(|(s, set)| set.contains(s))
    }

    /// Labelled view for reports.
    pub fn labelled(&self, game: &NormalFormGame) -> LabelledTrace {
        let names = |i: usize, set: &[usize]| set.iter().map(|&s| game.label(i, s).to_string()).collect::<Vec<_>>();
        LabelledTrace {
            rounds: self
                .rounds
                .iter()
                .map(|r| LabelledRound {
                    surviving: r.surviving.iter().enumerate().map(|(i, s)| names(i, s)).collect(),
                    deleted: r
                        .deleted
                        .iter()
                        .enumerate()
                        .map(|(i, ds)| {
                            ds.iter()
                                .map(|d| (game.label(i, d.dominated).to_string(), game.label(i, d.by).to_string()))
                                .collect()
                        })
                        .collect(),
                })
                .collect(),
            fixpoint: self.fixpoint.iter().enumerate().map(|(i, s)| names(i, s)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelledRound {
    pub surviving: Vec<Vec<String>>,
    /// `(dominated, dominator)` label pairs per player.
    pub deleted: Vec<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelledTrace {
    pub rounds: Vec<LabelledRound>,
    pub fixpoint: Vec<Vec<String>>,
}

/// Delete-all rounds until a round deletes nothing. A round that would empty
/// a player's set is reported as an error instead of being applied.
pub fn iterate_deletion(game: &NormalFormGame) -> Result<DeletionTrace> {
    let mut current = game.full_restriction();
    let mut rounds = Vec::new();
    loop {
        let deleted = (0..game.players())
            .into_par_iter()
            .map(|i| weakly_dominated_set(game, i, &current))
            .collect::<Result<Vec<_>>>()?;
        let done = deleted.iter().all(|d| d.is_empty());
        let next: Restriction = current
            .iter()
            .zip(&deleted)
            .map(|(set, ds)| set.iter().copied().filter(|s| ds.iter().all(|d| d.dominated != *s)).collect())
            .collect();
        if let Some(i) = next.iter().position(|s| s.is_empty()) {
            return Err(Error::EmptyStrategySet(i));
        }
        rounds.push(DeletionRound { surviving: current, deleted });
        current = next;
        if done {
            return Ok(DeletionTrace { rounds, fixpoint: current });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `player` gains by switching from its recommended strategy to `to`.
    ProfitableDeviation { player: usize, to: usize, gain: String },
    /// The recommended strategy of `player` was deleted in `round`, dominated by `by`.
    Dominated { player: usize, round: usize, by: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PracticalVerdict {
    pub is_nash: bool,
    pub survives: bool,
    pub witness: Option<Witness>,
}

impl PracticalVerdict {
    pub fn practical(&self) -> bool {
        self.is_nash && self.survives
    }
}

/// Checks a pure profile for Nash equilibrium and for survival of iterated deletion.
pub fn check_practical(game: &NormalFormGame, profile: &[usize]) -> Result<PracticalVerdict> {
    game.check_profile(profile)?;
    let mut witness = None;
    'sweep: for i in 0..game.players() {
        let base = game.payoff(profile, i);
        for to in 0..game.strategies(i) {
            let mut q = profile.to_vec();
            q[i] = to;
            let alt = game.payoff(&q, i);
            if alt > base {
                witness = Some(Witness::ProfitableDeviation { player: i, to, gain: (alt - base).to_string() });
                break 'sweep;
            }
        }
    }
    let is_nash = witness.is_none();
    let trace = iterate_deletion(game)?;
    let survives = trace.survives(profile);
    if witness.is_none() && !survives {
        witness = profile.iter().enumerate().find_map(|(i, &s)| {
            trace.deletion_of(i, s).map(|(round, d)| Witness::Dominated { player: i, round, by: d.by })
        });
    }
    Ok(PracticalVerdict { is_nash, survives, witness })
}

/// One move of a two-player share exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Action {
    Send,
    Withhold,
}

impl Action {
    const BOTH: [Action; 2] = [Action::Send, Action::Withhold];

    fn letter(self) -> char {
        match self {
            Action::Send => 'S',
            Action::Withhold => 'W',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Send => "Send",
            Action::Withhold => "Withhold",
        })
    }
}

/// A pure strategy of the bounded exchange: the first-round move, then for
/// each later round a move conditioned on whether the other player has sent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExchangeStrategy {
    pub first: Action,
    /// `(if_sent, if_withheld)` for rounds 2..=R.
    pub later: Vec<(Action, Action)>,
}

impl ExchangeStrategy {
    /// `Send`/`Withhold` for one round; otherwise e.g. `W/SW`: withhold, then
    /// send iff the other sent.
    pub fn label(&self) -> String {
        if self.later.is_empty() {
            return self.first.to_string();
        }
        let mut s = self.first.letter().to_string();
        for (a, b) in &self.later {
            s.push('/');
            s.push(a.letter());
            s.push(b.letter());
        }
        s
    }

    pub fn ever_sends(&self) -> bool {
        self.first == Action::Send || self.later.iter().any(|(a, b)| *a == Action::Send || *b == Action::Send)
    }
}

/// A 2-of-2 exchange game together with the learned-vector of every profile.
#[derive(Debug, Clone)]
pub struct SharingGame {
    pub game: NormalFormGame,
    pub strategies: Vec<ExchangeStrategy>,
    outcomes: Vec<InfoVector>,
}

impl SharingGame {
    pub fn outcome(&self, profile: &[usize]) -> &InfoVector {
        &self.outcomes[self.game.profile_index(profile)]
    }

    /// Index of a strategy by label (same for both players).
    pub fn strategy(&self, label: &str) -> Option<usize> {
        self.game.strategy_index(0, label)
    }
}

/// Maximum horizon of [`build_bounded_game`].
pub const MAX_ROUNDS: usize = 2;

fn exchange_strategies(rounds: usize) -> Vec<ExchangeStrategy> {
    let mut out: Vec<ExchangeStrategy> =
        Action::BOTH.iter().map(|&first| ExchangeStrategy { first, later: Vec::new() }).collect();
    for _ in 1..rounds {
        out = out
            .into_iter()
            .flat_map(|s| {
                Action::BOTH.iter().flat_map(move |&a| {
                    let s = s.clone();
                    Action::BOTH.iter().map(move |&b| {
                        let mut t = s.clone();
                        t.later.push((a, b));
                        t
                    })
                })
            })
            .collect();
    }
    out
}

/// Plays two exchange strategies; returns who holds the other's share at the horizon.
fn play_exchange(a: &ExchangeStrategy, b: &ExchangeStrategy) -> InfoVector {
    let (mut a_sent, mut b_sent) = (a.first == Action::Send, b.first == Action::Send);
    for (ra, rb) in a.later.iter().zip(&b.later) {
        let next_a = if b_sent { ra.0 } else { ra.1 } == Action::Send;
        let next_b = if a_sent { rb.0 } else { rb.1 } == Action::Send;
        a_sent |= next_a;
        b_sent |= next_b;
    }
    InfoVector::new(vec![b_sent, a_sent])
}

/// The `rounds`-round share exchange between the two holders of a 2-of-2 sharing.
pub fn build_bounded_game(rounds: usize, table: &UtilityTable) -> Result<SharingGame> {
    if rounds == 0 || rounds > MAX_ROUNDS {
        return Err(Error::Horizon(rounds));
    }
    if table.players() != 2 {
        return Err(Error::InvalidGame(format!("{}-player table for a 2-player game", table.players())));
    }
    validate_utilities(table).into_result()?;
    let strategies = exchange_strategies(rounds);
    let labels: Vec<String> = strategies.iter().map(|s| s.label()).collect();
    let mut outcomes = Vec::new();
    let mut payoff_err = None;
    let game = NormalFormGame::from_fn(vec![labels.clone(), labels], |p| {
        let v = play_exchange(&strategies[p[0]], &strategies[p[1]]);
        let row =
            (1..=2).map(|i| rational_from_f64(table.payoff(i, &v))).collect::<Result<Vec<_>>>().unwrap_or_else(|e| {
                payoff_err = Some(e);
                vec![rational(0), rational(0)]
            });
        outcomes.push(v);
        row
    })?;
    if let Some(e) = payoff_err {
        return Err(e);
    }
    Ok(SharingGame { game, strategies, outcomes })
}

/// The one-shot 2-of-2 exchange: actions `Send` and `Withhold`.
pub fn build_oneshot_sharing_game(table: &UtilityTable) -> Result<SharingGame> {
    build_bounded_game(1, table)
}

/// Names accepted by [`builtin`].
pub const BUILTINS: [&str; 5] = ["oneshot-2of2", "bounded-r1", "bounded-r2", "matching-pennies", "prisoners-dilemma"];

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn matching_pennies() -> NormalFormGame {
    NormalFormGame::from_integers(vec![strings(&["Heads", "Tails"]); 2], |p| {
        if p[0] == p[1] {
            vec![1, -1]
        } else {
            vec![-1, 1]
        }
    })
    .expect("well-formed")
}

pub fn prisoners_dilemma() -> NormalFormGame {
    let table = [[(3, 3), (0, 5)], [(5, 0), (1, 1)]];
    NormalFormGame::from_integers(vec![strings(&["Cooperate", "Defect"]); 2], |p| {
        let (a, b) = table[p[0]][p[1]];
        vec![a, b]
    })
    .expect("well-formed")
}

/// A named built-in game; sharing games use `table`.
pub fn builtin(name: &str, table: &UtilityTable) -> Result<NormalFormGame> {
    Ok(match name {
        "oneshot-2of2" | "bounded-r1" => build_bounded_game(1, table)?.game,
        "bounded-r2" => build_bounded_game(2, table)?.game,
        "matching-pennies" => matching_pennies(),
        "prisoners-dilemma" => prisoners_dilemma(),
        other => return Err(Error::config("builtin", format!("unknown game {other:?}; expected one of {BUILTINS:?}"))),
    })
}
