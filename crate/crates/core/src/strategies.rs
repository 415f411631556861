//! Players' local states and the decision rules that act on them.
//!
//! A [`Strategy`] sees only its own [`LocalState`]; every hook has the
//! recommended behaviour as its default, so a deviation overrides exactly
//! the steps where it departs from the protocol.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{self, CoinTriple, Decision, Piece, PlayerId};

/// What a player is in the current layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Runs the coin protocol at the given ring position (1..=3).
    Leader { position: usize },
    /// Hands its pieces to its group leader every epoch.
    Member { leader: PlayerId },
    /// Holds a piece but takes no part in the exchange.
    Passive,
}

/// Pieces seen for one sharing epoch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Holdings {
    pub shares: BTreeMap<PlayerId, crate::shamir::Share>,
    pub subshares: BTreeMap<(PlayerId, usize), crate::shamir::Subshare>,
}

impl Holdings {
    pub fn insert(&mut self, piece: Piece) {
        match piece {
            Piece::Share(s) => {
                self.shares.insert(s.holder, s);
            }
            Piece::Subshare(s) => {
                self.subshares.insert((s.parent_holder, s.index), s);
            }
        }
    }

    /// Holders whose share is known, directly or through a complete set of subshares.
    pub fn known_holders(&self) -> BTreeSet<PlayerId> {
        let mut known: BTreeSet<PlayerId> = self.shares.keys().copied().collect();
        let mut per_parent: BTreeMap<PlayerId, (usize, usize)> = BTreeMap::new();
        for s in self.subshares.values() {
            let e = per_parent.entry(s.parent_holder).or_insert((0, s.count));
            e.0 += 1;
        }
        known.extend(per_parent.into_iter().filter(|(_, (have, need))| have == need).map(|(p, _)| p));
        known
    }
}

/// Something a player observed that the honest protocol would not produce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheatEvidence {
    MissingMessage {
        iteration: u64,
        step: u8,
        from: PlayerId,
    },
    BadTag {
        iteration: u64,
        step: u8,
        from: PlayerId,
    },
    /// The step-4 count does not fit the computed parity.
    InconsistentCount {
        iteration: u64,
        parity: bool,
        count: usize,
    },
}

/// Archived per-iteration view, part of the player's history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationView {
    pub iteration: u64,
    pub epoch: u64,
    pub coins: Option<CoinTriple>,
    pub from_successor: Option<bool>,
    pub from_predecessor: Option<bool>,
    pub masked_from_successor: Option<bool>,
    pub parity: Option<bool>,
    pub broadcast: bool,
    pub broadcasts_seen: Vec<PlayerId>,
    pub decision: Option<Decision>,
}

/// Everything player `player` knows. Fields for the current iteration are
/// reset at issuance and archived into `history` when it ends; holdings are
/// kept for every epoch.
#[derive(Debug, Clone)]
pub struct LocalState {
    pub player: PlayerId,
    pub role: Role,
    pub threshold: usize,
    pub active: bool,
    pub iteration: u64,
    pub step: u8,
    pub epoch: u64,
    pub coins: Option<CoinTriple>,
    /// `c_(i+,-)`, received from the successor at step 1.
    pub from_successor: Option<bool>,
    /// `c_(i-,+)`, received from the predecessor at step 1.
    pub from_predecessor: Option<bool>,
    /// `c_(i-,-) xor c_(i+)`, received from the successor at step 2.
    pub masked_from_successor: Option<bool>,
    pub parity: Option<bool>,
    /// Pieces of the current epoch this player is responsible for sending on.
    pub bundle: Vec<Piece>,
    pub broadcast: bool,
    /// Senders of valid broadcasts this iteration, self included iff it broadcast.
    pub broadcasts_seen: BTreeSet<PlayerId>,
    pub decision: Option<Decision>,
    pub holdings: BTreeMap<u64, Holdings>,
    pub learned: bool,
    pub cheat_evidence: Vec<CheatEvidence>,
    pub history: Vec<IterationView>,
}

impl LocalState {
    pub fn new(player: PlayerId, role: Role, threshold: usize) -> Self {
        LocalState {
            player,
            role,
            threshold,
            active: true,
            iteration: 0,
            step: 0,
            epoch: 0,
            coins: None,
            from_successor: None,
            from_predecessor: None,
            masked_from_successor: None,
            parity: None,
            bundle: Vec::new(),
            broadcast: false,
            broadcasts_seen: BTreeSet::new(),
            decision: None,
            holdings: BTreeMap::new(),
            learned: false,
            cheat_evidence: Vec::new(),
            history: Vec::new(),
        }
    }

    pub(crate) fn begin_iteration(&mut self, iteration: u64, epoch: u64) {
        self.iteration = iteration;
        self.epoch = epoch;
        self.step = 0;
        self.coins = None;
        self.from_successor = None;
        self.from_predecessor = None;
        self.masked_from_successor = None;
        self.parity = None;
        self.bundle.clear();
        self.broadcast = false;
        self.broadcasts_seen.clear();
        self.decision = None;
    }

    pub(crate) fn end_iteration(&mut self) {
        self.history.push(IterationView {
            iteration: self.iteration,
            epoch: self.epoch,
            coins: self.coins,
            from_successor: self.from_successor,
            from_predecessor: self.from_predecessor,
            masked_from_successor: self.masked_from_successor,
            parity: self.parity,
            broadcast: self.broadcast,
            broadcasts_seen: self.broadcasts_seen.iter().copied().collect(),
            decision: self.decision,
        });
    }

    /// Stores a piece and updates `learned`.
    pub(crate) fn hold(&mut self, piece: Piece) {
        let epoch = piece.epoch();
        let h = self.holdings.entry(epoch).or_default();
        h.insert(piece);
        if !self.learned && h.known_holders().len() >= self.threshold {
            self.learned = true;
        }
    }

    pub fn current_holdings(&self) -> Option<&Holdings> {
        self.holdings.get(&self.epoch)
    }

    /// Holds enough pieces of the current epoch to reconstruct.
    pub fn holds_all_shares(&self) -> bool {
        self.current_holdings().is_some_and(|h| h.known_holders().len() >= self.threshold)
    }
}

/// A decision rule for one player. Randomness enters only through
/// [`Strategy::coins`].
pub trait Strategy: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    /// Step 0/1 for group members: pass the pieces on to the leader.
    fn forward(&self, _view: &LocalState) -> bool {
        true
    }

    /// Step 1: commit to a coin triple.
    fn coins(&self, _view: &LocalState, alpha: f64, rng: &mut dyn RngCore) -> CoinTriple {
        draw_coins(alpha, rng)
    }

    /// Step 1: bits for (successor, predecessor); `None` sends nothing.
    fn step1(&self, view: &LocalState) -> Option<(bool, bool)> {
        view.coins.map(|c| (c.c_plus, c.c_minus))
    }

    /// Step 2: bit for the predecessor.
    fn step2(&self, view: &LocalState) -> Option<bool> {
        Some(protocol::step2_message(view.from_successor?, view.coins?.c))
    }

    /// Step 3: whether to broadcast the bundle.
    fn step3(&self, view: &LocalState) -> bool {
        match (view.parity, view.coins) {
            (Some(p), Some(c)) => protocol::step3_decide_broadcast(p, c.c),
            _ => false,
        }
    }

    /// Step 4: restart or stop.
    fn step4(&self, view: &LocalState) -> Decision {
        match view.parity {
            Some(p) => protocol::step4_decision(p, view.broadcasts_seen.len(), view.learned),
            None => Decision::AbortMissingMessage,
        }
    }

    /// Applied to each piece before it is sent.
    fn outgoing(&self, _view: &LocalState, piece: Piece) -> Piece {
        piece
    }
}

/// Honest coin draw: `c` is 1 with probability `alpha`, `c_plus` uniform.
pub fn draw_coins(alpha: f64, rng: &mut dyn RngCore) -> CoinTriple {
    let c = rng.gen_bool(alpha);
    let c_plus = rng.gen::<bool>();
    CoinTriple::new(c, c_plus)
}

/// The recommended strategy and the catalogued deviations from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Behavior {
    Honest,
    /// Holds back the share exactly when it should be broadcast.
    Withhold,
    /// Draws `c` with its own bias instead of the mechanism's.
    BiasedCoin(f64),
    /// Flips the step-2 bit.
    GarbleStep2,
    /// Sends nothing at all.
    AlwaysSilent,
    /// Broadcasts at step 3 regardless of parity and coin.
    AlwaysBroadcast,
    /// As a group member, never hands pieces to the leader.
    WithholdForward,
    /// Corrupts the value of every piece it sends, leaving the tag alone.
    Tamper,
}

/// Default bias used by the catalogued biased-coin deviation.
pub const CATALOG_BIAS: f64 = 0.9;

impl Behavior {
    pub fn parse(name: &str) -> Result<Behavior> {
        let lower = name.trim().to_ascii_lowercase();
        let behavior = match lower.as_str() {
            "honest" => Behavior::Honest,
            "withhold" => Behavior::Withhold,
            "biased" | "biased-coin" => Behavior::BiasedCoin(CATALOG_BIAS),
            "garble" | "garble-step2" => Behavior::GarbleStep2,
            "silent" | "always-silent" => Behavior::AlwaysSilent,
            "broadcast" | "always-broadcast" => Behavior::AlwaysBroadcast,
            "withhold-forward" => Behavior::WithholdForward,
            "tamper" => Behavior::Tamper,
            other => {
                let bias = other
                    .strip_prefix("biased:")
                    .or_else(|| other.strip_prefix("biased-coin:"))
                    .and_then(|b| b.parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownDeviation(name.to_string()))?;
                return biased_coin(bias);
            }
        };
        Ok(behavior)
    }
}

impl Strategy for Behavior {
    fn name(&self) -> String {
        match self {
            Behavior::Honest => "honest".into(),
            Behavior::Withhold => "withhold".into(),
            Behavior::BiasedCoin(b) => format!("biased:{b}"),
            Behavior::GarbleStep2 => "garble".into(),
            Behavior::AlwaysSilent => "silent".into(),
            Behavior::AlwaysBroadcast => "broadcast".into(),
            Behavior::WithholdForward => "withhold-forward".into(),
            Behavior::Tamper => "tamper".into(),
        }
    }

    fn forward(&self, _view: &LocalState) -> bool {
        !matches!(self, Behavior::AlwaysSilent | Behavior::WithholdForward)
    }

    fn coins(&self, _view: &LocalState, alpha: f64, rng: &mut dyn RngCore) -> CoinTriple {
        match self {
            Behavior::BiasedCoin(bias) => draw_coins(*bias, rng),
            _ => draw_coins(alpha, rng),
        }
    }

    fn step1(&self, view: &LocalState) -> Option<(bool, bool)> {
        match self {
            Behavior::AlwaysSilent => None,
            _ => view.coins.map(|c| (c.c_plus, c.c_minus)),
        }
    }

    fn step2(&self, view: &LocalState) -> Option<bool> {
        let bit = protocol::step2_message(view.from_successor?, view.coins?.c);
        match self {
            Behavior::AlwaysSilent => None,
            Behavior::GarbleStep2 => Some(!bit),
            _ => Some(bit),
        }
    }

    fn step3(&self, view: &LocalState) -> bool {
        let honest = match (view.parity, view.coins) {
            (Some(p), Some(c)) => protocol::step3_decide_broadcast(p, c.c),
            _ => false,
        };
        match self {
            Behavior::Withhold | Behavior::AlwaysSilent => false,
            Behavior::AlwaysBroadcast => view.parity.is_some(),
            _ => honest,
        }
    }

    fn outgoing(&self, _view: &LocalState, piece: Piece) -> Piece {
        match self {
            Behavior::Tamper => piece.tampered(),
            _ => piece,
        }
    }
}

/// The recommended strategy of the mechanism with coin bias `alpha`.
pub fn honest_strategy(alpha: f64) -> Result<Behavior> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(Behavior::Honest)
}

pub fn biased_coin(bias: f64) -> Result<Behavior> {
    if !(bias > 0.0 && bias <= 1.0) {
        return Err(Error::AlphaOutOfRange(bias));
    }
    Ok(Behavior::BiasedCoin(bias))
}

/// The named unilateral deviations audited against the recommended strategy.
pub fn deviation_catalog() -> Vec<(String, Behavior)> {
    [
        Behavior::Withhold,
        Behavior::BiasedCoin(CATALOG_BIAS),
        Behavior::GarbleStep2,
        Behavior::AlwaysSilent,
        Behavior::AlwaysBroadcast,
    ]
    .into_iter()
    .map(|b| (b.name(), b))
    .collect()
}

/// One strategy per player, indexed by player id - 1.
#[derive(Debug, Clone)]
pub struct StrategyProfile {
    strategies: Vec<Arc<dyn Strategy>>,
}

impl StrategyProfile {
    pub fn honest(n: usize) -> Self {
        StrategyProfile { strategies: (0..n).map(|_| Arc::new(Behavior::Honest) as Arc<dyn Strategy>).collect() }
    }

    pub fn new(strategies: Vec<Arc<dyn Strategy>>) -> Self {
        StrategyProfile { strategies }
    }

    /// Honest everywhere except `player`.
    pub fn with_deviant(n: usize, player: PlayerId, strategy: Arc<dyn Strategy>) -> Self {
        let mut p = StrategyProfile::honest(n);
        p.set(player, strategy);
        p
    }

    pub fn set(&mut self, player: PlayerId, strategy: Arc<dyn Strategy>) {
        self.strategies[player - 1] = strategy;
    }

    pub fn get(&self, player: PlayerId) -> &Arc<dyn Strategy> {
        &self.strategies[player - 1]
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.strategies.iter().map(|s| s.name()).collect()
    }

    pub fn is_all_honest(&self) -> bool {
        self.strategies.iter().all(|s| s.name() == "honest")
    }
}
