//! The randomized coin mechanism as a synchronous round-based simulation.
//!
//! Each iteration has five steps:
//!
//! | step | action |
//! |------|--------|
//! | 0 | issuer hands out a fresh sharing; group members (and, for 2-of-n, the two original holders) send pieces on |
//! | 1 | each leader draws `(c, c+)` and sends `c+` to its successor, `c- = c xor c+` to its predecessor |
//! | 2 | each leader sends `c_(i+,-) xor c_i` to its predecessor |
//! | 3 | each leader computes the parity `p`; it broadcasts its bundle iff `p = c_i = 1` |
//! | 4 | each leader restarts iff `(p = 0, count = 0)` or `(p = 1, count = 1)`, and stops otherwise |
//!
//! A message sent at step `s` is delivered at step `s + 1`. A player that
//! misses an expected message stops and stays silent from then on, so its
//! neighbours stop one step later.
//!
//! The three leaders sit on a ring. In the plain 3-of-3 layout every player
//! is a leader whose bundle is its own share. The m-of-n and 2-of-n layouts
//! put the players into three groups whose leaders run the same ring and
//! broadcast the group's whole bundle.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::rng::{self, SimRng};
use crate::shamir::{Issuer, Share, Subshare};
use crate::strategies::{CheatEvidence, LocalState, Role, StrategyProfile};
use crate::utility::InfoVector;

pub type PlayerId = usize;

/// Sender/receiver id of the issuer in transcripts.
pub const ISSUER: PlayerId = 0;

/// Steps per iteration.
pub const STEPS_PER_ITERATION: u64 = 5;

/// Default iteration cap.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Ring positions 1, 2, 3 with `3+ = 1` and `1- = 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlayerRing;

impl PlayerRing {
    pub const SIZE: usize = 3;

    pub fn successor(i: usize) -> usize {
        i % 3 + 1
    }

    pub fn predecessor(i: usize) -> usize {
        (i + 1) % 3 + 1
    }
}

/// A leader's coins for one iteration; `c_minus = c xor c_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CoinTriple {
    pub c: bool,
    pub c_plus: bool,
    pub c_minus: bool,
}

impl CoinTriple {
    pub fn new(c: bool, c_plus: bool) -> Self {
        CoinTriple { c, c_plus, c_minus: c ^ c_plus }
    }

    /// All four triples in the order (c, c_plus) = 00, 01, 10, 11.
    pub fn all() -> [CoinTriple; 4] {
        [
            CoinTriple::new(false, false),
            CoinTriple::new(false, true),
            CoinTriple::new(true, false),
            CoinTriple::new(true, true),
        ]
    }
}

/// Step-4 outcome for a leader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// Ask the issuer for a fresh sharing.
    Restart,
    /// Stop the protocol; `learned` is whether the player can reconstruct.
    Stop { learned: bool },
    /// Stop without the secret because the count contradicts the parity.
    AbortCheatDetected,
    /// Stop because an expected message never arrived.
    AbortMissingMessage,
}

impl Decision {
    pub fn learned(&self) -> bool {
        matches!(self, Decision::Stop { learned: true })
    }

    pub fn is_restart(&self) -> bool {
        matches!(self, Decision::Restart)
    }
}

/// `c_(i+,-) xor c_i`, sent to the predecessor at step 2.
pub fn step2_message(from_successor: bool, own_coin: bool) -> bool {
    from_successor ^ own_coin
}

/// Parity from the predecessor's step-1 bit, the successor's step-2 bit and the own coin.
pub fn compute_parity(from_predecessor: bool, masked_from_successor: bool, own_coin: bool) -> bool {
    from_predecessor ^ masked_from_successor ^ own_coin
}

/// The recommended step-3 rule: broadcast iff `p = c_i = 1`.
pub fn step3_decide_broadcast(parity: bool, own_coin: bool) -> bool {
    parity && own_coin
}

/// The recommended step-4 rule. `count` is the number of distinct valid
/// broadcasts seen this iteration, the player's own included iff it broadcast.
pub fn step4_decision(parity: bool, count: usize, learned: bool) -> Decision {
    let restart = (!parity && count == 0) || (parity && count == 1);
    if restart {
        Decision::Restart
    } else if learned {
        Decision::Stop { learned: true }
    } else {
        Decision::AbortCheatDetected
    }
}

/// Bits each ring position receives at step 1 when everybody sends its
/// committed values: `(c_(i+,-), c_(i-,+))` per position.
pub fn exchange_bits(coins: &[CoinTriple; 3]) -> [(bool, bool); 3] {
    std::array::from_fn(|k| {
        let i = k + 1;
        let succ = coins[PlayerRing::successor(i) - 1];
        let pred = coins[PlayerRing::predecessor(i) - 1];
        (succ.c_minus, pred.c_plus)
    })
}

/// Share or subshare travelling between players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    Share(Share),
    Subshare(Subshare),
}

impl Piece {
    pub fn epoch(&self) -> u64 {
        match self {
            Piece::Share(s) => s.epoch,
            Piece::Subshare(s) => s.epoch,
        }
    }

    pub fn verify(&self, issuer: &Issuer) -> bool {
        match self {
            Piece::Share(s) => issuer.verify_tag(s),
            Piece::Subshare(s) => issuer.verify_subshare(s),
        }
    }

    /// Same piece with its value shifted by one and the old tag.
    pub fn tampered(self) -> Piece {
        match self {
            Piece::Share(mut s) => {
                s.y = s.y + s.y.field().one();
                Piece::Share(s)
            }
            Piece::Subshare(mut s) => {
                s.value = s.value + s.value.field().one();
                Piece::Subshare(s)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    /// Issuer to holder, step 0.
    Issue,
    /// Original holder to another player (2-of-n), step 0.
    Split,
    /// Group member to its leader.
    Forward,
    CoinPlus,
    CoinMinus,
    MaskedBit,
    ShareBroadcast,
    RestartRequest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Bit(bool),
    Pieces(Vec<Piece>),
    Empty,
}

/// One message on the simulated synchronous network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundMessage {
    pub iteration: u64,
    pub epoch: u64,
    pub sent_step: u8,
    pub delivered_step: u8,
    pub sender: PlayerId,
    pub receiver: PlayerId,
    pub kind: MessageKind,
    pub payload: Payload,
}

impl RoundMessage {
    fn new(
        iteration: u64,
        epoch: u64,
        step: u8,
        sender: PlayerId,
        receiver: PlayerId,
        kind: MessageKind,
        payload: Payload,
    ) -> Self {
        debug_assert!(match kind {
            MessageKind::CoinPlus | MessageKind::CoinMinus | MessageKind::MaskedBit =>
                matches!(payload, Payload::Bit(_)),
            MessageKind::RestartRequest => matches!(payload, Payload::Empty),
            _ => matches!(payload, Payload::Pieces(_)),
        });
        // issuance reaches players at step 0; everything else one step later
        let delivered_step = if kind == MessageKind::Issue { step } else { step + 1 };
        RoundMessage { iteration, epoch, sent_step: step, delivered_step, sender, receiver, kind, payload }
    }
}

/// Iteration-level outcome under the recommended strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationEvent {
    /// Three heads: everybody broadcasts.
    Success,
    /// Exactly one head: one broadcast, everybody restarts.
    LoneSend,
    /// Parity zero: nobody broadcasts.
    SilentRestart,
}

impl IterationEvent {
    pub fn classify(heads: usize) -> IterationEvent {
        match heads {
            3 => IterationEvent::Success,
            1 => IterationEvent::LoneSend,
            _ => IterationEvent::SilentRestart,
        }
    }
}

/// Record of one iteration; arrays are indexed by ring position - 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationTranscript {
    pub iteration: u64,
    pub epoch: u64,
    pub coins: [Option<CoinTriple>; 3],
    pub parity: [Option<bool>; 3],
    pub broadcasters: Vec<PlayerId>,
    pub decisions: [Option<Decision>; 3],
    pub messages: Vec<RoundMessage>,
}

impl IterationTranscript {
    /// Event implied by the committed coins, if all three leaders committed.
    pub fn event(&self) -> Option<IterationEvent> {
        let heads = self.coins.iter().map(|c| c.map(|c| c.c as usize)).sum::<Option<usize>>()?;
        Some(IterationEvent::classify(heads))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalCause {
    AllLearned,
    CheatStop,
    MissingBitAbort,
    IterationCapHit,
}

/// How much of each iteration to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptMode {
    Off,
    #[default]
    Summary,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Probability that an honest leader's `c` is 1; `0 < alpha <= 1`.
    pub alpha: f64,
    pub cap: u64,
    pub transcripts: TranscriptMode,
}

impl RunConfig {
    pub fn new(alpha: f64) -> Self {
        RunConfig { alpha, cap: DEFAULT_CAP, transcripts: TranscriptMode::Summary }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_transcripts(mut self, mode: TranscriptMode) -> Self {
        self.transcripts = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        if self.cap == 0 {
            return Err(Error::ZeroCap);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub iterations: u64,
    pub total_steps: u64,
    pub info: InfoVector,
    pub cause: TerminalCause,
    /// Value each learner reconstructs from its holdings.
    pub recovered: Vec<Option<u64>>,
    /// Iterations in which the three leaders computed different parities.
    pub parity_disagreements: u64,
    pub cheat_evidence: Vec<Vec<CheatEvidence>>,
    pub transcripts: Vec<IterationTranscript>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    /// 3-of-3, every player leads its own group.
    ThreeOfThree,
    /// m-of-n with m >= 3, n > 3: designated holders forward shares to leaders.
    Grouped,
    /// 2-of-n with n >= 3: the two holders split into subshares, then n-of-n on bundles.
    TwoOfN,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Group {
    pub players: Vec<PlayerId>,
    pub leader: PlayerId,
    pub forwarders: Vec<PlayerId>,
}

/// Who holds what and who leads which group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub kind: LayoutKind,
    pub n: usize,
    /// Shares needed to reconstruct the secret.
    pub m: usize,
    /// Players 1..=issued receive a share of every sharing.
    pub issued: usize,
    pub groups: [Group; 3],
}

fn contiguous_blocks(n: usize) -> [Vec<PlayerId>; 3] {
    let (base, extra) = (n / 3, n % 3);
    let mut next = 1;
    std::array::from_fn(|b| {
        let size = base + usize::from(b < extra);
        let block: Vec<PlayerId> = (next..next + size).collect();
        next += size;
        block
    })
}

impl Layout {
    pub fn three_of_three() -> Layout {
        Layout {
            kind: LayoutKind::ThreeOfThree,
            n: 3,
            m: 3,
            issued: 3,
            groups: std::array::from_fn(|k| Group { players: vec![k + 1], leader: k + 1, forwarders: vec![] }),
        }
    }

    /// Players split into three contiguous blocks as equal as possible. The m
    /// designated holders are picked round-robin across the blocks (first
    /// player of each block, then the second, ...), so every block holds at
    /// least one; the first player of each block leads it.
    pub fn m_of_n(m: usize, n: usize) -> Result<Layout> {
        if m < 3 || n <= 3 || m > n {
            return Err(Error::Layout(format!("m-of-n lift needs 3 <= m <= n and n > 3, got m={m}, n={n}")));
        }
        let blocks = contiguous_blocks(n);
        let mut designated = BTreeSet::new();
        'pick: for k in 0.. {
            for block in &blocks {
                if let Some(&p) = block.get(k) {
                    designated.insert(p);
                    if designated.len() == m {
                        break 'pick;
                    }
                }
            }
        }
        let groups = blocks.map(|players| {
            let leader = players[0];
            let forwarders = players.iter().copied().filter(|p| *p != leader && designated.contains(p)).collect();
            Group { players, leader, forwarders }
        });
        if groups.iter().any(|g| !designated.contains(&g.leader)) {
            return Err(Error::Layout("a group has no designated holder".into()));
        }
        Ok(Layout { kind: LayoutKind::Grouped, n, m, issued: n, groups })
    }

    /// Players 1 and 2 hold the shares; everyone runs n-of-n on subshare bundles.
    pub fn two_of_n(n: usize) -> Result<Layout> {
        if n < 3 {
            return Err(Error::Layout(format!(
                "2-of-{n} sharing has no practical mechanism; the subshare lift needs n >= 3"
            )));
        }
        let groups = contiguous_blocks(n).map(|players| {
            let leader = players[0];
            let forwarders = players[1..].to_vec();
            Group { players, leader, forwarders }
        });
        Ok(Layout { kind: LayoutKind::TwoOfN, n, m: 2, issued: 2, groups })
    }

    /// Picks the layout for an m-of-n request.
    pub fn for_threshold(m: usize, n: usize) -> Result<Layout> {
        match (m, n) {
            (3, 3) => Ok(Layout::three_of_three()),
            (2, n) => Layout::two_of_n(n),
            (m, n) if m >= 3 && n > 3 => Layout::m_of_n(m, n),
            _ => Err(Error::Layout(format!("no mechanism for m={m}, n={n}"))),
        }
    }

    pub fn role(&self, player: PlayerId) -> Role {
        for (k, g) in self.groups.iter().enumerate() {
            if g.leader == player {
                return Role::Leader { position: k + 1 };
            }
            if g.forwarders.contains(&player) {
                return Role::Member { leader: g.leader };
            }
        }
        Role::Passive
    }

    pub fn leaders(&self) -> [PlayerId; 3] {
        std::array::from_fn(|k| self.groups[k].leader)
    }

    fn forward_step(&self) -> u8 {
        match self.kind {
            LayoutKind::TwoOfN => 1,
            _ => 0,
        }
    }
}

/// One run of the mechanism.
pub struct Mechanism {
    layout: Layout,
    profile: StrategyProfile,
    config: RunConfig,
    secret: FieldElement,
    issuer: Issuer,
    issuer_rng: SimRng,
    player_rngs: Vec<SimRng>,
    states: Vec<LocalState>,
    issued: BTreeSet<u64>,
    iterations: u64,
    stop_seen: bool,
    parity_disagreements: u64,
    transcripts: Vec<IterationTranscript>,
}

impl Mechanism {
    /// `rng` is the trial's root generator (see [`crate::rng`]).
    pub fn new(
        secret: FieldElement,
        layout: Layout,
        profile: StrategyProfile,
        config: RunConfig,
        mut rng: SimRng,
    ) -> Result<Self> {
        config.validate()?;
        if profile.len() != layout.n {
            return Err(Error::Layout(format!("{} strategies for {} players", profile.len(), layout.n)));
        }
        let field = secret.field();
        if (layout.n as u64) >= field.modulus() {
            return Err(Error::ThresholdOutOfRange { m: layout.m, n: layout.n, p: field.modulus() });
        }
        let issuer = Issuer::random(field, &mut rng);
        let issuer_rng = rng::child(&mut rng);
        let player_rngs = (0..layout.n).map(|_| rng::child(&mut rng)).collect();
        let states = (1..=layout.n).map(|p| LocalState::new(p, layout.role(p), layout.m)).collect();
        Ok(Mechanism {
            layout,
            profile,
            config,
            secret,
            issuer,
            issuer_rng,
            player_rngs,
            states,
            issued: BTreeSet::new(),
            iterations: 0,
            stop_seen: false,
            parity_disagreements: 0,
            transcripts: Vec::new(),
        })
    }

    pub fn issuer(&self) -> &Issuer {
        &self.issuer
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn state(&self, player: PlayerId) -> &LocalState {
        &self.states[player - 1]
    }

    pub fn transcripts(&self) -> &[IterationTranscript] {
        &self.transcripts
    }

    /// Issues a fresh sharing for `epoch` and gives every holder its own share.
    pub fn issue_round(&mut self, epoch: u64) -> Result<Vec<Share>> {
        if !self.issued.insert(epoch) {
            return Err(Error::DuplicateEpoch(epoch));
        }
        let shares =
            self.issuer.issue_shares(self.secret, self.layout.m, self.layout.issued, epoch, &mut self.issuer_rng)?;
        for share in &shares {
            let st = &mut self.states[share.holder - 1];
            st.hold(Piece::Share(*share));
            if self.layout.kind != LayoutKind::TwoOfN {
                st.bundle.push(Piece::Share(*share));
            }
        }
        Ok(shares)
    }

    fn next_epoch(&self) -> u64 {
        let mut e = self.iterations;
        while self.issued.contains(&e) {
            e += 1;
        }
        e
    }

    fn leader_of_position(&self, pos: usize) -> PlayerId {
        self.layout.groups[pos - 1].leader
    }

    fn abort(&mut self, player: PlayerId, step: u8, from: PlayerId) {
        let st = &mut self.states[player - 1];
        if !st.active {
            return;
        }
        let iteration = st.iteration;
        let already_flagged = st
            .cheat_evidence
            .iter()
            .any(|e| matches!(e, CheatEvidence::BadTag { iteration: i, from: f, .. } if *i == iteration && *f == from));
        if !already_flagged {
            st.cheat_evidence.push(CheatEvidence::MissingMessage { iteration, step, from });
        }
        st.active = false;
        st.decision = Some(Decision::AbortMissingMessage);
    }

    /// Delivers `msgs` at `step`, verifying pieces; returns what was received.
    fn deliver(&mut self, msgs: Vec<RoundMessage>, step: u8, log: &mut Vec<RoundMessage>) -> Vec<RoundMessage> {
        for st in &mut self.states {
            st.step = step;
        }
        let keep = self.config.transcripts == TranscriptMode::Full;
        let mut received = Vec::with_capacity(msgs.len());
        for msg in msgs {
            debug_assert_eq!(msg.delivered_step, step);
            let epoch = self.states[msg.receiver - 1].epoch;
            let ok = match &msg.payload {
                Payload::Pieces(pieces) => {
                    !pieces.is_empty() && pieces.iter().all(|p| p.epoch() == epoch && p.verify(&self.issuer))
                }
                _ => true,
            };
            if !ok {
                let st = &mut self.states[msg.receiver - 1];
                st.cheat_evidence.push(CheatEvidence::BadTag { iteration: st.iteration, step, from: msg.sender });
            }
            if keep {
                log.push(msg.clone());
            }
            if ok {
                received.push(msg);
            }
        }
        received
    }

    /// Plays one iteration with coins drawn by the strategies.
    pub fn play_iteration(&mut self) -> IterationTranscript {
        self.play(None)
    }

    /// Plays one iteration with the leaders' committed coins fixed (by ring position).
    pub fn play_iteration_with_coins(&mut self, coins: [CoinTriple; 3]) -> IterationTranscript {
        self.play(Some(coins))
    }

    fn play(&mut self, forced: Option<[CoinTriple; 3]>) -> IterationTranscript {
        let iteration = self.iterations;
        let epoch = self.next_epoch();
        let n = self.layout.n;
        let leaders = self.layout.leaders();
        let mut log = Vec::new();
        let full = self.config.transcripts == TranscriptMode::Full;

        // step 0
        for st in &mut self.states {
            st.begin_iteration(iteration, epoch);
        }
        let shares = self.issue_round(epoch).expect("fresh epoch");
        if full {
            for s in &shares {
                log.push(RoundMessage::new(
                    iteration,
                    epoch,
                    0,
                    ISSUER,
                    s.holder,
                    MessageKind::Issue,
                    Payload::Pieces(vec![Piece::Share(*s)]),
                ));
            }
        }
        let mut out = Vec::new();
        if self.layout.kind == LayoutKind::TwoOfN {
            for original in 1..=2 {
                let st = &self.states[original - 1];
                let strategy = self.profile.get(original).clone();
                if !st.active || !strategy.forward(st) {
                    continue;
                }
                let share = shares[original - 1];
                let subs = self
                    .issuer
                    .split_subshares(&share, n - 1, &mut self.player_rngs[original - 1])
                    .expect("issued share splits");
                let others = (1..=n).filter(|&p| p != original);
                for (sub, to) in subs.into_iter().zip(others) {
                    let piece = strategy.outgoing(&self.states[original - 1], Piece::Subshare(sub));
                    out.push(RoundMessage::new(
                        iteration,
                        epoch,
                        0,
                        original,
                        to,
                        MessageKind::Split,
                        Payload::Pieces(vec![piece]),
                    ));
                }
            }
        }
        self.send_forwards(0, &mut out);

        // step 1
        let received = self.deliver(out, 1, &mut log);
        self.absorb_pieces(&received);
        if self.layout.kind == LayoutKind::TwoOfN {
            for p in 1..=n {
                for original in (1..=2).filter(|&o| o != p) {
                    let got = received
                        .iter()
                        .any(|m| m.kind == MessageKind::Split && m.sender == original && m.receiver == p);
                    if !got {
                        self.abort(p, 1, original);
                    }
                }
            }
        }
        self.check_forwards(1, &received);
        let mut out = Vec::new();
        self.send_forwards(1, &mut out);
        for (k, &leader) in leaders.iter().enumerate() {
            if !self.states[leader - 1].active {
                continue;
            }
            let strategy = self.profile.get(leader).clone();
            let coins = match forced {
                Some(c) => c[k],
                None => strategy.coins(&self.states[leader - 1], self.config.alpha, &mut self.player_rngs[leader - 1]),
            };
            self.states[leader - 1].coins = Some(coins);
            if let Some((to_succ, to_pred)) = strategy.step1(&self.states[leader - 1]) {
                let pos = k + 1;
                let succ = self.leader_of_position(PlayerRing::successor(pos));
                let pred = self.leader_of_position(PlayerRing::predecessor(pos));
                out.push(RoundMessage::new(
                    iteration,
                    epoch,
                    1,
                    leader,
                    succ,
                    MessageKind::CoinPlus,
                    Payload::Bit(to_succ),
                ));
                out.push(RoundMessage::new(
                    iteration,
                    epoch,
                    1,
                    leader,
                    pred,
                    MessageKind::CoinMinus,
                    Payload::Bit(to_pred),
                ));
            }
        }

        // step 2
        let received = self.deliver(out, 2, &mut log);
        self.absorb_pieces(&received);
        for msg in &received {
            let st = &mut self.states[msg.receiver - 1];
            if let Payload::Bit(b) = msg.payload {
                match msg.kind {
                    MessageKind::CoinMinus => st.from_successor = Some(b),
                    MessageKind::CoinPlus => st.from_predecessor = Some(b),
                    _ => {}
                }
            }
        }
        self.check_forwards(2, &received);
        for (k, &leader) in leaders.iter().enumerate() {
            let pos = k + 1;
            let succ = self.leader_of_position(PlayerRing::successor(pos));
            let pred = self.leader_of_position(PlayerRing::predecessor(pos));
            if self.states[leader - 1].from_successor.is_none() {
                self.abort(leader, 2, succ);
            }
            if self.states[leader - 1].from_predecessor.is_none() {
                self.abort(leader, 2, pred);
            }
        }
        let mut out = Vec::new();
        for (k, &leader) in leaders.iter().enumerate() {
            if !self.states[leader - 1].active {
                continue;
            }
            let pred = self.leader_of_position(PlayerRing::predecessor(k + 1));
            if let Some(bit) = self.profile.get(leader).step2(&self.states[leader - 1]) {
                out.push(RoundMessage::new(
                    iteration,
                    epoch,
                    2,
                    leader,
                    pred,
                    MessageKind::MaskedBit,
                    Payload::Bit(bit),
                ));
            }
        }

        // step 3
        let received = self.deliver(out, 3, &mut log);
        for msg in &received {
            if let (MessageKind::MaskedBit, Payload::Bit(b)) = (msg.kind, &msg.payload) {
                self.states[msg.receiver - 1].masked_from_successor = Some(*b);
            }
        }
        let mut out = Vec::new();
        for (k, &leader) in leaders.iter().enumerate() {
            let succ = self.leader_of_position(PlayerRing::successor(k + 1));
            if self.states[leader - 1].active && self.states[leader - 1].masked_from_successor.is_none() {
                self.abort(leader, 3, succ);
            }
            let st = &mut self.states[leader - 1];
            if !st.active {
                continue;
            }
            let (Some(pred_bit), Some(masked), Some(coins)) = (st.from_predecessor, st.masked_from_successor, st.coins)
            else {
                continue;
            };
            st.parity = Some(compute_parity(pred_bit, masked, coins.c));
            let strategy = self.profile.get(leader).clone();
            if strategy.step3(&self.states[leader - 1]) {
                let st = &self.states[leader - 1];
                let pieces: Vec<Piece> = st.bundle.iter().map(|p| strategy.outgoing(st, *p)).collect();
                for to in (1..=n).filter(|&p| p != leader) {
                    out.push(RoundMessage::new(
                        iteration,
                        epoch,
                        3,
                        leader,
                        to,
                        MessageKind::ShareBroadcast,
                        Payload::Pieces(pieces.clone()),
                    ));
                }
                let st = &mut self.states[leader - 1];
                st.broadcast = true;
                st.broadcasts_seen.insert(leader);
            }
        }

        // step 4
        let received = self.deliver(out, 4, &mut log);
        for msg in &received {
            if msg.kind != MessageKind::ShareBroadcast {
                continue;
            }
            let st = &mut self.states[msg.receiver - 1];
            if let Payload::Pieces(pieces) = &msg.payload {
                for p in pieces {
                    st.hold(*p);
                }
            }
            st.broadcasts_seen.insert(msg.sender);
        }
        for &leader in &leaders {
            if !self.states[leader - 1].active {
                continue;
            }
            let decision = self.profile.get(leader).step4(&self.states[leader - 1]);
            let st = &mut self.states[leader - 1];
            st.decision = Some(decision);
            match decision {
                Decision::Restart => {
                    if full {
                        log.push(RoundMessage::new(
                            iteration,
                            epoch,
                            4,
                            leader,
                            ISSUER,
                            MessageKind::RestartRequest,
                            Payload::Empty,
                        ));
                    }
                }
                other => {
                    if other == Decision::AbortCheatDetected {
                        st.cheat_evidence.push(CheatEvidence::InconsistentCount {
                            iteration,
                            parity: st.parity.unwrap_or(false),
                            count: st.broadcasts_seen.len(),
                        });
                    }
                    st.active = false;
                    self.stop_seen = true;
                }
            }
        }

        let parities: [Option<bool>; 3] = std::array::from_fn(|k| self.states[leaders[k] - 1].parity);
        if let [Some(a), Some(b), Some(c)] = parities {
            if a != b || b != c {
                self.parity_disagreements += 1;
            }
        }
        if leaders.iter().any(|&l| matches!(self.states[l - 1].decision, Some(d) if d != Decision::Restart)) {
            self.stop_seen = true;
        }
        for st in &mut self.states {
            st.end_iteration();
        }
        self.iterations += 1;

        let transcript = IterationTranscript {
            iteration,
            epoch,
            coins: std::array::from_fn(|k| self.states[leaders[k] - 1].coins),
            parity: parities,
            broadcasters: leaders.iter().copied().filter(|&l| self.states[l - 1].broadcast).collect(),
            decisions: std::array::from_fn(|k| self.states[leaders[k] - 1].decision),
            messages: log,
        };
        if self.config.transcripts != TranscriptMode::Off {
            self.transcripts.push(transcript.clone());
        }
        transcript
    }

    fn send_forwards(&mut self, step: u8, out: &mut Vec<RoundMessage>) {
        if self.layout.forward_step() != step {
            return;
        }
        for g in self.layout.groups.clone() {
            for &member in &g.forwarders {
                let st = &self.states[member - 1];
                let strategy = self.profile.get(member);
                if !st.active || !strategy.forward(st) || st.bundle.is_empty() {
                    continue;
                }
                let pieces = st.bundle.iter().map(|p| strategy.outgoing(st, *p)).collect();
                out.push(RoundMessage::new(
                    st.iteration,
                    st.epoch,
                    step,
                    member,
                    g.leader,
                    MessageKind::Forward,
                    Payload::Pieces(pieces),
                ));
            }
        }
    }

    fn check_forwards(&mut self, step: u8, received: &[RoundMessage]) {
        if self.layout.forward_step() + 1 != step {
            return;
        }
        for g in self.layout.groups.clone() {
            for &member in &g.forwarders {
                let got = received
                    .iter()
                    .any(|m| m.kind == MessageKind::Forward && m.sender == member && m.receiver == g.leader);
                if !got {
                    self.abort(g.leader, step, member);
                }
            }
        }
    }

    /// Split and forward payloads join the receiver's holdings and bundle.
    fn absorb_pieces(&mut self, received: &[RoundMessage]) {
        for msg in received {
            if !matches!(msg.kind, MessageKind::Split | MessageKind::Forward) {
                continue;
            }
            let st = &mut self.states[msg.receiver - 1];
            if let Payload::Pieces(pieces) = &msg.payload {
                for p in pieces {
                    st.hold(*p);
                    st.bundle.push(*p);
                }
            }
        }
    }

    fn any_leader_active(&self) -> bool {
        self.layout.leaders().iter().any(|&l| self.states[l - 1].active)
    }

    /// Runs iterations until every leader has stopped or the cap is hit.
    pub fn run(mut self) -> RunOutcome {
        let mut capped = false;
        while self.any_leader_active() {
            if !self.stop_seen && self.iterations >= self.config.cap {
                capped = true;
                break;
            }
            self.play(None);
        }
        self.finish(capped)
    }

    /// Outcome of the iterations played so far.
    pub fn finish(self, capped: bool) -> RunOutcome {
        let info = InfoVector::new(self.states.iter().map(|s| s.learned).collect());
        let cause = if capped {
            TerminalCause::IterationCapHit
        } else if info.all() {
            TerminalCause::AllLearned
        } else if self.states.iter().any(|s| {
            s.history.iter().any(|h| matches!(h.decision, Some(Decision::Stop { .. } | Decision::AbortCheatDetected)))
        }) {
            TerminalCause::CheatStop
        } else {
            TerminalCause::MissingBitAbort
        };
        let recovered = (1..=self.layout.n).map(|p| self.recover(p).map(|v| v.value())).collect();
        RunOutcome {
            iterations: self.iterations,
            total_steps: STEPS_PER_ITERATION * self.iterations,
            info,
            cause,
            recovered,
            parity_disagreements: self.parity_disagreements,
            cheat_evidence: self.states.iter().map(|s| s.cheat_evidence.clone()).collect(),
            transcripts: self.transcripts,
        }
    }

    /// The secret as reconstructed by `player` from its own holdings, if it can.
    pub fn recover(&self, player: PlayerId) -> Option<FieldElement> {
        let st = &self.states[player - 1];
        for h in st.holdings.values() {
            if h.known_holders().len() < self.layout.m {
                continue;
            }
            let mut shares: Vec<Share> = h.shares.values().copied().collect();
            let mut parents: std::collections::BTreeMap<PlayerId, Vec<Subshare>> = Default::default();
            for s in h.subshares.values() {
                parents.entry(s.parent_holder).or_default().push(*s);
            }
            for (parent, subs) in parents {
                if h.shares.contains_key(&parent) {
                    continue;
                }
                if let Some(s) = self.issuer.join_subshares(&subs) {
                    shares.push(s);
                }
            }
            if let Ok(v) = self.issuer.reconstruct(&shares, self.layout.m) {
                return Some(v);
            }
        }
        None
    }
}

/// Runs trial `trial` of `layout` under `seed`.
pub fn run_trial(
    secret: FieldElement,
    layout: &Layout,
    profile: &StrategyProfile,
    config: &RunConfig,
    seed: u64,
    trial: u64,
) -> Result<RunOutcome> {
    let mech = Mechanism::new(secret, layout.clone(), profile.clone(), config.clone(), rng::trial_rng(seed, trial))?;
    Ok(mech.run())
}

/// The 3-of-3 mechanism with coin bias `config.alpha`.
pub fn run_mechanism(
    secret: FieldElement,
    profile: &StrategyProfile,
    config: &RunConfig,
    seed: u64,
) -> Result<RunOutcome> {
    run_trial(secret, &Layout::three_of_three(), profile, config, seed, 0)
}

/// m-of-n sharing (m >= 3, n > 3) via three group leaders.
pub fn lift_m_of_n(
    secret: FieldElement,
    m: usize,
    n: usize,
    profile: &StrategyProfile,
    config: &RunConfig,
    seed: u64,
) -> Result<RunOutcome> {
    run_trial(secret, &Layout::m_of_n(m, n)?, profile, config, seed, 0)
}

/// 2-of-n sharing (n >= 3) via subshare bundles.
pub fn lift_2_of_n(
    secret: FieldElement,
    n: usize,
    profile: &StrategyProfile,
    config: &RunConfig,
    seed: u64,
) -> Result<RunOutcome> {
    run_trial(secret, &Layout::two_of_n(n)?, profile, config, seed, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::strategies::Behavior;
    use std::sync::Arc;

    fn secret(p: u64, v: u64) -> FieldElement {
        Field::new(p).unwrap().element(v).unwrap()
    }

    fn mech(alpha: f64, profile: StrategyProfile, mode: TranscriptMode) -> Mechanism {
        let config = RunConfig::new(alpha).with_transcripts(mode);
        Mechanism::new(secret(13, 5), Layout::three_of_three(), profile, config, rng::trial_rng(1, 0)).unwrap()
    }

    fn all_coin_assignments() -> Vec<[CoinTriple; 3]> {
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

    #[test]
    fn ring_is_a_bijection() {
        for i in 1..=3 {
            assert_eq!(PlayerRing::predecessor(PlayerRing::successor(i)), i);
            assert_eq!(PlayerRing::successor(PlayerRing::predecessor(i)), i);
        }
        assert_eq!(PlayerRing::successor(3), 1);
        assert_eq!(PlayerRing::predecessor(1), 3);
    }

    #[test]
    fn xor_examples() {
        assert!(!step2_message(true, true));
        assert!(step2_message(false, true));
        let t = CoinTriple::new(true, true);
        assert!(!t.c_minus);
    }

    #[test]
    fn step4_examples() {
        assert_eq!(step4_decision(true, 3, true), Decision::Stop { learned: true });
        assert_eq!(step4_decision(true, 0, false), Decision::AbortCheatDetected);
        assert!(!step4_decision(true, 0, false).learned());
        assert_eq!(step4_decision(true, 1, false), Decision::Restart);
        assert_eq!(step4_decision(false, 0, false), Decision::Restart);
        assert_eq!(step4_decision(false, 1, false), Decision::AbortCheatDetected);
    }

    #[test]
    fn issuance_round() {
        let mut m = mech(0.5, StrategyProfile::honest(3), TranscriptMode::Off);
        let shares = m.issue_round(0).unwrap();
        assert_eq!(shares.len(), 3);
        for s in &shares {
            let h = m.state(s.holder).holdings.get(&0).unwrap();
            assert_eq!(h.shares.keys().copied().collect::<Vec<_>>(), vec![s.holder]);
            assert!(m.issuer().verify_tag(s));
        }
        assert_eq!(m.issue_round(0), Err(Error::DuplicateEpoch(0)));
        let again = m.issue_round(1).unwrap();
        assert_ne!(shares.iter().map(|s| s.y).collect::<Vec<_>>(), again.iter().map(|s| s.y).collect::<Vec<_>>());
        assert_eq!(m.issuer().reconstruct(&shares, 3).unwrap().value(), 5);
        assert_eq!(m.issuer().reconstruct(&again, 3).unwrap().value(), 5);
    }

    #[test]
    fn step1_delivery_matches_commitments() {
        for coins in all_coin_assignments() {
            let mut m = mech(0.5, StrategyProfile::honest(3), TranscriptMode::Full);
            let t = m.play_iteration_with_coins(coins);
            let expected = exchange_bits(&coins);
            for pos in 1..=3 {
                let view = &m.state(pos).history[0];
                assert_eq!((view.from_successor.unwrap(), view.from_predecessor.unwrap()), expected[pos - 1]);
            }
            for msg in &t.messages {
                if msg.kind != MessageKind::Issue {
                    assert_eq!(msg.delivered_step, msg.sent_step + 1);
                }
            }
        }
    }

    #[test]
    fn honest_parity_is_global_xor() {
        for coins in all_coin_assignments() {
            let mut m = mech(0.5, StrategyProfile::honest(3), TranscriptMode::Summary);
            let t = m.play_iteration_with_coins(coins);
            let xor = coins[0].c ^ coins[1].c ^ coins[2].c;
            assert_eq!(t.parity, [Some(xor); 3]);
        }
    }

    #[test]
    fn broadcast_examples() {
        let h = |c: bool| CoinTriple::new(c, false);
        let mut m = mech(0.5, StrategyProfile::honest(3), TranscriptMode::Summary);
        let t = m.play_iteration_with_coins([h(true), h(true), h(true)]);
        assert_eq!(t.broadcasters, vec![1, 2, 3]);
        assert!(t.decisions.iter().all(|d| *d == Some(Decision::Stop { learned: true })));

        let mut m = mech(0.5, StrategyProfile::honest(3), TranscriptMode::Summary);
        let t = m.play_iteration_with_coins([h(true), h(false), h(false)]);
        assert_eq!(t.broadcasters, vec![1]);
        assert!(t.decisions.iter().all(|d| *d == Some(Decision::Restart)));
        assert!((1..=3).all(|p| !m.state(p).learned));

        let mut m = mech(0.5, StrategyProfile::honest(3), TranscriptMode::Summary);
        let t = m.play_iteration_with_coins([h(true), h(true), h(false)]);
        assert!(t.broadcasters.is_empty());
        assert!(t.decisions.iter().all(|d| *d == Some(Decision::Restart)));
    }

    #[test]
    fn withholder_against_two_tails_is_caught() {
        let h = |c: bool| CoinTriple::new(c, true);
        let profile = StrategyProfile::with_deviant(3, 1, Arc::new(Behavior::Withhold));
        let mut m = mech(0.5, profile, TranscriptMode::Summary);
        let t = m.play_iteration_with_coins([h(true), h(false), h(false)]);
        assert!(t.broadcasters.is_empty());
        assert!(t.decisions.iter().all(|d| *d == Some(Decision::AbortCheatDetected)));
        let out = m.finish(false);
        assert_eq!(out.cause, TerminalCause::CheatStop);
        assert_eq!(out.info.to_string(), "000");
    }

    #[test]
    fn withholder_against_two_heads_learns_alone() {
        let h = |c: bool| CoinTriple::new(c, false);
        let profile = StrategyProfile::with_deviant(3, 2, Arc::new(Behavior::Withhold));
        let mut m = mech(0.5, profile, TranscriptMode::Summary);
        m.play_iteration_with_coins([h(true), h(true), h(true)]);
        let out = m.finish(false);
        assert_eq!(out.info.to_string(), "010");
        assert_eq!(out.recovered, vec![None, Some(5), None]);
        assert_eq!(out.cause, TerminalCause::CheatStop);
    }

    #[test]
    fn silent_player_triggers_neighbour_aborts() {
        let profile = StrategyProfile::with_deviant(3, 3, Arc::new(Behavior::AlwaysSilent));
        let out = run_mechanism(secret(13, 5), &profile, &RunConfig::new(0.5), 4).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.cause, TerminalCause::MissingBitAbort);
        assert_eq!(out.info.to_string(), "000");
        let t = &out.transcripts[0];
        assert_eq!(t.decisions[0], Some(Decision::AbortMissingMessage));
        assert_eq!(t.decisions[1], Some(Decision::AbortMissingMessage));
        assert!(out.cheat_evidence[0]
            .iter()
            .any(|e| matches!(e, CheatEvidence::MissingMessage { step: 2, from: 3, .. })));
    }

    #[test]
    fn alpha_one_finishes_in_one_iteration() {
        for seed in 0..20 {
            let out = run_mechanism(secret(13, 7), &StrategyProfile::honest(3), &RunConfig::new(1.0), seed).unwrap();
            assert_eq!(out.iterations, 1);
            assert_eq!(out.total_steps, 5);
            assert_eq!(out.cause, TerminalCause::AllLearned);
            assert_eq!(out.recovered, vec![Some(7); 3]);
        }
    }

    #[test]
    fn cap_is_a_terminal_cause() {
        let cfg = RunConfig::new(0.01).with_cap(3);
        let out = run_mechanism(secret(13, 1), &StrategyProfile::honest(3), &cfg, 0).unwrap();
        assert!(out.iterations <= 3);
        if out.iterations == 3 && out.cause != TerminalCause::AllLearned {
            assert_eq!(out.cause, TerminalCause::IterationCapHit);
        }
        assert!(RunConfig::new(0.5).with_cap(0).validate().is_err());
        assert!(RunConfig::new(0.0).validate().is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = RunConfig::new(0.5).with_transcripts(TranscriptMode::Full);
        let a = run_mechanism(secret(101, 3), &StrategyProfile::honest(3), &cfg, 99).unwrap();
        let b = run_mechanism(secret(101, 3), &StrategyProfile::honest(3), &cfg, 99).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn layouts() {
        let l = Layout::m_of_n(3, 6).unwrap();
        assert_eq!(
            l.groups.iter().map(|g| g.players.clone()).collect::<Vec<_>>(),
            vec![vec![1, 2], vec![3, 4], vec![5, 6]]
        );
        assert_eq!(l.leaders(), [1, 3, 5]);
        assert!(l.groups.iter().all(|g| g.forwarders.is_empty()));
        assert_eq!(l.role(2), Role::Passive);

        let l = Layout::m_of_n(4, 5).unwrap();
        assert_eq!(l.leaders(), [1, 3, 5]);
        assert_eq!(l.groups[0].forwarders, vec![2]);
        assert_eq!(l.role(2), Role::Member { leader: 1 });

        assert!(Layout::m_of_n(2, 5).is_err());
        assert!(Layout::m_of_n(3, 3).is_err());
        assert!(matches!(Layout::two_of_n(2), Err(Error::Layout(_))));
        assert_eq!(Layout::two_of_n(4).unwrap().groups[0].forwarders, vec![2]);
        assert_eq!(Layout::for_threshold(3, 3).unwrap().kind, LayoutKind::ThreeOfThree);
    }
}
