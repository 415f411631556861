//! Payoffs as functions of who learned the secret.
//!
//! A table maps every learned-vector to a payoff for every player. The
//! preference axioms checked by [`validate_utilities`]:
//!
//! * U1: payoff depends only on the vector (holds by construction);
//! * U2: learning beats not learning, whatever the others do;
//! * U3: with one's own bit fixed, fewer other learners is strictly better.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{RunOutcome, TerminalCause};

/// Bit `i - 1` is set iff player `i` learned. Written as a string of `0`/`1`,
/// player 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoVector(Vec<bool>);

impl InfoVector {
    pub fn new(bits: Vec<bool>) -> Self {
        InfoVector(bits)
    }

    pub fn none(n: usize) -> Self {
        InfoVector(vec![false; n])
    }

    pub fn everyone(n: usize) -> Self {
        InfoVector(vec![true; n])
    }

    pub fn only(n: usize, player: usize) -> Self {
        let mut v = vec![false; n];
        v[player - 1] = true;
        InfoVector(v)
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        InfoVector((0..n).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().enumerate().map(|(i, &b)| usize::from(b) << i).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn learned(&self, player: usize) -> bool {
        self.0[player - 1]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn all(&self) -> bool {
        self.0.iter().all(|&b| b)
    }

    pub fn is_partial(&self) -> bool {
        let c = self.count();
        c > 0 && c < self.0.len()
    }
}

impl fmt::Display for InfoVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for InfoVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::config("utilities", format!("bad info vector `{s}`"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(InfoVector)
    }
}

impl Serialize for InfoVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The three payoffs that matter for the coin mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarUtilities {
    pub u_only: f64,
    pub u_all: f64,
    pub u_none: f64,
}

impl ScalarUtilities {
    pub const CANONICAL: ScalarUtilities = ScalarUtilities { u_only: 2.0, u_all: 1.0, u_none: 0.0 };
}

/// Dense payoff table: `payoffs[player - 1][vector.index()]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    n: usize,
    payoffs: Vec<Vec<f64>>,
}

impl UtilityTable {
    /// Table from a payoff function `(player, vector) -> payoff`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, &InfoVector) -> f64) -> Self {
        let payoffs =
            (1..=n).map(|i| (0..1usize << n).map(|idx| f(i, &InfoVector::from_index(n, idx))).collect()).collect();
        UtilityTable { n, payoffs }
    }

    /// Expands scalar aliases into a full table. For player `i` with `k`
    /// other learners, the payoff is `u_only - k * step` if `i` learned and
    /// `u_none - k * step` if not, where `step = (u_only - u_all) / (n - 1)`.
    /// This hits `u_only`, `u_all` and `u_none` exactly and satisfies U1 to U3
    /// whenever `u_only > u_all > u_none`.
    pub fn from_scalars(n: usize, per_player: &[ScalarUtilities]) -> Result<Self> {
        if n < 2 || per_player.len() != n {
            return Err(Error::config("utilities", format!("need {n} scalar entries for n = {n} >= 2")));
        }
        for (i, s) in per_player.iter().enumerate() {
            if !(s.u_only > s.u_all && s.u_all > s.u_none) {
                return Err(Error::DegenerateUtilities(i + 1));
            }
        }
        Ok(UtilityTable::from_fn(n, |i, v| {
            let s = per_player[i - 1];
            let step = (s.u_only - s.u_all) / (n as f64 - 1.0);
            let others = (v.count() - usize::from(v.learned(i))) as f64;
            if v.learned(i) {
                s.u_only - others * step
            } else {
                s.u_none - others * step
            }
        }))
    }

    pub fn uniform(n: usize, s: ScalarUtilities) -> Result<Self> {
        UtilityTable::from_scalars(n, &vec![s; n])
    }

    /// `u_only = 2, u_all = 1, u_none = 0` for every player.
    pub fn canonical(n: usize) -> Self {
        UtilityTable::uniform(n, ScalarUtilities::CANONICAL).expect("canonical scalars are valid")
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn payoff(&self, player: usize, v: &InfoVector) -> f64 {
        self.payoffs[player - 1][v.index()]
    }

    pub fn set(&mut self, player: usize, v: &InfoVector, payoff: f64) {
        self.payoffs[player - 1][v.index()] = payoff;
    }

    pub fn scalars(&self, player: usize) -> ScalarUtilities {
        ScalarUtilities {
            u_only: self.payoff(player, &InfoVector::only(self.n, player)),
            u_all: self.payoff(player, &InfoVector::everyone(self.n)),
            u_none: self.payoff(player, &InfoVector::none(self.n)),
        }
    }

    pub fn to_document(&self) -> UtilityDocument {
        UtilityDocument::Explicit {
            players: self.n,
            payoffs: self
                .payoffs
                .iter()
                .map(|row| {
                    row.iter().enumerate().map(|(i, &u)| (InfoVector::from_index(self.n, i).to_string(), u)).collect()
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &UtilityDocument) -> Result<Self> {
        match doc {
            UtilityDocument::Scalars { players, scalars } => UtilityTable::uniform(*players, *scalars),
            UtilityDocument::PerPlayerScalars { players, per_player } => {
                UtilityTable::from_scalars(*players, per_player)
            }
            UtilityDocument::Explicit { players, payoffs } => {
                let n = *players;
                if payoffs.len() != n {
                    return Err(Error::config("utilities", format!("{} payoff maps for {n} players", payoffs.len())));
                }
                let mut table = UtilityTable { n, payoffs: vec![vec![f64::NAN; 1 << n]; n] };
                for (i, map) in payoffs.iter().enumerate() {
                    for (key, &u) in map {
                        let v: InfoVector = key.parse()?;
                        if v.len() != n {
                            return Err(Error::config("utilities", format!("vector `{key}` has wrong length")));
                        }
                        table.set(i + 1, &v, u);
                    }
                    for idx in 0..1usize << n {
                        if table.payoffs[i][idx].is_nan() {
                            return Err(Error::MissingUtility {
                                player: i + 1,
                                vector: InfoVector::from_index(n, idx).to_string(),
                            });
                        }
                    }
                }
                Ok(table)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: UtilityDocument = serde_json::from_str(text).map_err(|e| Error::config("utilities", e.to_string()))?;
        UtilityTable::from_document(&doc)
    }
}

/// On-disk utility table. Either a full map per player keyed by vector
/// strings (`"110"`: players 1 and 2 learned), or scalar aliases expanded by
/// [`UtilityTable::from_scalars`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UtilityDocument {
    Explicit {
        players: usize,
        payoffs: Vec<BTreeMap<String, f64>>,
    },
    PerPlayerScalars {
        players: usize,
        per_player: Vec<ScalarUtilities>,
    },
    Scalars {
        players: usize,
        #[serde(flatten)]
        scalars: ScalarUtilities,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    U2,
    U3,
}

/// `better` should pay `player` strictly more than `worse`, but does not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub player: usize,
    pub axiom: Axiom,
    pub better: InfoVector,
    pub worse: InfoVector,
    pub better_payoff: f64,
    pub worse_payoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidUtilities(format!(
                "{} violation(s), first: player {} {:?} needs u({}) > u({})",
                self.violations.len(),
                v.player,
                v.axiom,
                v.better,
                v.worse
            ))),
        }
    }
}

/// Lists every violated ordered pair. U2 is checked over all pairs that
/// differ in the player's own bit; U3 over adjacent pairs (one other bit
/// raised), which implies the general form by transitivity. NaN payoffs
/// count as violations.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn validate_utilities(table: &UtilityTable) -> ValidationReport {
    let n = table.players();
    let vectors: Vec<InfoVector> = (0..1usize << n).map(|i| InfoVector::from_index(n, i)).collect();
    let mut violations = Vec::new();
    for i in 1..=n {
        let me = 1usize << (i - 1);
        let mut push = |axiom, better: &InfoVector, worse: &InfoVector| {
            let (bu, wu) = (table.payoff(i, better), table.payoff(i, worse));
            if !(bu > wu) {
                violations.push(Violation {
                    player: i,
                    axiom,
                    better: better.clone(),
                    worse: worse.clone(),
                    better_payoff: bu,
                    worse_payoff: wu,
                });
            }
        };
        for with in vectors.iter().filter(|v| v.index() & me != 0) {
            for without in vectors.iter().filter(|v| v.index() & me == 0) {
                push(Axiom::U2, with, without);
            }
        }
        for v in &vectors {
            for j in (1..=n).filter(|&j| j != i) {
                let bit = 1usize << (j - 1);
                if v.index() & bit == 0 {
                    push(Axiom::U3, v, &vectors[v.index() | bit]);
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Payoff of `player` for a finished run. Runs cut off by the iteration cap
/// count as nobody learning.
pub fn utility_of_run(outcome: &RunOutcome, table: &UtilityTable, player: usize) -> f64 {
    if outcome.cause == TerminalCause::IterationCapHit {
        return table.payoff(player, &InfoVector::none(outcome.info.len()));
    }
    table.payoff(player, &outcome.info)
}
