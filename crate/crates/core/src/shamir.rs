//! Threshold sharing over GF(p) with issuer-authenticated shares.
//!
//! The issuer holds a symmetric key and tags every share it hands out with
//! HMAC-SHA256 over `(epoch, x, y)`. Players check tags through the same
//! issuer handle, so the trust model is "issuer is honest and online": a
//! player cannot substitute a false share for a true one without the tag
//! failing.
//!
//! Shares of a player can additionally be split into additive subshares
//! (the values sum to the parent `y` mod p); the issuer tags those too.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use hmac::{Hmac, Mac};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

type HmacSha256 = Hmac<Sha256>;

const SHARE_DOMAIN: u8 = 0x01;
const SUBSHARE_DOMAIN: u8 = 0x02;

/// A 256-bit authentication tag.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tag(pub [u8; 32]);

impl Tag {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Tag> {
        let bytes = hex::decode(s).map_err(|e| Error::Io(format!("bad tag hex: {e}")))?;
        let arr: [u8; 32] = bytes.try_into().map_err(|_| Error::Io("tag must be 32 bytes".into()))?;
        Ok(Tag(arr))
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tag({}..)", &self.to_hex()[..8])
    }
}

/// One player's point `(x, f(x))` of the sharing issued in `epoch`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Share {
    pub holder: usize,
    pub x: FieldElement,
    pub y: FieldElement,
    pub epoch: u64,
    pub tag: Tag,
}

/// Serialized form of a share: `{epoch, holder, x, y, tag}` with the tag hex-encoded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareRecord {
    pub epoch: u64,
    pub holder: usize,
    pub x: u64,
    pub y: u64,
    pub tag: String,
}

impl Share {
    pub fn record(&self) -> ShareRecord {
        ShareRecord {
            epoch: self.epoch,
            holder: self.holder,
            x: self.x.value(),
            y: self.y.value(),
            tag: self.tag.to_hex(),
        }
    }

    pub fn from_record(record: &ShareRecord, field: Field) -> Result<Share> {
        Ok(Share {
            holder: record.holder,
            x: field.element(record.x)?,
            y: field.element(record.y)?,
            epoch: record.epoch,
            tag: Tag::from_hex(&record.tag)?,
        })
    }
}

impl Serialize for Share {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.record().serialize(s)
    }
}

/// One of the `count` additive pieces of a parent share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subshare {
    pub parent_holder: usize,
    /// 1-based position among the siblings.
    pub index: usize,
    /// Number of siblings; all of them are needed to recover the parent.
    pub count: usize,
    pub value: FieldElement,
    pub epoch: u64,
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubshareRecord {
    pub epoch: u64,
    pub parent_holder: usize,
    pub index: usize,
    pub count: usize,
    pub value: u64,
    pub tag: String,
}

impl Serialize for Subshare {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubshareRecord {
            epoch: self.epoch,
            parent_holder: self.parent_holder,
            index: self.index,
            count: self.count,
            value: self.value.value(),
            tag: self.tag.to_hex(),
        }
        .serialize(s)
    }
}

/// The trusted dealer: issues tagged shares and verifies tags.
#[derive(Clone)]
pub struct Issuer {
    field: Field,
    /// HMAC state with the key already absorbed.
    keyed: HmacSha256,
}

impl fmt::Debug for Issuer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Issuer").field("field", &self.field).finish_non_exhaustive()
    }
}

impl Issuer {
    pub fn new(field: Field, key: [u8; 32]) -> Self {
        let keyed = HmacSha256::new_from_slice(&key).expect("HMAC accepts any key length");
        Issuer { field, keyed }
    }

    /// Issuer with a key drawn from `rng`.
    pub fn random<R: RngCore + ?Sized>(field: Field, rng: &mut R) -> Self {
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Issuer::new(field, key)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    fn mac(&self) -> HmacSha256 {
        self.keyed.clone()
    }

    fn share_tag(&self, epoch: u64, x: FieldElement, y: FieldElement) -> Tag {
        let mut mac = self.mac();
        mac.update(&[SHARE_DOMAIN]);
        mac.update(&x.modulus().to_be_bytes());
        mac.update(&epoch.to_be_bytes());
        mac.update(&x.value().to_be_bytes());
        mac.update(&y.value().to_be_bytes());
        Tag(mac.finalize().into_bytes().into())
    }

    fn subshare_tag(&self, sub: &Subshare) -> Tag {
        let mut mac = self.mac();
        mac.update(&[SUBSHARE_DOMAIN]);
        mac.update(&sub.value.modulus().to_be_bytes());
        mac.update(&sub.epoch.to_be_bytes());
        mac.update(&(sub.parent_holder as u64).to_be_bytes());
        mac.update(&(sub.index as u64).to_be_bytes());
        mac.update(&(sub.count as u64).to_be_bytes());
        mac.update(&sub.value.value().to_be_bytes());
        Tag(mac.finalize().into_bytes().into())
    }

    fn check_params(&self, secret: FieldElement, m: usize, n: usize) -> Result<()> {
        let p = self.field.modulus();
        if secret.modulus() != p {
            return Err(Error::ModulusMismatch { expected: p, actual: secret.modulus() });
        }
        if m < 1 || m > n || n as u64 >= p {
            return Err(Error::ThresholdOutOfRange { m, n, p });
        }
        Ok(())
    }

    /// Shares of a fresh uniformly random polynomial of degree `m - 1` with
    /// constant term `secret`, one per holder `1..=n`.
    pub fn issue_shares<R: Rng + ?Sized>(
        &self,
        secret: FieldElement,
        m: usize,
        n: usize,
        epoch: u64,
        rng: &mut R,
    ) -> Result<Vec<Share>> {
        self.check_params(secret, m, n)?;
        let coefficients: Vec<FieldElement> = (1..m).map(|_| self.field.random(rng)).collect();
        self.issue_with_coefficients(secret, &coefficients, n, epoch)
    }

    /// Shares of `secret + c1 x + c2 x^2 + ...` for explicit coefficients.
    /// The threshold is `coefficients.len() + 1`.
    pub fn issue_with_coefficients(
        &self,
        secret: FieldElement,
        coefficients: &[FieldElement],
        n: usize,
        epoch: u64,
    ) -> Result<Vec<Share>> {
        self.check_params(secret, coefficients.len() + 1, n)?;
        for c in coefficients {
            if c.modulus() != self.field.modulus() {
                return Err(Error::ModulusMismatch { expected: self.field.modulus(), actual: c.modulus() });
            }
        }
        Ok((1..=n)
            .map(|holder| {
                let x = self.field.reduce(holder as u64);
                let y = coefficients.iter().rev().fold(self.field.zero(), |acc, &c| acc * x + c) * x + secret;
                Share { holder, x, y, epoch, tag: self.share_tag(epoch, x, y) }
            })
            .collect())
    }

    pub fn verify_tag(&self, share: &Share) -> bool {
        share.x.modulus() == self.field.modulus()
            && share.y.modulus() == self.field.modulus()
            && share.x.value() == share.holder as u64 % self.field.modulus()
            && self.share_tag(share.epoch, share.x, share.y) == share.tag
    }

    pub fn verify_subshare(&self, sub: &Subshare) -> bool {
        sub.value.modulus() == self.field.modulus() && self.subshare_tag(sub) == sub.tag
    }

    /// Lagrange reconstruction of `f(0)` from the first `m` shares in
    /// increasing x-order.
    pub fn reconstruct(&self, shares: &[Share], m: usize) -> Result<FieldElement> {
        if shares.len() < m || m == 0 {
            return Err(Error::NotEnoughShares { needed: m.max(1), got: shares.len() });
        }
        let epoch = shares[0].epoch;
        let mut seen = BTreeSet::new();
        for s in shares {
            if s.epoch != epoch {
                return Err(Error::EpochMismatch(epoch, s.epoch));
            }
            if s.x.modulus() != self.field.modulus() {
                return Err(Error::ModulusMismatch { expected: self.field.modulus(), actual: s.x.modulus() });
            }
            if !seen.insert(s.x.value()) {
                return Err(Error::DuplicateShare(s.x.value()));
            }
            if !self.verify_tag(s) {
                return Err(Error::BadTag { holder: s.holder });
            }
        }
        let mut sorted: Vec<&Share> = shares.iter().collect();
        sorted.sort_by_key(|s| s.x.value());
        let points: Vec<(FieldElement, FieldElement)> = sorted.iter().take(m).map(|s| (s.x, s.y)).collect();
        Ok(interpolate_at_zero(&points))
    }

    /// Splits `share.y` into `count` uniformly random addends.
    pub fn split_subshares<R: Rng + ?Sized>(&self, share: &Share, count: usize, rng: &mut R) -> Result<Vec<Subshare>> {
        if count < 2 {
            return Err(Error::SubshareCount(count));
        }
        let leading: Vec<FieldElement> = (1..count).map(|_| self.field.random(rng)).collect();
        self.split_subshares_with(share, &leading)
    }

    /// Splits with the first `count - 1` addends given; the last one is the complement.
    pub fn split_subshares_with(&self, share: &Share, leading: &[FieldElement]) -> Result<Vec<Subshare>> {
        let count = leading.len() + 1;
        if count < 2 {
            return Err(Error::SubshareCount(count));
        }
        if !self.verify_tag(share) {
            return Err(Error::BadTag { holder: share.holder });
        }
        let rest = leading.iter().fold(share.y, |acc, &v| acc - v);
        Ok(leading
            .iter()
            .copied()
            .chain(std::iter::once(rest))
            .enumerate()
            .map(|(i, value)| {
                let mut sub = Subshare {
                    parent_holder: share.holder,
                    index: i + 1,
                    count,
                    value,
                    epoch: share.epoch,
                    tag: Tag([0; 32]),
                };
                sub.tag = self.subshare_tag(&sub);
                sub
            })
            .collect())
    }

    /// Rebuilds the parent share from a complete, valid set of its subshares.
    pub fn join_subshares(&self, subs: &[Subshare]) -> Option<Share> {
        let first = subs.first()?;
        let mut by_index = BTreeMap::new();
        for s in subs {
            if s.parent_holder != first.parent_holder
                || s.epoch != first.epoch
                || s.count != first.count
                || !self.verify_subshare(s)
            {
                return None;
            }
            by_index.insert(s.index, s.value);
        }
        if by_index.len() != first.count {
            return None;
        }
        let y: FieldElement = by_index.into_values().sum();
        let x = self.field.reduce(first.parent_holder as u64);
        Some(Share { holder: first.parent_holder, x, y, epoch: first.epoch, tag: self.share_tag(first.epoch, x, y) })
    }
}

/// Value at zero of the unique polynomial of degree `< points.len()` through `points`.
pub fn interpolate_at_zero(points: &[(FieldElement, FieldElement)]) -> FieldElement {
    let field = points.first().expect("interpolation needs at least one point").0.field();
    points
        .iter()
        .enumerate()
        .map(|(i, &(xi, yi))| {
            let (num, den) = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold((field.one(), field.one()), |(num, den), (_, &(xj, _))| (num * xj, den * (xj - xi)));
            yi * num * den.inverse().expect("distinct abscissae")
        })
        .sum()
}

/// Posterior-uniformity result for coalitions of one size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HidingRow {
    pub subset_size: usize,
    pub subsets_checked: usize,
    pub uniform: bool,
}

/// Largest polynomial space `hiding_check` will enumerate.
pub const HIDING_LIMIT: u64 = 5_000_000;

/// Exhaustively checks that every coalition of fewer than `m` holders learns
/// nothing: over all `p^m` polynomials, each observable tuple of share values
/// is produced equally often by every secret.
pub fn hiding_check(field: Field, m: usize, n: usize) -> Result<Vec<HidingRow>> {
    let p = field.modulus();
    if m < 1 || m > n || n as u64 >= p {
        return Err(Error::ThresholdOutOfRange { m, n, p });
    }
    let space = p.checked_pow(m as u32).filter(|&s| s <= HIDING_LIMIT);
    let Some(space) = space else {
        return Err(Error::config("prime", format!("GF({p})^{m} is too large to enumerate")));
    };

    // evals[poly][holder - 1]; poly index encodes (secret, a1, .., a_{m-1}) in base p
    let mut secrets = Vec::with_capacity(space as usize);
    let mut evals = Vec::with_capacity(space as usize);
    for code in 0..space {
        let mut digits = Vec::with_capacity(m);
        let mut c = code;
        for _ in 0..m {
            digits.push(field.reduce(c % p));
            c /= p;
        }
        let row: Vec<u64> = (1..=n as u64)
            .map(|x| {
                let x = field.reduce(x);
                digits.iter().rev().fold(field.zero(), |acc, &d| acc * x + d).value()
            })
            .collect();
        secrets.push(digits[0].value());
        evals.push(row);
    }

    let mut rows = Vec::new();
    for size in 0..m {
        let mut checked = 0;
        let mut uniform = true;
        for subset in subsets(n, size) {
            checked += 1;
            let mut counts: BTreeMap<Vec<u64>, BTreeMap<u64, u64>> = BTreeMap::new();
            for (row, &s) in evals.iter().zip(&secrets) {
                let view: Vec<u64> = subset.iter().map(|&h| row[h]).collect();
                *counts.entry(view).or_default().entry(s).or_default() += 1;
            }
            uniform &= counts.values().all(|per_secret| {
                per_secret.len() as u64 == p && {
                    let first = *per_secret.values().next().unwrap();
                    per_secret.values().all(|&c| c == first)
                }
            });
        }
        rows.push(HidingRow { subset_size: size, subsets_checked: checked, uniform });
    }
    Ok(rows)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
