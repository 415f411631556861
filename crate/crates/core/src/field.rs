//! Arithmetic in prime fields GF(p) with p < 2^31.
//!
//! Elements carry their modulus so that mixing elements of different fields
//! is caught. The arithmetic operators panic on a modulus mismatch; the
//! fallible entry points (`Field::element`, share issuance) check up front.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mersenne prime 2^31 - 1, the default modulus.
pub const DEFAULT_PRIME: u64 = (1 << 31) - 1;

/// Largest modulus accepted (exclusive). Products of two residues stay below 2^62.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Trial-division primality test.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// A prime field GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Field {
    p: u64,
}

impl Field {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MAX_MODULUS || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(Field { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Element with the given canonical value; rejects `value >= p`.
    pub fn element(&self, value: u64) -> Result<FieldElement> {
        if value >= self.p {
            return Err(Error::ValueOutOfRange { value, modulus: self.p });
        }
        Ok(FieldElement { value, modulus: self.p })
    }

    /// Element congruent to `value` mod p.
    pub fn reduce(&self, value: u64) -> FieldElement {
        FieldElement { value: value % self.p, modulus: self.p }
    }

    /// Reduces a signed integer into the field.
    pub fn from_i64(&self, value: i64) -> FieldElement {
        let p = self.p as i64;
        FieldElement { value: value.rem_euclid(p) as u64, modulus: self.p }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { value: 0, modulus: self.p }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { value: 1 % self.p, modulus: self.p }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement { value: rng.gen_range(0..self.p), modulus: self.p }
    }

    /// All elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.p).map(move |value| FieldElement { value, modulus: self.p })
    }
}

impl Default for Field {
    fn default() -> Self {
        Field { p: DEFAULT_PRIME }
    }
}

impl TryFrom<u64> for Field {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        Field::new(p)
    }
}

impl From<Field> for u64 {
    fn from(f: Field) -> u64 {
        f.p
    }
}

/// An element of GF(p), stored as its canonical representative in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn field(&self) -> Field {
        Field { p: self.modulus }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(self, mut exp: u64) -> FieldElement {
        let mut base = self;
        let mut acc = self.field().one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(self) -> Option<FieldElement> {
        if self.value == 0 {
            return None;
        }
        // extended Euclid over i64; p < 2^31 keeps all intermediates small
        let (mut r0, mut r1) = (self.modulus as i64, self.value as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(self.field().from_i64(t0))
    }

    fn check(&self, other: &FieldElement) {
        assert_eq!(
            self.modulus, other.modulus,
            "field element modulus mismatch: {} vs {}",
            self.modulus, other.modulus
        );
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: FieldElement) -> FieldElement {
        self.check(&rhs);
        let s = self.value + rhs.value;
        let value = if s >= self.modulus { s - self.modulus } else { s };
        FieldElement { value, modulus: self.modulus }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;

    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.check(&rhs);
        let value =
            if self.value >= rhs.value { self.value - rhs.value } else { self.value + self.modulus - rhs.value };
        FieldElement { value, modulus: self.modulus }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.check(&rhs);
        FieldElement { value: self.value * rhs.value % self.modulus, modulus: self.modulus }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        let value = if self.value == 0 { 0 } else { self.modulus - self.value };
        FieldElement { value, modulus: self.modulus }
    }
}

impl std::iter::Sum for FieldElement {
    fn sum<I: Iterator<Item = FieldElement>>(mut iter: I) -> FieldElement {
        let first = iter.next().expect("sum of an empty field element iterator");
        iter.fold(first, |a, b| a + b)
    }
}
