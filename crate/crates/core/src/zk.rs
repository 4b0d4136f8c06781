//! Residue arithmetic in `Z_k`.
//!
//! Residues are plain `u64` values in `[0, k)`; a [`Modulus`] carries `k`
//! together with its least prime divisor and performs all arithmetic with
//! 128-bit intermediates.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest prime dividing `k`, by trial division.
pub fn least_prime_divisor(k: u64) -> Result<u64> {
    if k < 2 {
        return Err(Error::InvalidModulus { k });
    }
    if k.is_multiple_of(2) {
        return Ok(2);
    }
    let mut q = 3u64;
    while (q as u128) * (q as u128) <= k as u128 {
        if k.is_multiple_of(q) {
            return Ok(q);
        }
        q += 2;
    }
    Ok(k)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulus {
    k: u64,
    p: u64,
}

impl Modulus {
    pub fn new(k: u64) -> Result<Self> {
        let p = least_prime_divisor(k)?;
        Ok(Modulus { k, p })
    }

    #[inline]
    pub fn k(&self) -> u64 {
        self.k
    }

    /// Least prime divisor of `k`.
    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn check(&self, x: u64) -> Result<u64> {
        if x < self.k {
            Ok(x)
        } else {
            Err(Error::ResidueOutOfRange { value: x, k: self.k })
        }
    }

    #[inline]
    pub fn reduce(&self, x: i128) -> u64 {
        x.rem_euclid(self.k as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.k as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.k - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.k as u128) as u64
    }

    pub fn sum<I: IntoIterator<Item = u64>>(&self, xs: I) -> u64 {
        xs.into_iter().fold(0, |acc, x| self.add(acc, x))
    }

    /// The representative of `x` in `(-k/2, k/2]`.
    #[inline]
    pub fn signed_rep(&self, x: u64) -> i64 {
        let x = x % self.k;
        if 2 * (x as u128) <= self.k as u128 {
            x as i64
        } else {
            -((self.k - x) as i64)
        }
    }

    /// Distance from `x` to 0 on the cycle, `|signed_rep(x)|`.
    #[inline]
    pub fn norm(&self, x: u64) -> u64 {
        self.signed_rep(x).unsigned_abs()
    }

    pub fn is_unit(&self, x: u64) -> bool {
        gcd(x % self.k, self.k) == 1
    }

    pub fn inverse(&self, x: u64) -> Result<u64> {
        let (mut r0, mut r1) = (self.k as i128, (x % self.k) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        if r0 != 1 {
            return Err(Error::NonUnitDilation { lambda: x, k: self.k });
        }
        Ok(self.reduce(s0))
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}", self.k)
    }
}

/// A finite set of residues, stored sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroundSetJson", into = "GroundSetJson")]
pub struct GroundSet {
    modulus: Modulus,
    elements: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct GroundSetJson {
    k: u64,
    elements: Vec<u64>,
}

impl TryFrom<GroundSetJson> for GroundSet {
    type Error = Error;

    fn try_from(j: GroundSetJson) -> Result<Self> {
        GroundSet::new(Modulus::new(j.k)?, j.elements)
    }
}

impl From<GroundSet> for GroundSetJson {
    fn from(s: GroundSet) -> Self {
        GroundSetJson {
            k: s.modulus.k,
            elements: s.elements,
        }
    }
}

impl GroundSet {
    /// Rejects out-of-range values and duplicates. Zero is allowed here; use
    /// [`GroundSet::require_nonzero`] for inputs that must avoid it.
    pub fn new(modulus: Modulus, elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut v: Vec<u64> = elements.into_iter().collect();
        for &x in &v {
            modulus.check(x)?;
        }
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateElement { value: w[0] });
        }
        Ok(GroundSet { modulus, elements: v })
    }

    /// Builds the set of distinct reductions of `values` mod `k`.
    pub fn from_reduced(modulus: Modulus, values: impl IntoIterator<Item = u64>) -> Self {
        let set: BTreeSet<u64> = values.into_iter().map(|x| x % modulus.k).collect();
        GroundSet {
            modulus,
            elements: set.into_iter().collect(),
        }
    }

    pub fn empty(modulus: Modulus) -> Self {
        GroundSet {
            modulus,
            elements: Vec::new(),
        }
    }

    pub fn require_nonzero(&self) -> Result<()> {
        if self.contains(0) {
            Err(Error::ZeroElement)
        } else {
            Ok(())
        }
    }

    #[inline]
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    #[inline]
    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<u64> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elements.iter().copied()
    }

    pub fn sum(&self) -> u64 {
        self.modulus.sum(self.iter())
    }

    /// `{λ·s : s ∈ S}`; `λ` must be a unit.
    pub fn dilate(&self, lambda: u64) -> Result<GroundSet> {
        let m = &self.modulus;
        if !m.is_unit(lambda) {
            return Err(Error::NonUnitDilation {
                lambda,
                k: m.k(),
            });
        }
        let mut v: Vec<u64> = self.iter().map(|s| m.mul(s, lambda)).collect();
        v.sort_unstable();
        Ok(GroundSet {
            modulus: *m,
            elements: v,
        })
    }

    pub fn negate(&self) -> GroundSet {
        GroundSet::from_reduced(self.modulus, self.iter().map(|x| self.modulus.neg(x)))
    }

    pub fn union(&self, other: &GroundSet) -> GroundSet {
        GroundSet::from_reduced(self.modulus, self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &GroundSet) -> GroundSet {
        GroundSet {
            modulus: self.modulus,
            elements: self.iter().filter(|&x| !other.contains(x)).collect(),
        }
    }
}
