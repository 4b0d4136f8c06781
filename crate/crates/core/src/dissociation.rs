//! Dissociated sets, dimension, and bounded subset-sum enumeration.
//!
//! A set is dissociated when all of its `2^|D|` subset sums are distinct,
//! equivalently when no nontrivial `{-1,0,1}`-combination vanishes. The
//! checks here enumerate subset sums, which costs `2^|D|` instead of `3^|D|`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::zk::{GroundSet, Modulus};

/// Largest set `is_dissociated` accepts.
pub const DISSOCIATION_LIMIT: usize = 30;
/// Largest set `dimension` solves exactly.
pub const EXACT_DIMENSION_LIMIT: usize = 20;
/// Bound on `C(|T|, m)` for subset-sum enumeration.
pub const SUBSET_SUM_LIMIT: u128 = 10_000_000;

// Above this size the 2^n sum table gets too large; a meet-in-the-middle
// check over signed spans of the two halves is used instead.
const DIRECT_LIMIT: usize = 24;

/// A set verified to be dissociated at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DissociatedSet(GroundSet);

impl DissociatedSet {
    pub fn new(set: GroundSet) -> Result<Self> {
        if is_dissociated(&set)? {
            Ok(DissociatedSet(set))
        } else {
            Err(Error::InvalidParameter(format!(
                "{:?} is not dissociated in {}",
                set.elements(),
                set.modulus()
            )))
        }
    }

    pub fn as_set(&self) -> &GroundSet {
        &self.0
    }

    pub fn into_set(self) -> GroundSet {
        self.0
    }
}

/// Incrementally grown dissociated set with its sorted subset-sum table.
#[derive(Debug, Clone)]
pub struct DissociatedBuilder {
    modulus: Modulus,
    elements: Vec<u64>,
    sums: Vec<u64>,
}

impl DissociatedBuilder {
    pub fn new(modulus: Modulus) -> Self {
        DissociatedBuilder {
            modulus,
            elements: Vec::new(),
            sums: vec![0],
        }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Would `self ∪ {d}` still be dissociated?
    pub fn admits(&self, d: u64) -> bool {
        self.shifted_if_disjoint(d).is_some()
    }

    /// Adds `d` if the result stays dissociated.
    pub fn try_push(&mut self, d: u64) -> bool {
        match self.shifted_if_disjoint(d) {
            Some(shifted) => {
                let mut merged = Vec::with_capacity(self.sums.len() * 2);
                let (mut i, mut j) = (0, 0);
                while i < self.sums.len() && j < shifted.len() {
                    if self.sums[i] < shifted[j] {
                        merged.push(self.sums[i]);
                        i += 1;
                    } else {
                        merged.push(shifted[j]);
                        j += 1;
                    }
                }
                merged.extend_from_slice(&self.sums[i..]);
                merged.extend_from_slice(&shifted[j..]);
                self.sums = merged;
                self.elements.push(d);
                true
            }
            None => false,
        }
    }

    fn shifted_if_disjoint(&self, d: u64) -> Option<Vec<u64>> {
        let m = &self.modulus;
        let d = d % m.k();
        if d == 0 || self.elements.contains(&d) {
            return None;
        }
        let mut shifted: Vec<u64> = self.sums.iter().map(|&s| m.add(s, d)).collect();
        shifted.sort_unstable();
        if shifted.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        let (mut i, mut j) = (0, 0);
        while i < self.sums.len() && j < shifted.len() {
            match self.sums[i].cmp(&shifted[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return None,
            }
        }
        Some(shifted)
    }
}

pub fn is_dissociated(d: &GroundSet) -> Result<bool> {
    is_dissociated_slice(d.modulus(), d.elements())
}

/// Dissociativity of a list of residues; repeated entries make it false.
pub fn is_dissociated_slice(m: &Modulus, elements: &[u64]) -> Result<bool> {
    let n = elements.len();
    if n > DISSOCIATION_LIMIT {
        return Err(Error::size_limit("is_dissociated", n as u128, DISSOCIATION_LIMIT as u128));
    }
    if n <= DIRECT_LIMIT {
        let mut b = DissociatedBuilder::new(*m);
        return Ok(elements.iter().all(|&x| b.try_push(x)));
    }
    let (left, right) = elements.split_at(n / 2);
    if !is_dissociated_slice(m, left)? || !is_dissociated_slice(m, right)? {
        return Ok(false);
    }
    // Both halves are dissociated, so a vanishing combination must use both:
    // some nonzero value lies in Span(left) and in -Span(right) = Span(right).
    let a = signed_span(m, left);
    let b = signed_span(m, right);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i] != 0 {
                    return Ok(false);
                }
                i += 1;
                j += 1;
            }
        }
    }
    Ok(true)
}

/// All values `Σ ε_i x_i` with `ε ∈ {-1,0,1}`, sorted and deduplicated.
fn signed_span(m: &Modulus, xs: &[u64]) -> Vec<u64> {
    let mut span = vec![0u64];
    for &x in xs {
        let nx = m.neg(x);
        let mut next = Vec::with_capacity(span.len() * 3);
        for &s in &span {
            next.push(s);
            next.push(m.add(s, x));
            next.push(m.add(s, nx));
        }
        span = next;
    }
    span.sort_unstable();
    span.dedup();
    span
}

/// Exact `dim(B)`: the size of the largest dissociated subset.
///
/// Branch and bound over include/exclude decisions; a branch is abandoned as
/// soon as the chosen elements stop being dissociated, since every superset
/// of a non-dissociated set is non-dissociated.
pub fn dimension(b: &GroundSet) -> Result<usize> {
    let n = b.len();
    if n > EXACT_DIMENSION_LIMIT {
        return Err(Error::size_limit("dimension", n as u128, EXACT_DIMENSION_LIMIT as u128));
    }
    let elements = scan_order(b);
    let mut best = 0usize;
    let mut builder = DissociatedBuilder::new(*b.modulus());
    dimension_search(&elements, 0, &mut builder, &mut best);
    Ok(best)
}

fn dimension_search(elements: &[u64], i: usize, cur: &mut DissociatedBuilder, best: &mut usize) {
    if cur.len() > *best {
        *best = cur.len();
    }
    if i == elements.len() || cur.len() + (elements.len() - i) <= *best {
        return;
    }
    let saved = cur.clone();
    if cur.try_push(elements[i]) {
        dimension_search(elements, i + 1, cur, best);
        *cur = saved;
    }
    dimension_search(elements, i + 1, cur, best);
}

/// Elements of `b` in ascending `|signed_rep|`, ties by residue value.
pub fn scan_order(b: &GroundSet) -> Vec<u64> {
    let m = b.modulus();
    let mut v = b.elements().to_vec();
    v.sort_by_key(|&x| (m.norm(x), x));
    v
}

/// Greedy dissociated subset of `b` in [`scan_order`], stopping at
/// `target_size` elements. Without truncation the result is maximal: every
/// element of `b` lies in the span of the chosen ones.
pub fn greedy_max_dissociated(b: &GroundSet, target_size: usize) -> GroundSet {
    let chosen = greedy_in_order(b.modulus(), &scan_order(b), target_size);
    GroundSet::from_reduced(*b.modulus(), chosen)
}

/// Greedy extension over an explicit scan order; returns elements in the
/// order they were accepted.
pub fn greedy_in_order(m: &Modulus, order: &[u64], target_size: usize) -> Vec<u64> {
    let mut b = DissociatedBuilder::new(*m);
    for &x in order {
        if b.len() >= target_size {
            break;
        }
        b.try_push(x);
    }
    b.elements
}

pub fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Subset sums grouped by subset size: entry `m` is `Σ_{=m}(T)` for
/// `0 ≤ m ≤ max_m`.
pub fn subset_sums_by_size(t: &GroundSet, max_m: usize) -> Result<Vec<BTreeSet<u64>>> {
    let n = t.len() as u64;
    for m in 0..=max_m as u64 {
        let c = binomial(n, m);
        if c > SUBSET_SUM_LIMIT {
            return Err(Error::size_limit("subset sums", c, SUBSET_SUM_LIMIT));
        }
    }
    let md = t.modulus();
    let mut layers: Vec<BTreeSet<u64>> = vec![BTreeSet::new(); max_m + 1];
    layers[0].insert(0);
    for (i, x) in t.iter().enumerate() {
        for size in (1..=max_m.min(i + 1)).rev() {
            let add: Vec<u64> = layers[size - 1].iter().map(|&s| md.add(s, x)).collect();
            layers[size].extend(add);
        }
    }
    Ok(layers)
}

/// `Σ_{=M}(T)`: sums of the `M`-element subsets of `T`.
pub fn subset_sums_exact(t: &GroundSet, m: usize) -> Result<BTreeSet<u64>> {
    if m > t.len() {
        return Ok(BTreeSet::new());
    }
    Ok(subset_sums_by_size(t, m)?.pop().unwrap_or_default())
}

/// `Σ_{≤M}(T)`: sums of subsets of `T` with at most `M` elements.
pub fn subset_sums_upto(t: &GroundSet, m: usize) -> Result<BTreeSet<u64>> {
    let m = m.min(t.len());
    Ok(subset_sums_by_size(t, m)?.into_iter().flatten().collect())
}
