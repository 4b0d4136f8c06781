//! Ground-truth validators for valid orderings, sequencings and t-weak
//! sequencings.
//!
//! Positions in witnesses and intervals are 1-based and inclusive, matching
//! the usual `p_1, …, p_n` indexing of partial sums.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zk::{GroundSet, Modulus};

/// A sequence of residues in `Z_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "OrderingJson", into = "OrderingJson")]
pub struct Ordering {
    modulus: Modulus,
    items: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct OrderingJson {
    k: u64,
    ordering: Vec<u64>,
}

impl TryFrom<OrderingJson> for Ordering {
    type Error = Error;

    fn try_from(j: OrderingJson) -> Result<Self> {
        Ordering::new(Modulus::new(j.k)?, j.ordering)
    }
}

impl From<Ordering> for OrderingJson {
    fn from(o: Ordering) -> Self {
        OrderingJson {
            k: o.modulus.k(),
            ordering: o.items,
        }
    }
}

impl Ordering {
    pub fn new(modulus: Modulus, items: Vec<u64>) -> Result<Self> {
        for &x in &items {
            modulus.check(x)?;
        }
        Ok(Ordering { modulus, items })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn into_items(self) -> Vec<u64> {
        self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn reversed(&self) -> Ordering {
        Ordering {
            modulus: self.modulus,
            items: self.items.iter().rev().copied().collect(),
        }
    }

    /// Is this a permutation of `a`?
    pub fn is_ordering_of(&self, a: &GroundSet) -> bool {
        if self.modulus != *a.modulus() || self.items.len() != a.len() {
            return false;
        }
        let mut v = self.items.clone();
        v.sort_unstable();
        v == a.elements()
    }
}

/// A 1-based inclusive position range `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(1 <= start && start <= end);
        Interval { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl From<[usize; 2]> for Interval {
    fn from([start, end]: [usize; 2]) -> Self {
        Interval { start, end }
    }
}

impl From<Interval> for [usize; 2] {
    fn from(i: Interval) -> Self {
        [i.start, i.end]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

pub fn partial_sums(o: &Ordering) -> Vec<u64> {
    let m = o.modulus;
    let mut acc = 0;
    o.items
        .iter()
        .map(|&x| {
            acc = m.add(acc, x);
            acc
        })
        .collect()
}

pub fn is_valid_ordering(o: &Ordering) -> bool {
    let mut sums = partial_sums(o);
    sums.sort_unstable();
    sums.windows(2).all(|w| w[0] != w[1])
}

pub fn is_sequencing(o: &Ordering) -> bool {
    let sums = partial_sums(o);
    let n = sums.len();
    is_valid_ordering(o) && sums.iter().take(n.saturating_sub(1)).all(|&s| s != 0)
}

/// For every `i ≠ j` with `1 ≤ |i-j| ≤ t`, `p_i` and `p_j` are nonzero and
/// distinct.
pub fn is_t_weak(o: &Ordering, t: usize) -> bool {
    let sums = partial_sums(o);
    let n = sums.len();
    (0..n).all(|i| {
        (i + 1..n.min(i + t + 1)).all(|j| sums[i] != 0 && sums[j] != 0 && sums[i] != sums[j])
    })
}

/// All zero-sum intervals of length at most `max_len` (`None` for no
/// bound), in lexicographic order. Uses `a_i + … + a_j = p_j - p_{i-1}`.
pub fn find_zero_intervals(o: &Ordering, max_len: Option<usize>) -> Vec<Interval> {
    let max_len = max_len.unwrap_or(usize::MAX);
    let mut prefix = vec![0u64];
    prefix.extend(partial_sums(o));
    let mut by_value: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, &v) in prefix.iter().enumerate() {
        by_value.entry(v).or_default().push(i);
    }
    let mut out = Vec::new();
    for idx in by_value.values() {
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                if j - i <= max_len {
                    out.push(Interval::new(i + 1, j));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Reference implementation of [`find_zero_intervals`] that sums every
/// interval directly.
pub fn find_zero_intervals_scan(o: &Ordering, max_len: Option<usize>) -> Vec<Interval> {
    let m = o.modulus;
    let n = o.len();
    let max_len = max_len.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for i in 0..n {
        let mut acc = 0;
        for j in i..n {
            if j - i + 1 > max_len {
                break;
            }
            acc = m.add(acc, o.items[j]);
            if acc == 0 {
                out.push(Interval::new(i + 1, j + 1));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "goal", content = "t")]
pub enum Goal {
    Valid,
    Sequencing,
    TWeak(usize),
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Valid => write!(f, "valid"),
            Goal::Sequencing => write!(f, "sequencing"),
            Goal::TWeak(t) => write!(f, "tweak({t})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Violation {
    /// `p_i = p_j` with `i < j`.
    RepeatedPartialSum { i: usize, j: usize, value: u64 },
    /// `p_i = 0` where the goal forbids it.
    ZeroPartialSum { i: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RepeatedPartialSum { i, j, value } => {
                write!(f, "p_{i} = p_{j} = {value}")
            }
            Violation::ZeroPartialSum { i } => write!(f, "p_{i} = 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub goal: Goal,
    pub passed: bool,
    pub witness: Option<Violation>,
    pub partial_sums: Vec<u64>,
}

/// Checks `o` against `goal` and reports the first violation, scanning
/// positions left to right.
pub fn check(o: &Ordering, goal: Goal) -> Verdict {
    let sums = partial_sums(o);
    let n = sums.len();
    let (window, zero_forbidden_upto) = match goal {
        Goal::Valid => (n, 0),
        Goal::Sequencing => (n, n.saturating_sub(1)),
        Goal::TWeak(t) => (t, if n >= 2 { n } else { 0 }),
    };
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut witness = None;
    for (idx, &v) in sums.iter().enumerate() {
        let i = idx + 1;
        if i <= zero_forbidden_upto && v == 0 {
            witness = Some(Violation::ZeroPartialSum { i });
            break;
        }
        if let Some(&prev) = seen.get(&v) {
            if i - prev <= window {
                witness = Some(Violation::RepeatedPartialSum {
                    i: prev,
                    j: i,
                    value: v,
                });
                break;
            }
        }
        seen.insert(v, i);
    }
    Verdict {
        goal,
        passed: witness.is_none(),
        witness,
        partial_sums: sums,
    }
}

pub fn satisfies(o: &Ordering, goal: Goal) -> bool {
    match goal {
        Goal::Valid => is_valid_ordering(o),
        Goal::Sequencing => is_sequencing(o),
        Goal::TWeak(t) => is_t_weak(o, t),
    }
}
