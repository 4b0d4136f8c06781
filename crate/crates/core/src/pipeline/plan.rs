//! Block plans: random 4-splittings of the dissociated blocks, their fixed
//! arrangement, and the local conditions checked on it.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dissociation::subset_sums_by_size;
use crate::error::{Error, Result};
use crate::pn::initial_segment_sums;
use crate::structure::Decomposition;
use crate::verify::Interval;
use crate::zk::Modulus;

/// One quarter `T_j = D_source^(quarter)` together with its current
/// ordering. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanBlock {
    pub source: usize,
    pub quarter: usize,
    pub elements: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub k: u64,
    /// `T_1, …, T_u` in arrangement order.
    pub blocks: Vec<PlanBlock>,
    /// `τ_j = Σ T_j`, refreshed after every change.
    pub taus: Vec<u64>,
    /// The window `K` of the acceptability and boundary conditions.
    pub k_param: usize,
    /// Lengths of the `reverse(p)` prefix and the `n` suffix that surround
    /// the blocks in the final sequence.
    pub p_len: usize,
    pub n_len: usize,
    pub seed: u64,
}

/// Balanced quarter sizes, larger quarters first.
pub fn quarter_sizes(n: usize) -> [usize; 4] {
    let (base, extra) = (n / 4, n % 4);
    std::array::from_fn(|q| base + usize::from(q < extra))
}

/// Position of `D_source^(quarter)` in the arrangement
/// `D_1^(1), D_1^(2), …, D_s^(1), D_s^(2), D_1^(3), D_1^(4), …, D_s^(3), D_s^(4)`
/// (0-based result, 1-based arguments).
pub fn slot(s: usize, source: usize, quarter: usize) -> usize {
    let pair = 2 * (source - 1) + (quarter - 1) % 2;
    if quarter <= 2 {
        pair
    } else {
        2 * s + pair
    }
}

/// The `(source, quarter)` tags of the arrangement for `s` sources.
pub fn expected_pattern(s: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(4 * s);
    for half in [(1, 2), (3, 4)] {
        for j in 1..=s {
            v.push((j, half.0));
            v.push((j, half.1));
        }
    }
    v
}

impl BlockPlan {
    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.k).expect("plan modulus is valid")
    }

    pub fn u(&self) -> usize {
        self.blocks.len()
    }

    pub fn s(&self) -> usize {
        self.blocks.len() / 4
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_elements(&self) -> usize {
        self.blocks.iter().map(|b| b.elements.len()).sum()
    }

    /// Length of the full sequence `reverse(p), t_1, …, t_u, n`.
    pub fn total_len(&self) -> usize {
        self.p_len + self.block_elements() + self.n_len
    }

    /// 1-based inclusive positions of `T_j` (`j` 0-based).
    pub fn block_range(&self, j: usize) -> (usize, usize) {
        let start = self.p_len + self.blocks[..j].iter().map(|b| b.elements.len()).sum::<usize>() + 1;
        (start, start + self.blocks[j].elements.len() - 1)
    }

    pub fn pattern(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.source, b.quarter)).collect()
    }

    pub fn follows_pattern(&self) -> bool {
        self.pattern() == expected_pattern(self.s())
    }

    /// Each source's quarters partition it with sizes differing by at most 1,
    /// every quarter is nonempty, and `τ` matches the blocks.
    pub fn is_consistent_with(&self, d: &Decomposition) -> bool {
        if self.u() != 4 * d.s() || !self.follows_pattern() {
            return false;
        }
        let m = self.modulus();
        let taus_ok = self
            .blocks
            .iter()
            .zip(&self.taus)
            .all(|(b, &t)| m.sum(b.elements.iter().copied()) == t);
        let parts_ok = d.blocks.iter().enumerate().all(|(l, set)| {
            let quarters: Vec<&Vec<u64>> = (1..=4)
                .map(|q| &self.blocks[slot(self.s(), l + 1, q)].elements)
                .collect();
            let mut all: Vec<u64> = quarters.iter().flat_map(|q| q.iter().copied()).collect();
            all.sort_unstable();
            let sizes: Vec<usize> = quarters.iter().map(|q| q.len()).collect();
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            all == set.elements() && hi - lo <= 1 && *lo >= 1
        });
        taus_ok && parts_ok
    }

    /// Concatenation of the four quarters of `source`, in quarter order.
    pub fn source_sequence(&self, source: usize) -> Vec<u64> {
        (1..=4)
            .flat_map(|q| self.blocks[slot(self.s(), source, q)].elements.clone())
            .collect()
    }

    /// Re-splits `source` along a fresh uniform permutation.
    pub fn resplit<R: Rng + ?Sized>(&mut self, source: usize, rng: &mut R) {
        let mut all = self.source_sequence(source);
        all.shuffle(rng);
        let s = self.s();
        let mut rest = &all[..];
        for (q, size) in quarter_sizes(all.len()).into_iter().enumerate() {
            let (head, tail) = rest.split_at(size);
            self.blocks[slot(s, source, q + 1)].elements = head.to_vec();
            rest = tail;
        }
        self.refresh_taus();
    }

    /// Draws a fresh uniform ordering of `T_j` (`j` 0-based).
    pub fn reorder<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) {
        self.blocks[j].elements.shuffle(rng);
    }

    fn refresh_taus(&mut self) {
        let m = self.modulus();
        self.taus = self.blocks.iter().map(|b| m.sum(b.elements.iter().copied())).collect();
    }

    /// The adjacent pairs `(T_{2g}, T_{2g+1})` between different halves of
    /// the arrangement, as 0-based index pairs. The junction of
    /// `(T_{2g-1}, T_{2g})` joins two quarters of one dissociated block and
    /// needs no condition.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let u = self.u();
        (1..u / 2).map(|g| (2 * g - 1, 2 * g)).collect()
    }

    /// Pair group of `T_j` (0-based), if any.
    pub fn group_of(&self, j: usize) -> Option<usize> {
        if j == 0 || j + 1 >= self.u() {
            None
        } else {
            Some(j.div_ceil(2) - 1)
        }
    }

    pub fn block_orders(&self) -> Vec<Vec<u64>> {
        self.blocks.iter().map(|b| b.elements.clone()).collect()
    }
}

/// Uniform 4-splittings of every block of `d`, arranged in the fixed order.
/// Each quarter inherits the order of the permutation it was cut from.
pub fn split_blocks<R: Rng + ?Sized>(d: &Decomposition, k_param: usize, seed: u64, rng: &mut R) -> Result<BlockPlan> {
    let s = d.s();
    if let Some(small) = d.blocks.iter().find(|b| b.len() < 4) {
        return Err(Error::InvalidParameter(format!(
            "block of size {} cannot be split into four nonempty quarters",
            small.len()
        )));
    }
    let mut plan = BlockPlan {
        k: d.modulus.k(),
        blocks: expected_pattern(s)
            .into_iter()
            .map(|(source, quarter)| PlanBlock {
                source,
                quarter,
                elements: Vec::new(),
            })
            .collect(),
        taus: Vec::new(),
        k_param,
        p_len: d.positive.len(),
        n_len: d.negative.len(),
        seed,
    };
    for (l, set) in d.blocks.iter().enumerate() {
        // seed the slots so that resplit sees the whole source
        plan.blocks[slot(s, l + 1, 1)].elements = set.elements().to_vec();
        plan.resplit(l + 1, rng);
    }
    plan.refresh_taus();
    Ok(plan)
}

/// Per-position target sets for `p` and `n`.
pub type YTargets = Vec<BTreeSet<u64>>;

/// `(Y⁺_j, Y⁻_j)` for `1 ≤ j ≤ K`:
/// `Y⁺_j = -Σ_{=j}(D_1) ∪ (-δ + Σ_{=j}(D_s))`,
/// `Y⁻_j = -Σ_{=j}(D_s) ∪ (-δ + Σ_{=j}(D_1))`.
pub fn build_y_targets(d: &Decomposition, k_param: usize) -> Result<(YTargets, YTargets)> {
    let (Some(first), Some(last)) = (d.first_block(), d.last_block()) else {
        return Err(Error::InvalidParameter("targets need at least one block".into()));
    };
    let m = d.modulus;
    let sums_first = subset_sums_by_size(first, k_param.min(first.len()))?;
    let sums_last = subset_sums_by_size(last, k_param.min(last.len()))?;
    let empty = BTreeSet::new();
    let layer = |v: &Vec<BTreeSet<u64>>, j: usize| v.get(j).unwrap_or(&empty).clone();
    let build = |neg: &BTreeSet<u64>, shifted: &BTreeSet<u64>| -> BTreeSet<u64> {
        neg.iter()
            .map(|&x| m.neg(x))
            .chain(shifted.iter().map(|&x| m.sub(x, d.delta)))
            .collect()
    };
    let mut plus = Vec::with_capacity(k_param);
    let mut minus = Vec::with_capacity(k_param);
    for j in 1..=k_param {
        let (f, l) = (layer(&sums_first, j), layer(&sums_last, j));
        plus.push(build(&f, &l));
        minus.push(build(&l, &f));
    }
    Ok((plus, minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    First,
    Last,
}

/// Forbidden partial sums for the first `K` prefix sums of `t_1`
/// (`-IS(p) ∪ (δ + IS(n))`) or the first `K` suffix sums of `t_u`
/// (`-IS(n) ∪ (δ + IS(p))`).
pub fn forbidden_set(m: &Modulus, end: End, p_order: &[u64], n_order: &[u64], delta: u64) -> HashSet<u64> {
    let (neg, shifted) = match end {
        End::First => (p_order, n_order),
        End::Last => (n_order, p_order),
    };
    initial_segment_sums(m, neg)
        .into_iter()
        .map(|x| m.neg(x))
        .chain(initial_segment_sums(m, shifted).into_iter().map(|x| m.add(x, delta)))
        .collect()
}

/// The `K` running sums of `t_block` read from the relevant end avoid
/// `forbidden`.
pub fn avoids(m: &Modulus, t_block: &[u64], end: End, k_param: usize, forbidden: &HashSet<u64>) -> bool {
    let k_param = k_param.min(t_block.len());
    let mut acc = 0;
    let step = |acc: &mut u64, x: u64| {
        *acc = m.add(*acc, x);
        !forbidden.contains(acc)
    };
    match end {
        End::First => t_block[..k_param].iter().all(|&x| step(&mut acc, x)),
        End::Last => t_block[t_block.len() - k_param..].iter().rev().all(|&x| step(&mut acc, x)),
    }
}

pub fn is_acceptable(
    m: &Modulus,
    t_block: &[u64],
    end: End,
    k_param: usize,
    p_order: &[u64],
    n_order: &[u64],
    delta: u64,
) -> bool {
    avoids(m, t_block, end, k_param, &forbidden_set(m, end, p_order, n_order, delta))
}

/// No interval made of up to `K` trailing elements of `left` and up to `K`
/// leading elements of `right`, not both empty, sums to zero.
pub fn is_boundary_safe(m: &Modulus, left: &[u64], right: &[u64], k_param: usize) -> bool {
    let a = k_param.min(left.len());
    let b = k_param.min(right.len());
    let mut suffixes = Vec::with_capacity(a + 1);
    let mut acc = 0;
    suffixes.push(0);
    for &x in left.iter().rev().take(a) {
        acc = m.add(acc, x);
        suffixes.push(acc);
    }
    let mut prefixes = Vec::with_capacity(b + 1);
    acc = 0;
    prefixes.push(0);
    for &x in right.iter().take(b) {
        acc = m.add(acc, x);
        prefixes.push(acc);
    }
    suffixes.iter().enumerate().all(|(i, &sl)| {
        prefixes
            .iter()
            .enumerate()
            .all(|(j, &pr)| (i == 0 && j == 0) || m.add(sl, pr) != 0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalType {
    TypeI,
    TypeII,
}

/// Type II iff some `T_j` has between `K` and `|T_j| - K` of its positions
/// in `interval`.
pub fn classify_interval(interval: Interval, plan: &BlockPlan) -> IntervalType {
    let k = plan.k_param;
    let hit = (0..plan.u()).any(|j| {
        let (lo, hi) = plan.block_range(j);
        let len = plan.blocks[j].elements.len();
        let overlap = (hi.min(interval.end) + 1).saturating_sub(lo.max(interval.start));
        k <= overlap && overlap + k <= len
    });
    if hit {
        IntervalType::TypeII
    } else {
        IntervalType::TypeI
    }
}

/// Independent randomness of a plan: the splitting permutation of a source
/// block (which also fixes the orders of `t_1` and `t_u`), and the joint
/// ordering of a boundary pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    Split(usize),
    Order(usize),
}

/// Sources the contents or order of `T_j` (0-based) depend on. A paired
/// block's ordering is sampled conditionally on its partner's contents, so
/// the partner's split is included.
pub fn block_sources(plan: &BlockPlan, j: usize) -> Vec<Source> {
    let mut v = vec![Source::Split(plan.blocks[j].source)];
    if let Some(g) = plan.group_of(j) {
        let (a, b) = plan.pairs()[g];
        let partner = if a == j { b } else { a };
        v.push(Source::Order(g));
        v.push(Source::Split(plan.blocks[partner].source));
    }
    v
}

/// 0-based indices of the blocks an interval touches.
pub fn touched_blocks(plan: &BlockPlan, interval: Interval) -> Vec<usize> {
    (0..plan.u())
        .filter(|&j| {
            let (lo, hi) = plan.block_range(j);
            lo <= interval.end && interval.start <= hi
        })
        .collect()
}

pub fn interval_sources(plan: &BlockPlan, interval: Interval) -> BTreeSet<Source> {
    touched_blocks(plan, interval)
        .into_iter()
        .flat_map(|j| block_sources(plan, j))
        .collect()
}

/// Proper intervals of length at most `t` (clamped to `total_len - 1`).
fn proper_intervals(n: usize, t: usize) -> impl Iterator<Item = Interval> {
    let max_len = t.min(n.saturating_sub(1));
    (1..=n).flat_map(move |start| {
        (start..=n)
            .take_while(move |&end| end + 1 - start <= max_len)
            .map(move |end| Interval::new(start, end))
    })
}

/// Number of intervals of length `1..=max_len` inside a gap of `g` positions.
fn intervals_in_gap(g: usize, max_len: usize) -> u64 {
    (1..=g.min(max_len)).map(|l| (g - l + 1) as u64).sum()
}

/// Largest number of other proper intervals of length at most `t` sharing a
/// randomness source with a single such interval.
///
/// Two intervals share a source iff the second touches a block whose
/// sources meet those of the first, so the count is all intervals minus the
/// ones fitting in the gaps between such blocks.
pub fn lll_dependency_degree(plan: &BlockPlan, t: usize) -> u64 {
    let n = plan.total_len();
    let max_len = t.min(n.saturating_sub(1));
    let all = intervals_in_gap(n, max_len);
    let sources: Vec<Vec<Source>> = (0..plan.u()).map(|j| block_sources(plan, j)).collect();
    let ranges: Vec<(usize, usize)> = (0..plan.u()).map(|j| plan.block_range(j)).collect();
    proper_intervals(n, t)
        .map(|i| {
            let mine = interval_sources(plan, i);
            if mine.is_empty() {
                return 0;
            }
            let mut covered: Vec<(usize, usize)> = (0..plan.u())
                .filter(|&j| sources[j].iter().any(|s| mine.contains(s)))
                .map(|j| ranges[j])
                .collect();
            covered.sort_unstable();
            let mut avoiding = 0;
            let mut next = 1;
            for (lo, hi) in covered {
                if lo > next {
                    avoiding += intervals_in_gap(lo - next, max_len);
                }
                next = next.max(hi + 1);
            }
            avoiding += intervals_in_gap((n + 1).saturating_sub(next), max_len);
            // the interval itself shares its own sources
            all - avoiding - 1
        })
        .max()
        .unwrap_or(0)
}

/// Reference for [`lll_dependency_degree`] comparing every pair of
/// intervals.
pub fn lll_dependency_degree_exhaustive(plan: &BlockPlan, t: usize) -> u64 {
    let n = plan.total_len();
    let intervals: Vec<(Interval, BTreeSet<Source>)> = proper_intervals(n, t)
        .map(|i| (i, interval_sources(plan, i)))
        .collect();
    intervals
        .iter()
        .map(|(i, si)| {
            intervals
                .iter()
                .filter(|(j, sj)| j != i && !si.is_disjoint(sj))
                .count() as u64
        })
        .max()
        .unwrap_or(0)
}
