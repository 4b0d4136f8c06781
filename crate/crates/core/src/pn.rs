//! Orderings of the small positive and negative parts `P` and `N` such that
//! `reverse(p), δ, n` is a sequencing and the initial segment sums of `p`
//! and `n` meet the target sets `Y⁺_j`, `Y⁻_j` sparingly.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zk::{GroundSet, Modulus};

/// Default node budget of one backtracking pass.
pub const NODE_BUDGET: u64 = 10_000;

/// `{b_1 + … + b_j : 0 ≤ j ≤ |b|}`.
pub fn initial_segment_sums(m: &Modulus, b: &[u64]) -> BTreeSet<u64> {
    initial_segment_sums_t(m, b, b.len())
}

/// `{b_1 + … + b_j : 0 ≤ j ≤ t}`, with `t` clamped to `|b|`.
pub fn initial_segment_sums_t(m: &Modulus, b: &[u64], t: usize) -> BTreeSet<u64> {
    let mut out = BTreeSet::from([0]);
    let mut acc = 0;
    for &x in b.iter().take(t) {
        acc = m.add(acc, x);
        out.insert(acc);
    }
    out
}

/// `min_L ⌈|Y_j|/L⌉ + L + 4 + 4·Σ_{i<j} |Y_i|` over `L ∈ {1, …, |Y_j|+1}`,
/// with `j` 1-based.
pub fn proposition_budget(sizes: &[usize], j: usize) -> u64 {
    assert!(j >= 1 && j <= sizes.len(), "target index {j} out of 1..={}", sizes.len());
    let y = sizes[j - 1] as u64;
    let earlier: u64 = sizes[..j - 1].iter().map(|&s| s as u64).sum();
    let best = (1..=y + 1).map(|l| y.div_ceil(l) + l).min().unwrap_or(1);
    best + 4 + 4 * earlier
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PnConfig {
    pub node_budget: u64,
}

impl Default for PnConfig {
    fn default() -> Self {
        PnConfig {
            node_budget: NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PNOrderings {
    pub k: u64,
    pub p_order: Vec<u64>,
    pub n_order: Vec<u64>,
    /// `None` when there are no dissociated blocks.
    pub delta: Option<u64>,
    pub targets_plus: Vec<BTreeSet<u64>>,
    pub targets_minus: Vec<BTreeSet<u64>>,
    pub achieved_plus: Vec<usize>,
    pub achieved_minus: Vec<usize>,
    pub budget_plus: Vec<u64>,
    pub budget_minus: Vec<u64>,
    pub within_budget: bool,
    /// Solved on the negated instance because `δ` had a negative
    /// representative.
    pub negated: bool,
    pub in_regime: bool,
    pub nodes: u64,
}

impl PNOrderings {
    /// `reverse(p), δ, n`.
    pub fn sequence(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.p_order.iter().rev().copied().collect();
        v.extend(self.delta);
        v.extend(&self.n_order);
        v
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.k).expect("validated at construction")
    }
}

fn counts(m: &Modulus, order: &[u64], targets: &[BTreeSet<u64>]) -> Vec<usize> {
    let is = initial_segment_sums(m, order);
    targets.iter().map(|y| is.intersection(y).count()).collect()
}

fn budgets(targets: &[BTreeSet<u64>]) -> Vec<u64> {
    let sizes: Vec<usize> = targets.iter().map(|y| y.len()).collect();
    (1..=sizes.len()).map(|j| proposition_budget(&sizes, j)).collect()
}

fn negate_all(m: &Modulus, ys: &[BTreeSet<u64>]) -> Vec<BTreeSet<u64>> {
    ys.iter().map(|y| y.iter().map(|&x| m.neg(x)).collect()).collect()
}

/// Finds orderings `p` of `P` and `n` of `N` with `reverse(p), δ, n` a
/// sequencing (`δ` omitted when `None`).
///
/// A first backtracking pass prunes branches exceeding the target budgets; if
/// it fails, a second pass drops the budgets and keeps only the sequencing
/// constraint. Either pass explores at most `cfg.node_budget` nodes.
pub fn order_pn(
    p: &GroundSet,
    n: &GroundSet,
    delta: Option<u64>,
    y_plus: &[BTreeSet<u64>],
    y_minus: &[BTreeSet<u64>],
    cfg: &PnConfig,
) -> Result<PNOrderings> {
    let m = *p.modulus();
    if *n.modulus() != m {
        return Err(Error::ModulusMismatch {
            expected: m.k(),
            found: n.modulus().k(),
        });
    }
    if let Some(d) = delta {
        m.check(d)?;
    }
    let overlap = p.elements().iter().any(|&x| n.contains(x));
    if overlap {
        return Err(Error::InvalidParameter("P and N must be disjoint".into()));
    }

    let negated = delta.is_some_and(|d| m.signed_rep(d) < 0);
    let (pp, nn, dd, yp, ym) = if negated {
        (
            n.negate(),
            p.negate(),
            delta.map(|d| m.neg(d)),
            negate_all(&m, y_minus),
            negate_all(&m, y_plus),
        )
    } else {
        (p.clone(), n.clone(), delta, y_plus.to_vec(), y_minus.to_vec())
    };

    let in_regime = regime(&m, &pp, &nn, dd);
    let mut search = Search::new(m, &pp, &nn, dd, &yp, &ym, cfg.node_budget);
    let found = search.run(true) || search.run(false);
    if !found {
        return Err(Error::SearchExhausted {
            nodes: search.total_nodes,
        });
    }
    let (mut p_order, mut n_order) = (search.best_p.clone(), search.best_n.clone());
    if negated {
        // reverse(p'), δ', n' negated and reversed is reverse(-n'), δ, -p'.
        let p_new: Vec<u64> = n_order.iter().map(|&x| m.neg(x)).collect();
        let n_new: Vec<u64> = p_order.iter().map(|&x| m.neg(x)).collect();
        p_order = p_new;
        n_order = n_new;
    }

    let achieved_plus = counts(&m, &p_order, y_plus);
    let achieved_minus = counts(&m, &n_order, y_minus);
    let budget_plus = budgets(y_plus);
    let budget_minus = budgets(y_minus);
    let within_budget = achieved_plus.iter().zip(&budget_plus).all(|(&a, &b)| a as u64 <= b)
        && achieved_minus.iter().zip(&budget_minus).all(|(&a, &b)| a as u64 <= b);
    Ok(PNOrderings {
        k: m.k(),
        p_order,
        n_order,
        delta,
        targets_plus: y_plus.to_vec(),
        targets_minus: y_minus.to_vec(),
        achieved_plus,
        achieved_minus,
        budget_plus,
        budget_minus,
        within_budget,
        negated,
        in_regime,
        nodes: search.total_nodes,
    })
}

/// Interval hypotheses in the `δ > 0` orientation together with both sum
/// guards.
fn regime(m: &Modulus, p: &GroundSet, n: &GroundSet, delta: Option<u64>) -> bool {
    let k = m.k() as u128;
    let pn = (p.len() + n.len()).max(1) as u128;
    let small = |x: u64| 4 * pn * (m.norm(x) as u128) < k;
    let p_ok = p.iter().all(|x| m.signed_rep(x) > 0 && small(x));
    let n_ok = n.iter().all(|x| m.signed_rep(x) < 0 && small(x));
    let d_ok = match delta {
        None => true,
        Some(d) => {
            m.signed_rep(d) > 0
                && 4 * (m.norm(d) as u128) < k
                && (p.is_empty() || d != m.neg(n.sum()))
                && (n.is_empty() || d != m.neg(p.sum()))
        }
    };
    p_ok && n_ok && d_ok
}

struct Search<'a> {
    m: Modulus,
    p: Vec<u64>,
    n: Vec<u64>,
    delta: Option<u64>,
    sum_p: u64,
    offset_n: u64,
    y_plus: &'a [BTreeSet<u64>],
    y_minus: &'a [BTreeSet<u64>],
    budget_plus: Vec<u64>,
    budget_minus: Vec<u64>,
    node_budget: u64,
    total_nodes: u64,
    best_p: Vec<u64>,
    best_n: Vec<u64>,
}

struct State {
    seen: HashSet<u64>,
    used_p: Vec<bool>,
    used_n: Vec<bool>,
    rev_p: Vec<u64>,
    n_order: Vec<u64>,
    hits_plus: Vec<u64>,
    hits_minus: Vec<u64>,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn new(
        m: Modulus,
        p: &GroundSet,
        n: &GroundSet,
        delta: Option<u64>,
        y_plus: &'a [BTreeSet<u64>],
        y_minus: &'a [BTreeSet<u64>],
        node_budget: u64,
    ) -> Self {
        let by_magnitude = |s: &GroundSet| {
            let mut v = s.elements().to_vec();
            v.sort_by_key(|&x| (m.norm(x), x));
            v
        };
        let sum_p = p.sum();
        Search {
            m,
            p: by_magnitude(p),
            n: by_magnitude(n),
            delta,
            sum_p,
            offset_n: m.add(sum_p, delta.unwrap_or(0)),
            y_plus,
            y_minus,
            budget_plus: budgets(y_plus),
            budget_minus: budgets(y_minus),
            node_budget,
            total_nodes: 0,
            best_p: Vec::new(),
            best_n: Vec::new(),
        }
    }

    fn total_len(&self) -> usize {
        self.p.len() + self.n.len() + usize::from(self.delta.is_some())
    }

    fn run(&mut self, use_budget: bool) -> bool {
        let mut st = State {
            seen: HashSet::new(),
            used_p: vec![false; self.p.len()],
            used_n: vec![false; self.n.len()],
            rev_p: Vec::new(),
            n_order: Vec::new(),
            hits_plus: vec![0; self.y_plus.len()],
            hits_minus: vec![0; self.y_minus.len()],
            nodes: 0,
        };
        // The empty prefix of p and of n always lie in IS(p) and IS(n).
        for x in BTreeSet::from([self.sum_p, 0]) {
            Self::bump(&mut st.hits_plus, self.y_plus, x, 1);
        }
        Self::bump(&mut st.hits_minus, self.y_minus, 0, 1);
        if use_budget && !self.under_budget(&st) {
            return false;
        }
        let ok = self.dfs_p(&mut st, 0, use_budget);
        self.total_nodes += st.nodes;
        if ok {
            self.best_p = st.rev_p.iter().rev().copied().collect();
            self.best_n = st.n_order.clone();
        }
        ok
    }

    fn bump(hits: &mut [u64], ys: &[BTreeSet<u64>], x: u64, by: i64) {
        for (h, y) in hits.iter_mut().zip(ys) {
            if y.contains(&x) {
                *h = (*h as i64 + by) as u64;
            }
        }
    }

    fn under_budget(&self, st: &State) -> bool {
        st.hits_plus.iter().zip(&self.budget_plus).all(|(h, b)| h <= b)
            && st.hits_minus.iter().zip(&self.budget_minus).all(|(h, b)| h <= b)
    }

    /// Accepts partial sum `s` at 1-based position `pos`.
    fn fresh(&self, st: &State, s: u64, pos: usize) -> bool {
        !st.seen.contains(&s) && (s != 0 || pos == self.total_len())
    }

    fn dfs_p(&self, st: &mut State, cur: u64, use_budget: bool) -> bool {
        if st.nodes >= self.node_budget {
            return false;
        }
        st.nodes += 1;
        let placed = st.rev_p.len();
        if placed == self.p.len() {
            return self.place_delta(st, cur, use_budget);
        }
        let hits_target = |x: u64| {
            let q = self.m.add(cur, x);
            // q is a prefix of reverse(p); sum_p - q is the matching prefix of p
            let is = self.m.sub(self.sum_p, q);
            self.y_plus.iter().any(|y| y.contains(&is))
        };
        let mut cands: Vec<usize> = (0..self.p.len()).filter(|&i| !st.used_p[i]).collect();
        cands.sort_by_key(|&i| hits_target(self.p[i]));
        for i in cands {
            let x = self.p[i];
            let q = self.m.add(cur, x);
            if !self.fresh(st, q, placed + 1) {
                continue;
            }
            // the full reverse(p) corresponds to the empty prefix of p, already counted
            let is = self.m.sub(self.sum_p, q);
            let counted = placed + 1 < self.p.len();
            if counted {
                Self::bump(&mut st.hits_plus, self.y_plus, is, 1);
            }
            if !use_budget || self.under_budget(st) {
                st.used_p[i] = true;
                st.rev_p.push(x);
                st.seen.insert(q);
                if self.dfs_p(st, q, use_budget) {
                    return true;
                }
                st.seen.remove(&q);
                st.rev_p.pop();
                st.used_p[i] = false;
            }
            if counted {
                Self::bump(&mut st.hits_plus, self.y_plus, is, -1);
            }
        }
        false
    }

    fn place_delta(&self, st: &mut State, cur: u64, use_budget: bool) -> bool {
        match self.delta {
            None => self.dfs_n(st, cur, use_budget),
            Some(d) => {
                let s = self.m.add(cur, d);
                let pos = self.p.len() + 1;
                if !self.fresh(st, s, pos) {
                    return false;
                }
                st.seen.insert(s);
                if self.dfs_n(st, s, use_budget) {
                    return true;
                }
                st.seen.remove(&s);
                false
            }
        }
    }

    fn dfs_n(&self, st: &mut State, cur: u64, use_budget: bool) -> bool {
        if st.nodes >= self.node_budget {
            return false;
        }
        st.nodes += 1;
        let placed = st.n_order.len();
        if placed == self.n.len() {
            return true;
        }
        let base = self.total_len() - self.n.len();
        let hits_target = |x: u64| {
            let is = self.m.sub(self.m.add(cur, x), self.offset_n);
            self.y_minus.iter().any(|y| y.contains(&is))
        };
        let mut cands: Vec<usize> = (0..self.n.len()).filter(|&i| !st.used_n[i]).collect();
        cands.sort_by_key(|&i| hits_target(self.n[i]));
        for i in cands {
            let x = self.n[i];
            let s = self.m.add(cur, x);
            if !self.fresh(st, s, base + placed + 1) {
                continue;
            }
            let is = self.m.sub(s, self.offset_n);
            Self::bump(&mut st.hits_minus, self.y_minus, is, 1);
            if !use_budget || self.under_budget(st) {
                st.used_n[i] = true;
                st.n_order.push(x);
                st.seen.insert(s);
                if self.dfs_n(st, s, use_budget) {
                    return true;
                }
                st.seen.remove(&s);
                st.n_order.pop();
                st.used_n[i] = false;
            }
            Self::bump(&mut st.hits_minus, self.y_minus, is, -1);
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{is_sequencing, Ordering};
    use proptest::prelude::*;

    fn set(k: u64, xs: &[u64]) -> GroundSet {
        GroundSet::new(Modulus::new(k).unwrap(), xs.iter().copied()).unwrap()
    }

    fn assert_sequencing(r: &PNOrderings) {
        let o = Ordering::new(r.modulus(), r.sequence()).unwrap();
        assert!(is_sequencing(&o), "{:?} is not a sequencing", r.sequence());
    }

    #[test]
    fn initial_segment_examples() {
        let m = Modulus::new(7).unwrap();
        assert_eq!(initial_segment_sums(&m, &[1, 3, 2]), BTreeSet::from([0, 1, 4, 6]));
        assert_eq!(initial_segment_sums(&m, &[]), BTreeSet::from([0]));
        assert_eq!(initial_segment_sums(&m, &[2, 5]), BTreeSet::from([0, 2]));
        assert_eq!(initial_segment_sums_t(&m, &[1, 3, 2], 1), BTreeSet::from([0, 1]));
        assert_eq!(initial_segment_sums_t(&m, &[1, 3, 2], 0), BTreeSet::from([0]));
        assert_eq!(
            initial_segment_sums_t(&m, &[1, 3, 2], 5),
            initial_segment_sums(&m, &[1, 3, 2])
        );
    }

    #[test]
    fn budget_examples() {
        assert_eq!(proposition_budget(&[9], 1), 10);
        assert_eq!(proposition_budget(&[0], 1), 5);
        assert_eq!(proposition_budget(&[4, 9], 2), 26);
    }

    #[test]
    fn order_examples() {
        let cfg = PnConfig::default();
        let r = order_pn(&set(101, &[1, 2]), &set(101, &[99]), Some(5), &[], &[], &cfg).unwrap();
        assert_sequencing(&r);
        assert!(r.in_regime && !r.negated);

        let r = order_pn(&set(101, &[1]), &set(101, &[]), Some(3), &[], &[], &cfg).unwrap();
        assert_eq!(r.sequence(), vec![1, 3]);

        let y = vec![BTreeSet::from([3])];
        let r = order_pn(&set(101, &[1, 2, 3]), &set(101, &[]), Some(10), &y, &[], &cfg).unwrap();
        assert_sequencing(&r);
        assert_eq!(r.achieved_plus, vec![0]);
        let is = initial_segment_sums(&r.modulus(), &r.p_order);
        assert!(!is.contains(&3));
    }

    #[test]
    fn three_avoiding_orders_exist_exhaustively() {
        // orderings of {1,2,3} whose initial segment sums avoid 3
        let m = Modulus::new(101).unwrap();
        let perms = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
        let good: Vec<_> = perms
            .iter()
            .filter(|p| !initial_segment_sums(&m, &p[..]).contains(&3))
            .collect();
        assert_eq!(good, vec![&[1, 3, 2], &[2, 3, 1]]);
    }

    #[test]
    fn empty_instance_is_trivial() {
        let r = order_pn(&set(11, &[]), &set(11, &[]), None, &[], &[], &PnConfig::default()).unwrap();
        assert!(r.sequence().is_empty());
    }

    #[test]
    fn negative_delta_is_reflected() {
        let r = order_pn(&set(101, &[1, 2]), &set(101, &[98, 100]), Some(95), &[], &[], &PnConfig::default())
            .unwrap();
        assert!(r.negated);
        assert_sequencing(&r);
        let mut p = r.p_order.clone();
        p.sort_unstable();
        assert_eq!(p, vec![1, 2]);
        let mut n = r.n_order.clone();
        n.sort_unstable();
        assert_eq!(n, vec![98, 100]);
    }

    #[test]
    fn impossible_instance_reports_exhaustion() {
        // delta = -sum(P) forces a zero partial sum before N
        let err = order_pn(&set(101, &[1, 2]), &set(101, &[99]), Some(98), &[], &[], &PnConfig::default());
        assert!(matches!(err, Err(Error::SearchExhausted { .. })));
    }

    fn arb_instance() -> impl Strategy<Value = (GroundSet, GroundSet, u64, Vec<BTreeSet<u64>>)> {
        let k = 100_003u64;
        (
            proptest::collection::btree_set(1u64..500, 0..6),
            proptest::collection::btree_set(1u64..500, 0..6),
            1u64..5000,
            proptest::collection::vec(proptest::collection::btree_set(0u64..3000, 0..8), 0..3),
        )
            .prop_map(move |(p, n, d, y)| {
                let n: Vec<u64> = n.into_iter().filter(|x| !p.contains(x)).map(|x| k - x).collect();
                (set(k, &p.into_iter().collect::<Vec<_>>()), set(k, &n), d, y)
            })
    }

    proptest! {
        #[test]
        fn in_regime_outputs_are_sequencings_within_budget((p, n, d, y) in arb_instance()) {
            let m = *p.modulus();
            let guards = (p.is_empty() || d != m.neg(n.sum())) && (n.is_empty() || d != m.neg(p.sum()));
            prop_assume!(guards);
            let r = order_pn(&p, &n, Some(d), &y, &y, &PnConfig::default()).unwrap();
            let o = Ordering::new(m, r.sequence()).unwrap();
            prop_assert!(is_sequencing(&o));
            prop_assert_eq!(r.achieved_plus.clone(), counts(&m, &r.p_order, &y));
            prop_assert!(r.within_budget);
        }

        #[test]
        fn initial_segment_sums_contain_zero(xs in proptest::collection::vec(0u64..13, 0..10)) {
            let m = Modulus::new(13).unwrap();
            let is = initial_segment_sums(&m, &xs);
            prop_assert!(is.contains(&0));
            prop_assert!(is.len() <= xs.len() + 1);
        }
    }
}
