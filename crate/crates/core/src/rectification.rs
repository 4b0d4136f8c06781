//! Rectification: a unit dilation that moves a low-dimensional set into a
//! short interval around 0.
//!
//! [`rectify_pigeonhole`] follows the box-collision argument over
//! `Λ = {0, …, p-1}`: differences of elements of `Λ` are units of `Z_k`
//! because every prime factor of `k` is at least `p`. [`rectify_exhaustive`]
//! scans all units and returns the optimum; it serves as the oracle.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dissociation::{dimension, greedy_in_order, scan_order, EXACT_DIMENSION_LIMIT};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::zk::GroundSet;

/// Largest dissociated core handled by the box table.
pub const PIGEONHOLE_CORE_LIMIT: usize = 12;
/// Largest modulus for the full unit scan.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;
/// Most dilates hashed by the pigeonhole scan.
pub const PIGEON_LIMIT: u64 = 20_000_000;
/// Dilates examined with the preferred box count before switching to the
/// count that forces a collision.
const PREFERRED_SCAN: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RectifyMethod {
    Pigeonhole,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectificationResult {
    pub lambda: u64,
    pub max_abs: u64,
    pub method: RectifyMethod,
    /// Boxes per coordinate used by the pigeonhole scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_count: Option<u64>,
    /// The dissociated core the boxes were built over.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub core: Vec<u64>,
}

impl RectificationResult {
    /// Is `λ·B` inside `(-k/(100|B|), k/(100|B|))`?
    pub fn meets_lemma_target(&self, b: &GroundSet) -> bool {
        (self.max_abs as u128) * 100 * (b.len() as u128) < b.modulus().k() as u128
    }
}

/// `h ln h + 2h ln 10 + h² ln 3 < ln p`, with a relative guard band of
/// `1e-12` against rounding.
pub fn goal_inequality_holds(h: u64, p: u64) -> bool {
    let h = h as f64;
    let lhs = h * h.ln() + 2.0 * h * 10f64.ln() + h * h * 3f64.ln();
    let rhs = (p as f64).ln();
    rhs - lhs > 1e-12 * rhs.abs()
}

/// Smallest `m` with `m^r ≥ n`.
pub(crate) fn ceil_root(n: u64, r: u32) -> u64 {
    if r == 1 {
        return n;
    }
    let mut m = (n as f64).powf(1.0 / r as f64).ceil() as u64;
    let pow = |m: u64| (m as u128).checked_pow(r).unwrap_or(u128::MAX);
    while m > 1 && pow(m - 1) >= n as u128 {
        m -= 1;
    }
    while pow(m) < n as u128 {
        m += 1;
    }
    m.max(1)
}

/// Largest `m ≥ 1` with `m^r < n` (`n ≥ 2`).
fn floor_root_strict(n: u64, r: u32) -> u64 {
    let c = ceil_root(n, r);
    (c - 1).max(1)
}

pub fn rectify_pigeonhole(b: &GroundSet) -> Result<RectificationResult> {
    if b.is_empty() {
        return Err(Error::InvalidParameter("cannot rectify an empty set".into()));
    }
    let m = b.modulus();
    let core = greedy_in_order(m, &scan_order(b), usize::MAX);
    let r = core.len();
    if r > PIGEONHOLE_CORE_LIMIT {
        return Err(Error::size_limit(
            "pigeonhole core",
            r as u128,
            PIGEONHOLE_CORE_LIMIT as u128,
        ));
    }
    let finish = |lambda: u64, box_count: Option<u64>| RectificationResult {
        lambda,
        max_abs: b.iter().map(|x| m.norm(m.mul(lambda, x))).max().unwrap_or(0),
        method: RectifyMethod::Pigeonhole,
        box_count,
        core: core.clone(),
    };
    if r == 0 {
        // B ⊆ Span(∅) = {0}
        return Ok(finish(1 % m.k(), None));
    }
    let pigeons = m.p().min(PIGEON_LIMIT);
    let preferred = ceil_root(m.p(), r as u32);
    // ⌈p^{1/r}⌉^r ≥ p boxes do not force a collision among p dilates; fall
    // back to the largest count with fewer boxes than pigeons, which does.
    let forced = floor_root_strict(pigeons, r as u32);
    for (boxes, scan) in [(preferred, pigeons.min(PREFERRED_SCAN)), (forced, pigeons)] {
        if let Some(lambda) = first_collision(b, &core, boxes, scan) {
            return Ok(finish(lambda, Some(boxes)));
        }
    }
    Err(Error::RectificationInfeasible {
        box_count: forced,
        pigeons,
    })
}

fn first_collision(b: &GroundSet, core: &[u64], boxes: u64, pigeons: u64) -> Option<u64> {
    let m = b.modulus();
    let k = m.k() as u128;
    let mut seen: HashMap<u128, u64> = HashMap::new();
    for lambda in 0..pigeons {
        let mut key: u128 = 0;
        for &d in core {
            let x = m.mul(lambda, d) as u128;
            key = key * boxes as u128 + x * boxes as u128 / k;
        }
        if let Some(&earlier) = seen.get(&key) {
            return Some(lambda - earlier);
        }
        seen.insert(key, lambda);
    }
    None
}

pub fn rectify_exhaustive(b: &GroundSet) -> Result<RectificationResult> {
    rectify_exhaustive_with(b, Execution::default())
}

pub fn rectify_exhaustive_with(b: &GroundSet, exec: Execution) -> Result<RectificationResult> {
    let m = *b.modulus();
    let k = m.k();
    if k > EXHAUSTIVE_LIMIT {
        return Err(Error::size_limit("exhaustive rectification", k, EXHAUSTIVE_LIMIT));
    }
    const SHARD: u64 = 1 << 14;
    let shards = k.div_ceil(SHARD) as usize;
    let best = exec
        .map(shards, |s| {
            let lo = (s as u64 * SHARD).max(1);
            let hi = ((s as u64 + 1) * SHARD).min(k);
            (lo..hi)
                .filter(|&l| m.is_unit(l))
                .map(|l| (b.iter().map(|x| m.norm(m.mul(l, x))).max().unwrap_or(0), l))
                .min()
        })
        .into_iter()
        .flatten()
        .min();
    let (max_abs, lambda) = best.unwrap_or((0, 1 % k));
    Ok(RectificationResult {
        lambda,
        max_abs,
        method: RectifyMethod::Exhaustive,
        box_count: None,
        core: Vec::new(),
    })
}

pub fn rectify(b: &GroundSet, method: RectifyMethod) -> Result<RectificationResult> {
    match method {
        RectifyMethod::Pigeonhole => rectify_pigeonhole(b),
        RectifyMethod::Exhaustive => rectify_exhaustive(b),
    }
}

/// Whether the lemma's interval conclusion is expected for `b`, and whether
/// `result` achieved it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeCheck {
    /// `dim(B)` when `|B| ≤ 20`, otherwise the greedy lower bound.
    pub dimension: usize,
    pub dimension_exact: bool,
    pub in_regime: bool,
    pub target_met: bool,
}

pub fn regime_check(b: &GroundSet, result: &RectificationResult) -> Result<RegimeCheck> {
    let (dimension, dimension_exact) = if b.len() <= EXACT_DIMENSION_LIMIT {
        (dimension(b)?, true)
    } else {
        (greedy_in_order(b.modulus(), &scan_order(b), usize::MAX).len(), false)
    };
    Ok(RegimeCheck {
        dimension,
        dimension_exact,
        in_regime: dimension_exact && goal_inequality_holds(dimension as u64, b.modulus().p()),
        target_met: result.meets_lemma_target(b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zk::Modulus;
    use proptest::prelude::*;

    fn set(k: u64, xs: &[u64]) -> GroundSet {
        GroundSet::new(Modulus::new(k).unwrap(), xs.iter().copied()).unwrap()
    }

    /// Plain scan, independent of the sharded implementation.
    fn optimum(b: &GroundSet) -> (u64, u64) {
        let m = b.modulus();
        (1..m.k())
            .filter(|&l| m.is_unit(l))
            .map(|l| (b.iter().map(|x| m.norm(m.mul(l, x))).max().unwrap(), l))
            .min()
            .unwrap()
    }

    fn check_pigeonhole_contract(b: &GroundSet, r: &RectificationResult) {
        let m = b.modulus();
        assert!(m.is_unit(r.lambda));
        assert!(r.lambda >= 1 && r.lambda < m.p().max(2));
        let boxes = r.box_count.unwrap() as u128;
        for &d in &r.core {
            assert!((m.norm(m.mul(r.lambda, d)) as u128) * boxes < m.k() as u128);
        }
        let core_bound = r.core.len() as u128 * m.k() as u128;
        assert!((r.max_abs as u128) * boxes < core_bound.max(1));
        let actual = b.iter().map(|x| m.norm(m.mul(r.lambda, x))).max().unwrap();
        assert_eq!(actual, r.max_abs);
    }

    #[test]
    fn goal_inequality_examples() {
        assert!(goal_inequality_holds(2, 5_000_000));
        assert!(!goal_inequality_holds(2, 1_000_000));
        assert!(!goal_inequality_holds(1, 100));
        assert!(goal_inequality_holds(1, 1000));
    }

    #[test]
    fn root_helpers() {
        assert_eq!(ceil_root(101, 2), 11);
        assert_eq!(ceil_root(100, 2), 10);
        assert_eq!(ceil_root(7, 1), 7);
        assert_eq!(floor_root_strict(101, 2), 10);
        assert_eq!(floor_root_strict(2, 5), 1);
        assert_eq!(ceil_root(u64::MAX, 2), 1 << 32);
    }

    #[test]
    fn single_element_lands_next_to_zero() {
        for p in [3u64, 101, 1009, 999_983] {
            let r = rectify_pigeonhole(&set(p, &[1])).unwrap();
            check_pigeonhole_contract(&set(p, &[1]), &r);
            assert_eq!(r.max_abs, 1);
        }
    }

    #[test]
    fn pigeonhole_vs_exhaustive_examples() {
        let x = 37;
        for b in [set(101, &[x, 2 * x]), set(1009, &[40, 41]), set(101, &[3, 6])] {
            let ph = rectify_pigeonhole(&b).unwrap();
            check_pigeonhole_contract(&b, &ph);
            let ex = rectify_exhaustive(&b).unwrap();
            assert_eq!((ex.max_abs, ex.lambda), optimum(&b));
            assert!(ex.max_abs <= ph.max_abs);
        }
    }

    #[test]
    fn exhaustive_examples() {
        let r = rectify_exhaustive(&set(5, &[1, 2])).unwrap();
        assert_eq!((r.lambda, r.max_abs), (1, 2));
        let r = rectify_exhaustive(&set(97, &[96])).unwrap();
        assert_eq!((r.lambda, r.max_abs), (1, 1));
        let r = rectify_exhaustive(&set(101, &[3, 6])).unwrap();
        assert_eq!((r.lambda, r.max_abs), (34, 2));
        assert!(matches!(
            rectify_exhaustive(&set(10_000_019, &[1])),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn exhaustive_modes_agree() {
        let b = set(100_003, &[17, 4242, 99_999]);
        assert_eq!(
            rectify_exhaustive_with(&b, Execution::Sequential).unwrap(),
            rectify_exhaustive_with(&b, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn composite_modulus_uses_least_prime() {
        // p = 7, so λ ∈ {1..6}; all are units of Z_{7·11}
        let b = set(77, &[10, 20, 33]);
        let r = rectify_pigeonhole(&b).unwrap();
        check_pigeonhole_contract(&b, &r);
        assert!(r.lambda < 7);
    }

    #[test]
    fn in_regime_instances_meet_target() {
        // one-dimensional sets with p large enough for the lemma's inequality
        let b = set(999_983, &[1234, 2468]);
        let r = rectify_pigeonhole(&b).unwrap();
        let check = regime_check(&b, &r).unwrap();
        assert_eq!(check.dimension, 2);
        assert!(!check.in_regime);

        let b = set(999_983, &[5555]);
        let r = rectify_pigeonhole(&b).unwrap();
        let check = regime_check(&b, &r).unwrap();
        assert!(check.in_regime);
        assert!(check.target_met);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(rectify_pigeonhole(&set(11, &[])).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pigeonhole_never_beats_optimum(
            k in prop::sample::select(vec![101u64, 211, 1009, 2003, 221, 323]),
            xs in proptest::collection::btree_set(1u64..5000, 1..5),
        ) {
            let b = GroundSet::from_reduced(Modulus::new(k).unwrap(), xs.into_iter().map(|x| x % (k - 1) + 1));
            let ph = rectify_pigeonhole(&b).unwrap();
            check_pigeonhole_contract(&b, &ph);
            let (best, _) = optimum(&b);
            prop_assert!(best <= ph.max_abs);
            let check = regime_check(&b, &ph).unwrap();
            if check.in_regime {
                prop_assert!(check.target_met);
            }
        }
    }
}
