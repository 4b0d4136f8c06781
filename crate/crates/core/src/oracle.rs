//! Exhaustive ground truth on small instances.
//!
//! The search is deliberately plain: a depth-first walk over permutations
//! that extends a prefix only while its newest partial sum is admissible for
//! the goal. No symmetry reduction is applied.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::verify::{Goal, Ordering};
use crate::zk::{GroundSet, Modulus};

/// Largest set handed to [`brute_force`].
pub const ORACLE_LIMIT: usize = 12;
/// Largest modulus for a full census.
pub const CENSUS_MODULUS_LIMIT: u64 = 17;

/// An ordering of `a` meeting `goal`, or `None` if there is none.
pub fn brute_force(a: &GroundSet, goal: Goal) -> Result<Option<Ordering>> {
    let n = a.len();
    if n > ORACLE_LIMIT {
        return Err(Error::size_limit("oracle set", n as u128, ORACLE_LIMIT as u128));
    }
    if let Goal::TWeak(0) = goal {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    let m = *a.modulus();
    // With two or more elements the final partial sum is itself constrained
    // to be nonzero under the t-weak goal.
    if matches!(goal, Goal::TWeak(_)) && n >= 2 && a.sum() == 0 {
        return Ok(None);
    }
    let mut dfs = Dfs {
        m,
        elements: a.elements(),
        goal,
        order: Vec::with_capacity(n),
        sums: Vec::with_capacity(n),
        used: 0,
    };
    Ok(if dfs.search(0) {
        Some(Ordering::new(m, dfs.order)?)
    } else {
        None
    })
}

struct Dfs<'a> {
    m: Modulus,
    elements: &'a [u64],
    goal: Goal,
    order: Vec<u64>,
    sums: Vec<u64>,
    used: u32,
}

impl Dfs<'_> {
    fn admissible(&self, s: u64) -> bool {
        let n = self.elements.len();
        let pos = self.sums.len() + 1;
        let (window, zero_ok) = match self.goal {
            Goal::Valid => (n, true),
            Goal::Sequencing => (n, pos == n),
            Goal::TWeak(t) => (t, n < 2),
        };
        if s == 0 && !zero_ok {
            return false;
        }
        let from = self.sums.len().saturating_sub(window);
        !self.sums[from..].contains(&s)
    }

    fn search(&mut self, cur: u64) -> bool {
        if self.order.len() == self.elements.len() {
            return true;
        }
        for i in 0..self.elements.len() {
            if self.used & (1 << i) != 0 {
                continue;
            }
            let x = self.elements[i];
            let s = self.m.add(cur, x);
            if !self.admissible(s) {
                continue;
            }
            self.used |= 1 << i;
            self.order.push(x);
            self.sums.push(s);
            if self.search(s) {
                return true;
            }
            self.sums.pop();
            self.order.pop();
            self.used &= !(1 << i);
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub k: u64,
    /// Bit `x` is set when `x ∈ A`.
    pub subset_bitmask: u64,
    pub size: usize,
    pub goal: String,
    pub achievable: bool,
    /// Space-separated witness ordering, empty when none exists.
    pub witness: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeCount {
    pub size: usize,
    pub subsets: u64,
    pub achievable: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub k: u64,
    pub max_size: usize,
    pub goal: String,
    pub rows: Vec<CensusRow>,
    pub by_size: Vec<SizeCount>,
}

impl CensusReport {
    pub fn failures(&self) -> impl Iterator<Item = &CensusRow> {
        self.rows.iter().filter(|r| !r.achievable)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(std::io::Error::other)?;
        }
        w.flush()
    }
}

/// Runs [`brute_force`] on every `A ⊆ Z_k \ {0}` with `1 ≤ |A| ≤ max_size`,
/// in increasing bitmask order.
pub fn census(k: u64, max_size: usize, goal: Goal, exec: Execution) -> Result<CensusReport> {
    if k > CENSUS_MODULUS_LIMIT {
        return Err(Error::size_limit("census modulus", k as u128, CENSUS_MODULUS_LIMIT as u128));
    }
    let m = Modulus::new(k)?;
    let max_size = max_size.min(k as usize - 1);
    if max_size > ORACLE_LIMIT {
        return Err(Error::size_limit("census size", max_size as u128, ORACLE_LIMIT as u128));
    }
    let masks: Vec<u64> = (1u64..1 << (k - 1))
        .map(|bits| bits << 1)
        .filter(|mask| mask.count_ones() as usize <= max_size)
        .collect();
    let goal_name = goal.to_string();
    let rows = exec.map(masks.len(), |i| {
        let mask = masks[i];
        let a = GroundSet::from_reduced(m, (1..k).filter(|x| mask >> x & 1 == 1));
        let found = brute_force(&a, goal).expect("size checked above");
        CensusRow {
            k,
            subset_bitmask: mask,
            size: a.len(),
            goal: goal_name.clone(),
            achievable: found.is_some(),
            witness: found
                .map(|o| o.items().iter().map(u64::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default(),
        }
    });
    let by_size = (1..=max_size)
        .map(|size| {
            let of_size = rows.iter().filter(|r| r.size == size);
            SizeCount {
                size,
                subsets: of_size.clone().count() as u64,
                achievable: of_size.filter(|r| r.achievable).count() as u64,
            }
        })
        .collect();
    Ok(CensusReport {
        k,
        max_size,
        goal: goal_name,
        rows,
        by_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissociation::binomial;
    use crate::verify::{check, satisfies};

    fn set(k: u64, xs: &[u64]) -> GroundSet {
        GroundSet::new(Modulus::new(k).unwrap(), xs.iter().copied()).unwrap()
    }

    /// Every permutation, checked with the validator.
    fn any_permutation(a: &GroundSet, goal: Goal) -> bool {
        fn rec(m: &Modulus, rest: &mut Vec<u64>, cur: &mut Vec<u64>, goal: Goal) -> bool {
            if rest.is_empty() {
                return satisfies(&Ordering::new(*m, cur.clone()).unwrap(), goal);
            }
            for i in 0..rest.len() {
                let x = rest.remove(i);
                cur.push(x);
                let ok = rec(m, rest, cur, goal);
                cur.pop();
                rest.insert(i, x);
                if ok {
                    return true;
                }
            }
            false
        }
        rec(a.modulus(), &mut a.elements().to_vec(), &mut Vec::new(), goal)
    }

    #[test]
    fn examples() {
        let o = brute_force(&set(5, &[1, 2, 3, 4]), Goal::Valid).unwrap().unwrap();
        assert!(check(&o, Goal::Valid).passed);
        assert_eq!(
            brute_force(&set(7, &[3]), Goal::Sequencing).unwrap().unwrap().items(),
            &[3]
        );
        for goal in [Goal::Valid, Goal::Sequencing, Goal::TWeak(3)] {
            assert!(brute_force(&set(7, &[]), goal).unwrap().unwrap().is_empty());
        }
        // the final partial sum of {1,2,3,4} ⊂ Z_5 is 0
        assert!(brute_force(&set(5, &[1, 2, 3, 4]), Goal::TWeak(2)).unwrap().is_none());
        assert!(brute_force(&set(5, &[1, 2, 3, 4]), Goal::TWeak(1)).unwrap().is_none());
    }

    #[test]
    fn size_limit() {
        let a = set(101, &(1..=13).collect::<Vec<_>>());
        assert!(matches!(brute_force(&a, Goal::Valid), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn agrees_with_permutation_enumeration() {
        for k in 2..=9u64 {
            let m = Modulus::new(k).unwrap();
            for mask in 0u64..1 << (k - 1) {
                let a = GroundSet::from_reduced(m, (1..k).filter(|x| mask >> (x - 1) & 1 == 1));
                if a.len() > 6 {
                    continue;
                }
                for goal in [Goal::Valid, Goal::Sequencing, Goal::TWeak(1), Goal::TWeak(2)] {
                    let got = brute_force(&a, goal).unwrap();
                    if let Some(o) = &got {
                        assert!(o.is_ordering_of(&a));
                        assert!(satisfies(o, goal));
                    }
                    assert_eq!(got.is_some(), any_permutation(&a, goal), "{a:?} {goal}");
                }
            }
        }
    }

    #[test]
    fn census_examples() {
        let r = census(5, 4, Goal::Valid, Execution::default()).unwrap();
        assert_eq!(r.rows.len(), 15);
        assert!(r.rows.iter().all(|row| row.achievable));
        let r = census(2, 1, Goal::Sequencing, Execution::default()).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].subset_bitmask, 0b10);
        assert!(r.rows[0].achievable);
        let r = census(7, 6, Goal::Sequencing, Execution::default()).unwrap();
        for c in &r.by_size {
            assert_eq!(c.subsets as u128, binomial(6, c.size as u64));
        }
    }

    #[test]
    fn census_modes_agree_and_csv_shape() {
        let a = census(7, 6, Goal::TWeak(2), Execution::Sequential).unwrap();
        let b = census(7, 6, Goal::TWeak(2), Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,subset_bitmask,size,goal,achievable,witness\n"));
        assert_eq!(text.lines().count(), a.rows.len() + 1);
    }

    #[test]
    fn small_primes_are_sequenceable() {
        for k in [3u64, 5, 7, 11] {
            let r = census(k, k as usize - 1, Goal::Sequencing, Execution::default()).unwrap();
            assert_eq!(r.failures().count(), 0, "k = {k}");
        }
    }
}
