//! Planted instances: a known decomposition with small `P` and `N` and
//! random dissociated blocks, built directly rather than recovered by
//! [`decompose`](crate::structure::decompose).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dissociation::is_dissociated_slice;
use crate::error::{Error, Result};
use crate::exec::rng_for;
use crate::structure::Decomposition;
use crate::zk::{GroundSet, Modulus};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub k: u64,
    pub s: usize,
    pub block_size: usize,
    pub positive: Vec<u64>,
    /// Negative part as signed representatives.
    pub negative: Vec<i64>,
}

impl Default for PlantedConfig {
    /// `k = 1_000_003`, two blocks of size 8, `P = {1, 2}`, `N = {-2}`.
    fn default() -> Self {
        PlantedConfig {
            k: 1_000_003,
            s: 2,
            block_size: 8,
            positive: vec![1, 2],
            negative: vec![-2],
        }
    }
}

const ATTEMPTS: usize = 100_000;

/// Draws blocks until they are dissociated, disjoint from everything else,
/// and `δ` lies in `(-k/4, k/4)` avoiding `{0} ∪ -P ∪ -N ∪ {-ΣP, -ΣN}`.
pub fn planted(cfg: PlantedConfig, seed: u64) -> Result<(GroundSet, Decomposition)> {
    let m = Modulus::new(cfg.k)?;
    let positive = GroundSet::new(m, cfg.positive.iter().copied())?;
    let negative = GroundSet::new(m, cfg.negative.iter().map(|&x| m.reduce(x as i128)))?;
    let mut rng = rng_for(seed, 0);
    for _ in 0..ATTEMPTS {
        let mut used: Vec<u64> = positive.iter().chain(negative.iter()).collect();
        let mut blocks = Vec::with_capacity(cfg.s);
        for _ in 0..cfg.s {
            let b = draw_block(&m, cfg.block_size, &used, &mut rng)?;
            used.extend(&b);
            blocks.push(GroundSet::new(m, b)?);
        }
        let delta = m.sum(blocks.iter().flat_map(|b| b.iter()));
        let k = m.k() as u128;
        let forbidden = delta == 0
            || positive.contains(m.neg(delta))
            || negative.contains(m.neg(delta))
            || (!negative.is_empty() && delta == m.neg(positive.sum()))
            || (!positive.is_empty() && delta == m.neg(negative.sum()));
        if forbidden || 4 * (m.norm(delta) as u128) >= k {
            continue;
        }
        let a = GroundSet::new(m, used)?;
        let d = Decomposition {
            modulus: m,
            lambda: 1 % m.k(),
            positive,
            negative,
            blocks,
            delta,
            r: cfg.block_size as u64,
            tolerance: 2,
            c1: None,
        };
        return Ok((a, d));
    }
    Err(Error::construction(
        "planted",
        format!("no admissible blocks in {ATTEMPTS} draws"),
        true,
    ))
}

fn draw_block<R: Rng + ?Sized>(m: &Modulus, size: usize, used: &[u64], rng: &mut R) -> Result<Vec<u64>> {
    for _ in 0..ATTEMPTS {
        let mut b: Vec<u64> = Vec::with_capacity(size);
        while b.len() < size {
            let x = rng.random_range(1..m.k());
            if !used.contains(&x) && !b.contains(&x) {
                b.push(x);
            }
        }
        if is_dissociated_slice(m, &b)? {
            return Ok(b);
        }
    }
    Err(Error::construction("planted", "no dissociated block found", true))
}
