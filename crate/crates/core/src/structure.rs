//! Structure decomposition `λ·A = P ∪ N ∪ D_1 ∪ … ∪ D_s`.
//!
//! Blocks are peeled off greedily as dissociated subsets of size `R`; what
//! remains has small dimension and is rectified, then split by sign into the
//! "positive" part `P` and the "negative" part `N`. Any partition accepted by
//! [`validate_decomposition`] is a valid output, so failed attempts are
//! retried with shuffled scan orders.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dissociation::{greedy_in_order, is_dissociated_slice, scan_order, DISSOCIATION_LIMIT};
use crate::error::{Error, Result};
use crate::exec::{rng_for, Execution};
use crate::rectification::{rectify, RectifyMethod};
use crate::zk::{GroundSet, Modulus};

/// `⌈c₁ (ln p)^{1/2}⌉`, at least 1: block scale for t-weak constructions.
pub fn compute_r_tweak(p: u64, c1: f64) -> u64 {
    r_from_scale(c1 * (p as f64).ln().sqrt())
}

/// `⌈c₁ max((ln p)^{1/2}, ln p / ln |A|)⌉`, at least 1: block scale for
/// full sequencings. Degenerate for `|A| < 2`, where it returns 1.
pub fn compute_r_classical(p: u64, a_size: usize, c1: f64) -> u64 {
    if a_size < 2 || p < 2 {
        return 1;
    }
    r_classical_from_logs((p as f64).ln(), (a_size as f64).ln(), c1)
}

/// [`compute_r_classical`] on `ln p` and `ln |A|` directly.
pub fn r_classical_from_logs(ln_p: f64, ln_a: f64, c1: f64) -> u64 {
    r_from_scale(c1 * ln_p.sqrt().max(ln_p / ln_a))
}

fn r_from_scale(x: f64) -> u64 {
    if x.is_finite() && x > 1.0 {
        x.ceil() as u64
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeConfig {
    /// `C` in the block-size window `[R/C, C·R]`.
    pub tolerance: u64,
    pub retries: usize,
    pub seed: u64,
    pub method: RectifyMethod,
    /// When every attempt fails (ii)–(iv), return the block-free
    /// decomposition (`s = 0`) instead of an error.
    pub flat_fallback: bool,
    /// Smallest block worth extracting; blocks below `max(R, min_block)`
    /// are left in the residual.
    pub min_block: usize,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            tolerance: 2,
            retries: 64,
            seed: 0,
            method: RectifyMethod::Pigeonhole,
            flat_fallback: false,
            min_block: 1,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub modulus: Modulus,
    pub lambda: u64,
    pub positive: GroundSet,
    pub negative: GroundSet,
    pub blocks: Vec<GroundSet>,
    pub delta: u64,
    pub r: u64,
    pub tolerance: u64,
    pub c1: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    k: u64,
    lambda: u64,
    #[serde(rename = "P")]
    p: Vec<u64>,
    #[serde(rename = "N")]
    n: Vec<u64>,
    blocks: Vec<Vec<u64>>,
    delta: u64,
    #[serde(rename = "R")]
    r: u64,
    #[serde(default = "default_tolerance")]
    tolerance: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c1: Option<f64>,
}

fn default_tolerance() -> u64 {
    2
}

impl Serialize for Decomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DecompositionJson {
            k: self.modulus.k(),
            lambda: self.lambda,
            p: self.positive.elements().to_vec(),
            n: self.negative.elements().to_vec(),
            blocks: self.blocks.iter().map(|b| b.elements().to_vec()).collect(),
            delta: self.delta,
            r: self.r,
            tolerance: self.tolerance,
            c1: self.c1,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Decomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = DecompositionJson::deserialize(d)?;
        let build = || -> Result<Decomposition> {
            let m = Modulus::new(j.k)?;
            Ok(Decomposition {
                modulus: m,
                lambda: m.check(j.lambda)?,
                positive: GroundSet::new(m, j.p.iter().copied())?,
                negative: GroundSet::new(m, j.n.iter().copied())?,
                blocks: j
                    .blocks
                    .iter()
                    .map(|b| GroundSet::new(m, b.iter().copied()))
                    .collect::<Result<_>>()?,
                delta: m.check(j.delta)?,
                r: j.r,
                tolerance: j.tolerance,
                c1: j.c1,
            })
        };
        build().map_err(D::Error::custom)
    }
}

impl Decomposition {
    pub fn s(&self) -> usize {
        self.blocks.len()
    }

    pub fn recomputed_delta(&self) -> u64 {
        self.modulus.sum(self.blocks.iter().flat_map(|b| b.iter()))
    }

    pub fn first_block(&self) -> Option<&GroundSet> {
        self.blocks.first()
    }

    pub fn last_block(&self) -> Option<&GroundSet> {
        self.blocks.last()
    }

    /// All of `λ·A`, reassembled from the parts.
    pub fn dilated_set(&self) -> GroundSet {
        let mut all: Vec<u64> = self.positive.iter().chain(self.negative.iter()).collect();
        all.extend(self.blocks.iter().flat_map(|b| b.iter()));
        GroundSet::from_reduced(self.modulus, all)
    }

    pub fn element_count(&self) -> usize {
        self.positive.len() + self.negative.len() + self.blocks.iter().map(|b| b.len()).sum::<usize>()
    }
}

/// Outcome of checking properties (i)–(iv) plus bookkeeping invariants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// Parts are disjoint and their union is `λ·A`.
    pub partition: bool,
    pub lambda_unit: bool,
    pub delta_consistent: bool,
    /// (i), split per clause; failures here mean out of regime.
    pub interval_p: bool,
    pub interval_n: bool,
    pub interval_delta: bool,
    /// (ii)
    pub block_sizes: bool,
    pub pn_nonempty: bool,
    pub blocks_dissociated: bool,
    /// (iii)
    pub delta_avoidance: bool,
    /// (iv)
    pub endpoint_dissociated: bool,
    pub failures: Vec<String>,
}

impl DecompositionReport {
    pub fn passes(&self) -> bool {
        self.structural_ok() && self.in_regime()
    }

    /// Everything except the interval clauses of (i).
    pub fn structural_ok(&self) -> bool {
        self.partition
            && self.lambda_unit
            && self.delta_consistent
            && self.block_sizes
            && self.pn_nonempty
            && self.blocks_dissociated
            && self.delta_avoidance
            && self.endpoint_dissociated
    }

    pub fn in_regime(&self) -> bool {
        self.interval_p && self.interval_n && self.interval_delta
    }
}

pub fn validate_decomposition(d: &Decomposition, a: &GroundSet) -> DecompositionReport {
    let m = d.modulus;
    let k = m.k() as u128;
    let mut failures = Vec::new();
    let mut note = |ok: bool, msg: String| {
        if !ok {
            failures.push(msg);
        }
        ok
    };

    let lambda_unit = note(m.is_unit(d.lambda), format!("lambda {} is not a unit", d.lambda));
    let partition = {
        let ok = a.modulus() == &m
            && m.is_unit(d.lambda)
            && d.element_count() == a.len()
            && d.dilated_set().len() == a.len()
            && a.dilate(d.lambda).map(|l| l == d.dilated_set()).unwrap_or(false);
        note(ok, "parts do not partition lambda*A".into())
    };
    let delta_consistent = note(
        d.delta == d.recomputed_delta(),
        format!("stored delta {} != recomputed {}", d.delta, d.recomputed_delta()),
    );

    let pn = (d.positive.len() + d.negative.len()) as u128;
    let interval_p = note(
        d.positive
            .iter()
            .all(|x| m.signed_rep(x) > 0 && 4 * pn * (m.norm(x) as u128) < k),
        "(i): P not inside (0, k/(4|P∪N|))".into(),
    );
    let interval_n = note(
        d.negative
            .iter()
            .all(|x| m.signed_rep(x) < 0 && 4 * pn * (m.norm(x) as u128) < k),
        "(i): N not inside (-k/(4|P∪N|), 0)".into(),
    );
    let interval_delta = note(
        4 * (m.norm(d.delta) as u128) < k,
        "(i): delta not inside (-k/4, k/4)".into(),
    );

    let s = d.s();
    let (mut block_sizes, mut pn_nonempty, mut blocks_dissociated) = (true, true, true);
    let delta_avoidance;
    let mut endpoint_dissociated = true;
    if s > 0 {
        let c = d.tolerance.max(1) as u128;
        let r = d.r as u128;
        block_sizes = note(
            d.blocks.iter().all(|b| {
                let n = b.len() as u128;
                n * c >= r && n <= c * r
            }),
            format!("(ii): block sizes outside [R/{c}, {c}R]"),
        );
        pn_nonempty = note(pn > 0, "(ii): P ∪ N is empty".into());
        blocks_dissociated = note(
            d.blocks
                .iter()
                .all(|b| is_dissociated_slice(&m, b.elements()).unwrap_or(false)),
            "(ii): a block is not dissociated".into(),
        );

        let delta = d.delta;
        let neg_delta = m.neg(delta);
        let mut avoid = delta != 0 && !d.positive.contains(neg_delta) && !d.negative.contains(neg_delta);
        if !d.negative.is_empty() {
            avoid &= delta != m.neg(d.positive.sum());
        }
        if !d.positive.is_empty() {
            avoid &= delta != m.neg(d.negative.sum());
        }
        delta_avoidance = note(avoid, "(iii): delta hits {0} ∪ -P ∪ -N or a forbidden sum".into());

        let mut ends: Vec<u64> = d.blocks[0].iter().chain(d.blocks[s - 1].iter()).collect();
        ends.push(delta);
        ends.sort_unstable();
        ends.dedup();
        endpoint_dissociated = if ends.len() > DISSOCIATION_LIMIT {
            note(false, "(iv): D_1 ∪ D_s ∪ {delta} too large to check".into())
        } else {
            note(
                is_dissociated_slice(&m, &ends).unwrap_or(false),
                "(iv): D_1 ∪ D_s ∪ {delta} is not dissociated".into(),
            )
        };
    } else {
        delta_avoidance = note(d.delta == 0, "delta must be 0 without blocks".into());
    }

    DecompositionReport {
        partition,
        lambda_unit,
        delta_consistent,
        interval_p,
        interval_n,
        interval_delta,
        block_sizes,
        pn_nonempty,
        blocks_dissociated,
        delta_avoidance,
        endpoint_dissociated,
        failures,
    }
}

pub fn decompose(a: &GroundSet, r: u64, cfg: &DecomposeConfig) -> Result<Decomposition> {
    decompose_with_report(a, r, cfg).map(|(d, _)| d)
}

/// Like [`decompose`], also returning the validation report of the result.
pub fn decompose_with_report(
    a: &GroundSet,
    r: u64,
    cfg: &DecomposeConfig,
) -> Result<(Decomposition, DecompositionReport)> {
    if a.is_empty() {
        return Err(Error::InvalidParameter("cannot decompose an empty set".into()));
    }
    a.require_nonzero()?;
    let r = r.max(1);
    let base = scan_order(a);
    let attempt = |i: usize| -> Result<(Decomposition, DecompositionReport)> {
        let mut order = base.clone();
        if i > 0 {
            order.shuffle(&mut rng_for(cfg.seed, i as u64));
        }
        let d = extract(a, &order, r, cfg)?;
        let report = validate_decomposition(&d, a);
        Ok((d, report))
    };

    // Everything but the interval property is invariant under unit dilation,
    // so candidates are screened unrectified and only the winner is rectified.
    let found = cfg.exec.first_some(cfg.retries.max(1), 8, |i| {
        attempt(i).ok().filter(|(_, rep)| rep.structural_ok())
    });
    if let Some((_, (d, _))) = found {
        let residual = d.positive.union(&d.negative);
        let blocks = d.blocks.into_iter().map(|b| b.into_elements()).collect();
        let d = assemble(a, residual.into_elements(), blocks, r, cfg, true)?;
        let report = validate_decomposition(&d, a);
        return Ok((d, report));
    }
    if cfg.flat_fallback {
        let d = flat(a, r, cfg)?;
        let report = validate_decomposition(&d, a);
        return Ok((d, report));
    }
    let reason = match attempt(0) {
        Ok((_, rep)) => rep.failures.join("; "),
        Err(e) => e.to_string(),
    };
    Err(Error::construction(
        "decompose",
        format!("no valid decomposition in {} attempts: {reason}", cfg.retries.max(1)),
        false,
    ))
}

fn extract(a: &GroundSet, order: &[u64], r: u64, cfg: &DecomposeConfig) -> Result<Decomposition> {
    let m = *a.modulus();
    let block_size = (r as usize).max(cfg.min_block).max(1);
    let mut residual: Vec<u64> = order.to_vec();
    let mut raw_blocks: Vec<Vec<u64>> = Vec::new();
    loop {
        let cand = greedy_in_order(&m, &residual, block_size);
        if cand.len() < block_size {
            break;
        }
        residual.retain(|x| !cand.contains(x));
        raw_blocks.push(cand);
    }
    assemble(a, residual, raw_blocks, r, cfg, false)
}

/// Block-free decomposition: all of `A` rectified and split by sign.
pub fn flat(a: &GroundSet, r: u64, cfg: &DecomposeConfig) -> Result<Decomposition> {
    assemble(a, a.elements().to_vec(), Vec::new(), r, cfg, true)
}

fn assemble(
    a: &GroundSet,
    residual: Vec<u64>,
    raw_blocks: Vec<Vec<u64>>,
    r: u64,
    cfg: &DecomposeConfig,
    rectify_residual: bool,
) -> Result<Decomposition> {
    let m = *a.modulus();
    let residual = GroundSet::new(m, residual)?;
    let lambda = if rectify_residual {
        choose_lambda(&residual, cfg.method)
    } else {
        1 % m.k()
    };
    let dil = residual.dilate(lambda)?;
    let positive = GroundSet::from_reduced(m, dil.iter().filter(|&x| m.signed_rep(x) > 0));
    let negative = GroundSet::from_reduced(m, dil.iter().filter(|&x| m.signed_rep(x) < 0));
    let blocks: Vec<GroundSet> = raw_blocks
        .into_iter()
        .map(|b| GroundSet::from_reduced(m, b.into_iter().map(|x| m.mul(lambda, x))))
        .collect();
    let delta = m.sum(blocks.iter().flat_map(|b| b.iter()));
    Ok(Decomposition {
        modulus: m,
        lambda,
        positive,
        negative,
        blocks,
        delta,
        r,
        tolerance: cfg.tolerance,
        c1: None,
    })
}

/// The identity when the residual already sits in `(-k/(4|R|), k/(4|R|))`,
/// otherwise the rectifying dilation. Falls back from the pigeonhole method
/// to the exhaustive scan, and to the identity when neither applies.
fn choose_lambda(residual: &GroundSet, method: RectifyMethod) -> u64 {
    let m = residual.modulus();
    let k = m.k() as u128;
    let n = residual.len() as u128;
    if residual.iter().all(|x| 4 * n * (m.norm(x) as u128) < k) {
        return 1 % m.k();
    }
    let attempt = rectify(residual, method).or_else(|_| rectify(residual, RectifyMethod::Exhaustive));
    match attempt {
        Ok(res) => res.lambda,
        Err(_) => 1 % m.k(),
    }
}
