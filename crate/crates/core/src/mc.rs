//! Seeded Monte Carlo estimates of the probabilities the construction relies
//! on, with exact bounds where they are finite and report-only comparisons
//! where they are asymptotic.
//!
//! Trials are cut into fixed shards; shard `i` draws from stream `i` of the
//! crate generator, and counts are merged exactly. Estimates therefore do
//! not depend on the thread count.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dissociation::DissociatedSet;
use crate::error::{Error, Result};
use crate::exec::{rng_for, Execution, RNG_ALGORITHM};
use crate::pipeline::{
    avoids, classify_interval, forbidden_set, is_boundary_safe, lll_dependency_degree, quarter_sizes, split_blocks, BlockPlan,
    End, IntervalType,
};
use crate::pn::PNOrderings;
use crate::structure::Decomposition;
use crate::verify::Interval;
use crate::zk::Modulus;

/// Trials per shard.
pub const SHARD_TRIALS: u64 = 1 << 16;

/// Exact binomial coefficient.
pub fn binomial_big(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::ZERO;
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn inverse_f64(b: &BigUint) -> f64 {
    b.to_f64().map_or(0.0, |x| 1.0 / x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        let q = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        let stderr = if trials == 0 { 0.0 } else { (q * (1.0 - q) / trials as f64).sqrt() };
        Estimate {
            successes,
            trials,
            estimate: q,
            stderr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Compared against an asymptotic claim; recorded, never asserted.
    Info,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub trials: u64,
    pub rng: String,
    pub estimates: BTreeMap<String, Estimate>,
    pub bounds: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, Verdict>,
    /// Computed quantities that are not frequencies.
    pub values: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: String,
    seed: u64,
    trials: u64,
    estimate: Option<f64>,
    stderr: Option<f64>,
    bound: Option<f64>,
    verdict: &'a str,
}

impl ExperimentReport {
    fn new(experiment: &str, seed: u64, trials: u64) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            seed,
            trials,
            rng: RNG_ALGORITHM.into(),
            estimates: BTreeMap::new(),
            bounds: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            values: BTreeMap::new(),
        }
    }

    /// Every verdict is pass or informational.
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| *v != Verdict::Fail)
    }

    /// One row per named quantity: `(experiment, seed, trials, estimate,
    /// stderr, bound, verdict)`, with the quantity name appended to the
    /// experiment id.
    pub fn write_csv<W: Write>(&self, out: W, header: bool) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(out);
        let mut names: Vec<&String> = self
            .estimates
            .keys()
            .chain(self.values.keys())
            .chain(self.bounds.keys())
            .chain(self.verdicts.keys())
            .collect();
        names.sort();
        names.dedup();
        for name in names {
            let est = self.estimates.get(name);
            let row = CsvRow {
                experiment: format!("{}:{name}", self.experiment),
                seed: self.seed,
                trials: self.trials,
                estimate: est.map(|e| e.estimate).or(self.values.get(name).copied()),
                stderr: est.map(|e| e.stderr),
                bound: self.bounds.get(name).copied(),
                verdict: match self.verdicts.get(name) {
                    Some(Verdict::Pass) => "pass",
                    Some(Verdict::Fail) => "fail",
                    Some(Verdict::Info) => "info",
                    None => "",
                },
            };
            w.serialize(row).map_err(std::io::Error::other)?;
        }
        w.flush()
    }
}

/// Runs `trials` trials in shards; `trial` returns per-counter increments.
fn count<F>(trials: u64, seed: u64, counters: usize, exec: Execution, trial: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng, &mut [u64]) + Sync + Send,
{
    let shards = trials.div_ceil(SHARD_TRIALS) as usize;
    exec.map(shards, |s| {
        let mut rng = rng_for(seed, s as u64);
        let lo = s as u64 * SHARD_TRIALS;
        let hi = (lo + SHARD_TRIALS).min(trials);
        let mut acc = vec![0u64; counters];
        for _ in lo..hi {
            trial(&mut rng, &mut acc);
        }
        acc
    })
    .into_iter()
    .fold(vec![0u64; counters], |mut tot, part| {
        tot.iter_mut().zip(part).for_each(|(t, p)| *t += p);
        tot
    })
}

/// `P(Σ_{i∈I} Σ D^{(i)} = x)` over uniform partitions of `D` into four
/// equal quarters, for each target `x`.
///
/// The union of the quarters in `I` is a uniform subset of size
/// `|D|·|I|/4`, which is what each trial draws.
pub fn estimate_anticoncentration_many(
    d: &DissociatedSet,
    quarters: &[usize],
    targets: &[u64],
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<ExperimentReport> {
    let set = d.as_set();
    let n = set.len();
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!("|D| = {n} must be a positive multiple of 4")));
    }
    let mut q: Vec<usize> = quarters.to_vec();
    q.sort_unstable();
    q.dedup();
    if q.is_empty() || q.len() >= 4 || q.iter().any(|&i| !(1..=4).contains(&i)) {
        return Err(Error::InvalidParameter("I must be a proper nonempty subset of {1,2,3,4}".into()));
    }
    let m = *set.modulus();
    for &x in targets {
        m.check(x)?;
    }
    let take = n / 4 * q.len();
    let index: HashMap<u64, usize> = targets.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let elements = set.elements().to_vec();
    let counts = count(trials, seed, targets.len(), exec, |rng, acc| {
        let mut v = elements.clone();
        let (chosen, _) = v.partial_shuffle(rng, take);
        let sum = m.sum(chosen.iter().copied());
        if let Some(&i) = index.get(&sum) {
            acc[i] += 1;
        }
    });
    let bound = inverse_f64(&binomial_big(n as u64, take as u64));
    let mut rep = ExperimentReport::new("anticoncentration", seed, trials);
    let mut max: Option<Estimate> = None;
    for (&x, &c) in targets.iter().zip(&counts) {
        let e = Estimate::new(c, trials);
        let name = format!("x={x}");
        rep.verdicts.insert(
            name.clone(),
            if e.estimate <= bound + 5.0 * e.stderr { Verdict::Pass } else { Verdict::Fail },
        );
        rep.bounds.insert(name.clone(), bound);
        if max.as_ref().is_none_or(|m| e.successes > m.successes) {
            max = Some(e.clone());
        }
        rep.estimates.insert(name, e);
    }
    if let Some(e) = max {
        let ok = e.estimate <= bound + 5.0 * e.stderr;
        rep.estimates.insert("max".into(), e);
        rep.bounds.insert("max".into(), bound);
        rep.verdicts.insert("max".into(), if ok { Verdict::Pass } else { Verdict::Fail });
    }
    Ok(rep)
}

pub fn estimate_anticoncentration(
    d: &DissociatedSet,
    quarters: &[usize],
    x: u64,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<ExperimentReport> {
    estimate_anticoncentration_many(d, quarters, &[x], trials, seed, exec)
}

/// Fraction of uniform permutations of `block` whose first quarter (for
/// [`End::First`]) or last quarter (for [`End::Last`]) keeps its `K` running
/// sums, read from the outer end, out of `forbidden`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_acceptability_against(
    m: &Modulus,
    block: &[u64],
    end: End,
    k_param: usize,
    forbidden: &HashSet<u64>,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<Estimate> {
    if block.len() < 4 {
        return Err(Error::InvalidParameter(format!("block of size {} has an empty quarter", block.len())));
    }
    for &x in block {
        m.check(x)?;
    }
    let sizes = quarter_sizes(block.len());
    let counts = count(trials, seed, 1, exec, |rng, acc| {
        let mut v = block.to_vec();
        v.shuffle(rng);
        let t = match end {
            End::First => &v[..sizes[0]],
            End::Last => &v[v.len() - sizes[3]..],
        };
        if avoids(m, t, end, k_param, forbidden) {
            acc[0] += 1;
        }
    });
    Ok(Estimate::new(counts[0], trials))
}

/// Acceptability rates of `t_1` (from `D_1`) and `t_u` (from `D_s`) against
/// the forbidden sets induced by `pn`. Compared to 0.99 for information only.
pub fn estimate_acceptability(
    d: &Decomposition,
    pn: &PNOrderings,
    k_param: usize,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<ExperimentReport> {
    let (Some(first), Some(last)) = (d.first_block(), d.last_block()) else {
        return Err(Error::InvalidParameter("acceptability needs at least one block".into()));
    };
    let m = d.modulus;
    let mut rep = ExperimentReport::new("acceptability", seed, trials);
    for (name, block, end) in [("t_1", first, End::First), ("t_u", last, End::Last)] {
        let forbidden = forbidden_set(&m, end, &pn.p_order, &pn.n_order, d.delta);
        let e = estimate_acceptability_against(&m, block.elements(), end, k_param, &forbidden, trials, seed, exec)?;
        rep.estimates.insert(name.into(), e);
        rep.bounds.insert(name.into(), 0.99);
        rep.verdicts.insert(name.into(), Verdict::Info);
    }
    rep.values.insert("K".into(), k_param as f64);
    Ok(rep)
}

/// Fraction of uniformly ordered pairs `(left, right)` that are boundary
/// safe.
pub fn estimate_permissible_density(
    m: &Modulus,
    left: &[u64],
    right: &[u64],
    k_param: usize,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<ExperimentReport> {
    for &x in left.iter().chain(right) {
        m.check(x)?;
    }
    let counts = count(trials, seed, 1, exec, |rng, acc| {
        let mut l = left.to_vec();
        let mut r = right.to_vec();
        l.shuffle(rng);
        r.shuffle(rng);
        if is_boundary_safe(m, &l, &r, k_param) {
            acc[0] += 1;
        }
    });
    let mut rep = ExperimentReport::new("permissible_density", seed, trials);
    rep.estimates.insert("density".into(), Estimate::new(counts[0], trials));
    rep.verdicts.insert("density".into(), Verdict::Info);
    Ok(rep)
}

/// `e·P·D ≤ 1` for a given dependency degree.
pub fn lll_budget_from_degree(degree: u64, p_hat: f64) -> Result<ExperimentReport> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::InvalidParameter(format!("probability {p_hat} outside [0, 1]")));
    }
    let value = std::f64::consts::E * p_hat * degree as f64;
    let mut rep = ExperimentReport::new("lll_budget", 0, 0);
    rep.values.insert("P".into(), p_hat);
    rep.values.insert("D".into(), degree as f64);
    rep.values.insert("ePD".into(), value);
    rep.bounds.insert("ePD".into(), 1.0);
    rep.verdicts
        .insert("ePD".into(), if value <= 1.0 { Verdict::Pass } else { Verdict::Fail });
    Ok(rep)
}

/// [`lll_budget_from_degree`] with `D` computed exactly on `plan`.
pub fn lll_budget_report(plan: &BlockPlan, t: usize, p_hat: f64) -> Result<ExperimentReport> {
    lll_budget_from_degree(lll_dependency_degree(plan, t), p_hat).map(|mut r| {
        r.values.insert("t".into(), t as f64);
        r
    })
}

/// `|A|²·P̂_II + |A|²·P̂_I`, compared with 1 for information only.
pub fn union_bound_report(a_size: usize, r: u64, p_type_i: f64, p_type_ii: f64) -> ExperimentReport {
    let a2 = (a_size as f64).powi(2);
    let value = a2 * p_type_ii + a2 * p_type_i;
    let mut rep = ExperimentReport::new("union_bound", 0, 0);
    rep.values.insert("A".into(), a_size as f64);
    rep.values.insert("R".into(), r as f64);
    rep.values.insert("P_I".into(), p_type_i);
    rep.values.insert("P_II".into(), p_type_ii);
    rep.values.insert("sum".into(), value);
    rep.bounds.insert("sum".into(), 1.0);
    rep.verdicts.insert("sum".into(), Verdict::Info);
    rep
}

/// Per-interval frequency of zero sums among Type I and Type II intervals of
/// length at most `max_len` (all proper intervals when `None`), over fresh
/// uniform splittings and orderings of the blocks of `d`, with `P` and `N`
/// fixed by `pn`. No acceptability or boundary conditioning is applied.
pub fn estimate_interval_events(
    d: &Decomposition,
    pn: &PNOrderings,
    k_param: usize,
    max_len: Option<usize>,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<ExperimentReport> {
    let m = d.modulus;
    let probe = split_blocks(d, k_param, seed, &mut rng_for(seed, u64::MAX))?;
    let n = probe.total_len();
    let max_len = max_len.unwrap_or(n).min(n.saturating_sub(1));
    let intervals: Vec<(Interval, IntervalType)> = (1..=n)
        .flat_map(|s| (s..=n).take_while(move |&e| e + 1 - s <= max_len).map(move |e| Interval::new(s, e)))
        .map(|i| (i, classify_interval(i, &probe)))
        .collect();
    let n_i = intervals.iter().filter(|(_, t)| *t == IntervalType::TypeI).count() as u64;
    let n_ii = intervals.len() as u64 - n_i;
    let counts = count(trials, seed, 4, exec, |rng, acc| {
        let Ok(mut plan) = split_blocks(d, k_param, seed, rng) else {
            return;
        };
        for j in 0..plan.u() {
            plan.reorder(j, rng);
        }
        let mut seq: Vec<u64> = pn.p_order.iter().rev().copied().collect();
        seq.extend(plan.blocks.iter().flat_map(|b| b.elements.iter().copied()));
        seq.extend(&pn.n_order);
        let mut prefix = vec![0u64];
        for &x in &seq {
            prefix.push(m.add(*prefix.last().unwrap(), x));
        }
        let mut hit = [false; 2];
        for (i, ty) in &intervals {
            if prefix[i.end] == prefix[i.start - 1] {
                let slot = usize::from(*ty == IntervalType::TypeII);
                acc[slot] += 1;
                hit[slot] = true;
            }
        }
        acc[2] += u64::from(hit[0]);
        acc[3] += u64::from(hit[1]);
    });
    let mut rep = ExperimentReport::new("interval_events", seed, trials);
    rep.estimates.insert("type_i_per_interval".into(), Estimate::new(counts[0], trials * n_i.max(1)));
    rep.estimates.insert("type_ii_per_interval".into(), Estimate::new(counts[1], trials * n_ii.max(1)));
    rep.estimates.insert("type_i_any".into(), Estimate::new(counts[2], trials));
    rep.estimates.insert("type_ii_any".into(), Estimate::new(counts[3], trials));
    rep.values.insert("type_i_intervals".into(), n_i as f64);
    rep.values.insert("type_ii_intervals".into(), n_ii as f64);
    for name in ["type_i_per_interval", "type_ii_per_interval"] {
        rep.verdicts.insert(name.into(), Verdict::Info);
    }
    Ok(rep)
}

/// Residues representable as a sum of `size` distinct elements of `d`.
pub fn representable_sums(d: &DissociatedSet, size: usize) -> Result<Vec<u64>> {
    Ok(crate::dissociation::subset_sums_exact(d.as_set(), size)?.into_iter().collect())
}

/// Distinct targets drawn from `pool` with the crate generator.
pub fn sample_targets(pool: &[u64], count: usize, seed: u64) -> Vec<u64> {
    let mut rng = rng_for(seed, 0);
    let mut v = pool.to_vec();
    v.shuffle(&mut rng);
    v.truncate(count);
    v
}
