//! The randomized construction: decompose, order `P` and `N`, split the
//! dissociated blocks into quarters, arrange them, and sample orderings
//! until the validator accepts.
//!
//! Two drivers share the sampling code. [`run_tweak`] repairs violations
//! locally, resampling only the randomness a bad interval depends on.
//! [`run_classical`] redraws everything from an independent stream until a
//! full sequencing appears.

mod plan;
pub mod synthetic;

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{rng_for, Execution};
use crate::oracle::{brute_force, ORACLE_LIMIT};
use crate::pn::{order_pn, PNOrderings, PnConfig};
use crate::rectification::RectifyMethod;
use crate::structure::{
    compute_r_classical, compute_r_tweak, decompose, validate_decomposition, DecomposeConfig, Decomposition,
};
use crate::verify::{satisfies, Goal, Interval, Ordering};
use crate::zk::{GroundSet, Modulus};

pub use plan::{
    avoids, block_sources, build_y_targets, classify_interval, expected_pattern, forbidden_set, interval_sources,
    is_acceptable, is_boundary_safe, lll_dependency_degree, lll_dependency_degree_exhaustive, quarter_sizes, slot,
    split_blocks, touched_blocks, BlockPlan, End, IntervalType, PlanBlock, Source,
};

/// Attempts per rejection-sampling site before the instance is declared out
/// of regime.
pub const REJECTION_CAP: usize = 10_000;
/// Sets up to this size go to the oracle first in [`Mode::Auto`].
pub const AUTO_ORACLE_LIMIT: usize = 10;
/// Orderings drawn per pair before its split is declared impermissible.
pub const PAIR_CAP: usize = 1_000;
/// Splittings tried before no permissible plan is declared out of regime.
pub const PLAN_ATTEMPTS: usize = 100;

/// Smallest block extracted by the pipeline, so that every quarter is
/// nonempty.
pub const MIN_BLOCK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Auto,
    Classical,
    Tweak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Producer {
    Pipeline,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: Mode,
    /// Window of the t-weak goal; required for [`Mode::Tweak`].
    pub t: Option<usize>,
    /// Replaces `⌈c₂ R^{1/2}⌉`.
    pub k_override: Option<usize>,
    /// Replaces the block scale computed from `c₁`.
    pub r_override: Option<u64>,
    pub c1: f64,
    pub c2: f64,
    /// Defaults to `10⁶·|A|`.
    pub max_resamples: Option<u64>,
    pub max_retries: usize,
    pub seed: u64,
    pub oracle_fallback: bool,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::Auto,
            t: None,
            k_override: None,
            r_override: None,
            c1: 1.0,
            c2: 1.0,
            max_resamples: None,
            max_retries: 1000,
            seed: 0,
            oracle_fallback: true,
            exec: Execution::default(),
        }
    }
}

impl PipelineConfig {
    pub fn default_k(&self, r: u64) -> usize {
        ((self.c2 * (r as f64).sqrt()).ceil() as usize).max(1)
    }
}

/// A run of consecutive positions of the final ordering and where it came
/// from. Positions are 1-based and inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "segment", rename_all = "lowercase")]
pub enum Segment {
    /// `reverse(p)`.
    P { start: usize, end: usize },
    /// `t_index = D_source^(quarter)`.
    Block {
        index: usize,
        source: usize,
        quarter: usize,
        start: usize,
        end: usize,
    },
    N { start: usize, end: usize },
    Oracle { start: usize, end: usize },
}

impl Segment {
    pub fn range(&self) -> (usize, usize) {
        match *self {
            Segment::P { start, end }
            | Segment::Block { start, end, .. }
            | Segment::N { start, end }
            | Segment::Oracle { start, end } => (start, end),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalOrdering {
    pub k: u64,
    pub ordering: Vec<u64>,
    pub mode: Mode,
    pub t: Option<usize>,
    pub seed: u64,
    pub resamples: u64,
    pub retries: u64,
    pub provenance: Vec<Segment>,
    pub producer: Producer,
    /// The dilation the construction worked under; `ordering` is already
    /// mapped back.
    pub lambda: u64,
    #[serde(rename = "R")]
    pub r: u64,
    pub s: usize,
    #[serde(rename = "K")]
    pub k_param: usize,
    /// `K` was lowered to the smallest quarter size.
    pub k_clamped: bool,
    pub k_overridden: bool,
    pub in_regime: bool,
    pub pn_negated: bool,
    /// Final block plan, in dilated coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<BlockPlan>,
}

impl FinalOrdering {
    pub fn as_ordering(&self) -> Result<Ordering> {
        Ordering::new(Modulus::new(self.k)?, self.ordering.clone())
    }

    /// Every position lies in exactly one provenance segment.
    pub fn provenance_is_partition(&self) -> bool {
        let mut next = 1;
        for seg in &self.provenance {
            let (s, e) = seg.range();
            if s != next || e < s {
                return false;
            }
            next = e + 1;
        }
        next == self.ordering.len() + 1
    }
}

/// `reverse(p), t_1, …, t_u, n` with its provenance map.
pub fn assemble(pn: &PNOrderings, block_orderings: &[Vec<u64>], plan: &BlockPlan) -> Result<(Vec<u64>, Vec<Segment>)> {
    if block_orderings.len() != plan.u() {
        return Err(Error::Assembly(format!(
            "{} block orderings for {} blocks",
            block_orderings.len(),
            plan.u()
        )));
    }
    let mut seq: Vec<u64> = pn.p_order.iter().rev().copied().collect();
    let mut prov = Vec::new();
    if !seq.is_empty() {
        prov.push(Segment::P { start: 1, end: seq.len() });
    }
    for (j, (order, block)) in block_orderings.iter().zip(&plan.blocks).enumerate() {
        let mut a = order.clone();
        let mut b = block.elements.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::Assembly(format!("ordering of T_{} is not a permutation of it", j + 1)));
        }
        let start = seq.len() + 1;
        seq.extend(order);
        prov.push(Segment::Block {
            index: j + 1,
            source: block.source,
            quarter: block.quarter,
            start,
            end: seq.len(),
        });
    }
    if !pn.n_order.is_empty() {
        let start = seq.len() + 1;
        seq.extend(&pn.n_order);
        prov.push(Segment::N { start, end: seq.len() });
    }
    Ok((seq, prov))
}

/// First violation of `goal` as an interval with zero sum: `[1, j]` for a
/// forbidden zero partial sum, `[i+1, j]` for `p_i = p_j`.
pub fn first_bad_interval(m: &Modulus, seq: &[u64], goal: Goal) -> Option<Interval> {
    bad_intervals(m, seq, goal, true).into_iter().next()
}

/// All violations of `goal`, each reported at its closest earlier repeat.
pub fn bad_intervals(m: &Modulus, seq: &[u64], goal: Goal, first_only: bool) -> Vec<Interval> {
    let n = seq.len();
    let (window, zero_upto) = match goal {
        Goal::Valid => (n, 0),
        Goal::Sequencing => (n, n.saturating_sub(1)),
        Goal::TWeak(t) => (t, if n >= 2 { n } else { 0 }),
    };
    let mut last: HashMap<u64, usize> = HashMap::new();
    let mut out = Vec::new();
    let mut acc = 0;
    for (idx, &x) in seq.iter().enumerate() {
        let j = idx + 1;
        acc = m.add(acc, x);
        if acc == 0 && j <= zero_upto {
            out.push(Interval::new(1, j));
        } else if let Some(&i) = last.get(&acc) {
            if j - i <= window {
                out.push(Interval::new(i + 1, j));
            }
        }
        if first_only && !out.is_empty() {
            break;
        }
        last.insert(acc, j);
    }
    out
}

/// Everything fixed before the random stage.
struct Prepared {
    d: Decomposition,
    pn: PNOrderings,
    k_param: usize,
    k_clamped: bool,
    k_overridden: bool,
    in_regime: bool,
    first_forbidden: HashSet<u64>,
    last_forbidden: HashSet<u64>,
}

fn prepare(d: Decomposition, cfg: &PipelineConfig) -> Result<Prepared> {
    let m = d.modulus;
    let s = d.s();
    let k_overridden = cfg.k_override.is_some();
    let k_req = cfg.k_override.unwrap_or_else(|| cfg.default_k(d.r)).max(1);
    let min_quarter = d.blocks.iter().map(|b| quarter_sizes(b.len())[3]).min();
    let k_param = min_quarter.map_or(k_req, |q| k_req.min(q.max(1)));
    let (yp, ym) = if s > 0 {
        build_y_targets(&d, k_param)?
    } else {
        (Vec::new(), Vec::new())
    };
    let delta = (s > 0).then_some(d.delta);
    let pn = order_pn(&d.positive, &d.negative, delta, &yp, &ym, &PnConfig::default())?;
    let report = validate_decomposition(&d, &d.dilated_set());
    let (first_forbidden, last_forbidden) = if s > 0 {
        (
            forbidden_set(&m, End::First, &pn.p_order, &pn.n_order, d.delta),
            forbidden_set(&m, End::Last, &pn.p_order, &pn.n_order, d.delta),
        )
    } else {
        (HashSet::new(), HashSet::new())
    };
    Ok(Prepared {
        in_regime: report.in_regime() && pn.in_regime,
        k_clamped: k_param < k_req,
        k_overridden,
        k_param,
        d,
        pn,
        first_forbidden,
        last_forbidden,
    })
}

impl Prepared {
    fn modulus(&self) -> Modulus {
        self.d.modulus
    }

    /// Redraws the split of `source` until its endpoint quarters are
    /// acceptable.
    fn sample_source<R: Rng + ?Sized>(&self, plan: &mut BlockPlan, source: usize, rng: &mut R) -> Result<()> {
        let m = self.modulus();
        let s = plan.s();
        let u = plan.u();
        for _ in 0..REJECTION_CAP {
            plan.resplit(source, rng);
            let first_ok = source != 1 || avoids(&m, &plan.blocks[0].elements, End::First, self.k_param, &self.first_forbidden);
            let last_ok =
                source != s || avoids(&m, &plan.blocks[u - 1].elements, End::Last, self.k_param, &self.last_forbidden);
            if first_ok && last_ok {
                return Ok(());
            }
        }
        Err(Error::construction(
            "acceptability",
            format!("no acceptable split of D_{source} in {REJECTION_CAP} draws"),
            true,
        ))
    }

    /// Redraws the orderings of pair `g` until its junction is safe.
    fn sample_pair<R: Rng + ?Sized>(&self, plan: &mut BlockPlan, g: usize, cap: usize, rng: &mut R) -> Result<()> {
        let m = self.modulus();
        let (a, b) = plan.pairs()[g];
        for _ in 0..cap {
            plan.reorder(a, rng);
            plan.reorder(b, rng);
            if is_boundary_safe(&m, &plan.blocks[a].elements, &plan.blocks[b].elements, self.k_param) {
                return Ok(());
            }
        }
        Err(Error::construction(
            "permissibility",
            format!("no safe ordering of (T_{}, T_{}) in {cap} draws", a + 1, b + 1),
            true,
        ))
    }

    /// A split with acceptable endpoints and safe pair junctions. A split
    /// under which some pair has no safe ordering is redrawn.
    fn fresh_plan<R: Rng + ?Sized>(&self, seed: u64, rng: &mut R) -> Result<BlockPlan> {
        let mut last = None;
        for _ in 0..PLAN_ATTEMPTS {
            let mut plan = split_blocks(&self.d, self.k_param, seed, rng)?;
            for source in 1..=plan.s() {
                self.sample_source(&mut plan, source, rng)?;
            }
            match (0..plan.pairs().len()).try_for_each(|g| self.sample_pair(&mut plan, g, PAIR_CAP, rng)) {
                Ok(()) => return Ok(plan),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// Resamples `sources`; a re-split source also invalidates the pair
    /// orderings of its quarters. If a pair then has no safe ordering, the
    /// whole plan is redrawn.
    fn resample<R: Rng + ?Sized>(
        &self,
        plan: &mut BlockPlan,
        sources: &BTreeSet<Source>,
        seed: u64,
        rng: &mut R,
    ) -> Result<()> {
        let mut groups = BTreeSet::new();
        for src in sources {
            match *src {
                Source::Split(l) => {
                    self.sample_source(plan, l, rng)?;
                    for j in (0..plan.u()).filter(|&j| plan.blocks[j].source == l) {
                        groups.extend(plan.group_of(j));
                    }
                }
                Source::Order(g) => {
                    groups.insert(g);
                }
            }
        }
        if groups.into_iter().try_for_each(|g| self.sample_pair(plan, g, PAIR_CAP, rng)).is_err() {
            *plan = self.fresh_plan(seed, rng)?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        seq: Vec<u64>,
        provenance: Vec<Segment>,
        plan: Option<BlockPlan>,
        goal: Goal,
        cfg: &PipelineConfig,
        resamples: u64,
        retries: u64,
    ) -> Result<FinalOrdering> {
        let m = self.modulus();
        let inv = m.inverse(self.d.lambda)?;
        let ordering: Vec<u64> = seq.iter().map(|&x| m.mul(inv, x)).collect();
        let o = Ordering::new(m, ordering)?;
        if !satisfies(&o, goal) {
            return Err(Error::Assembly(format!("mapped ordering fails {goal}")));
        }
        Ok(FinalOrdering {
            k: m.k(),
            ordering: o.into_items(),
            mode: goal_mode(goal),
            t: goal_t(goal),
            seed: cfg.seed,
            resamples,
            retries,
            provenance,
            producer: Producer::Pipeline,
            lambda: self.d.lambda,
            r: self.d.r,
            s: self.d.s(),
            k_param: self.k_param,
            k_clamped: self.k_clamped,
            k_overridden: self.k_overridden,
            in_regime: self.in_regime,
            pn_negated: self.pn.negated,
            plan,
        })
    }
}

fn goal_mode(goal: Goal) -> Mode {
    match goal {
        Goal::TWeak(_) => Mode::Tweak,
        _ => Mode::Classical,
    }
}

fn goal_t(goal: Goal) -> Option<usize> {
    match goal {
        Goal::TWeak(t) => Some(t),
        _ => None,
    }
}

fn tweak_goal(cfg: &PipelineConfig) -> Result<Goal> {
    match cfg.t {
        Some(t) if t >= 1 => Ok(Goal::TWeak(t)),
        Some(_) => Err(Error::InvalidParameter("t must be at least 1".into())),
        None => Err(Error::InvalidParameter("t-weak mode needs t".into())),
    }
}

fn decompose_for(a: &GroundSet, goal: Goal, cfg: &PipelineConfig) -> Result<Decomposition> {
    let p = a.modulus().p();
    let r = cfg.r_override.unwrap_or_else(|| match goal {
        Goal::TWeak(_) => compute_r_tweak(p, cfg.c1),
        _ => compute_r_classical(p, a.len(), cfg.c1),
    });
    let dcfg = DecomposeConfig {
        seed: cfg.seed,
        method: RectifyMethod::Pigeonhole,
        flat_fallback: true,
        min_block: MIN_BLOCK,
        exec: cfg.exec,
        ..Default::default()
    };
    let mut d = decompose(a, r, &dcfg)?;
    d.c1 = Some(cfg.c1);
    Ok(d)
}

/// The t-weak construction on a ready decomposition: one sample, then local
/// repair of whichever bad interval is found first.
pub fn run_tweak_on(d: Decomposition, cfg: &PipelineConfig) -> Result<FinalOrdering> {
    let goal = tweak_goal(cfg)?;
    let n = d.element_count();
    let m = d.modulus;
    if n >= 2 && d.dilated_set().sum() == 0 {
        return Err(Error::construction(
            "tweak",
            "the elements sum to 0, so the final partial sum vanishes and no t-weak sequencing exists",
            false,
        ));
    }
    let prep = prepare(d, cfg)?;
    if prep.d.s() == 0 {
        let (seq, prov) = assemble(&prep.pn, &[], &empty_plan(&prep))?;
        if let Some(bad) = first_bad_interval(&m, &seq, goal) {
            return Err(Error::construction(
                "tweak",
                format!("no blocks to resample and interval {bad} has zero sum"),
                !prep.in_regime,
            ));
        }
        return prep.finish(seq, prov, None, goal, cfg, 0, 0);
    }
    let max_resamples = cfg.max_resamples.unwrap_or(1_000_000 * n as u64);
    let mut rng = rng_for(cfg.seed, 0);
    let mut plan = prep.fresh_plan(cfg.seed, &mut rng)?;
    let mut resamples = 0u64;
    loop {
        let (seq, prov) = assemble(&prep.pn, &plan.block_orders(), &plan)?;
        let Some(bad) = first_bad_interval(&m, &seq, goal) else {
            return prep.finish(seq, prov, Some(plan), goal, cfg, resamples, 0);
        };
        let sources = interval_sources(&plan, bad);
        if resamples >= max_resamples || sources.is_empty() {
            let surviving: Vec<String> = bad_intervals(&m, &seq, goal, false)
                .iter()
                .take(16)
                .map(|i| i.to_string())
                .collect();
            let why = if sources.is_empty() {
                format!("interval {bad} depends on no randomness")
            } else {
                format!("resample budget {max_resamples} exhausted")
            };
            return Err(Error::construction(
                "tweak",
                format!("{why}; bad intervals: {}", surviving.join(" ")),
                !prep.in_regime,
            ));
        }
        prep.resample(&mut plan, &sources, cfg.seed, &mut rng)?;
        resamples += 1;
    }
}

/// The full-sequencing construction on a ready decomposition: independent
/// redraws, each on its own random stream, until one verifies.
pub fn run_classical_on(d: Decomposition, cfg: &PipelineConfig) -> Result<FinalOrdering> {
    let goal = Goal::Sequencing;
    let m = d.modulus;
    let prep = prepare(d, cfg)?;
    if prep.d.s() == 0 {
        let (seq, prov) = assemble(&prep.pn, &[], &empty_plan(&prep))?;
        if let Some(bad) = first_bad_interval(&m, &seq, goal) {
            return Err(Error::construction(
                "classical",
                format!("no blocks to resample and interval {bad} has zero sum"),
                !prep.in_regime,
            ));
        }
        return prep.finish(seq, prov, None, goal, cfg, 0, 0);
    }
    let retries = cfg.max_retries.max(1);
    let found = cfg.exec.first_some(retries, 16, |i| {
        let mut rng = rng_for(cfg.seed, i as u64);
        let plan = prep.fresh_plan(cfg.seed, &mut rng).ok()?;
        let (seq, prov) = assemble(&prep.pn, &plan.block_orders(), &plan).ok()?;
        first_bad_interval(&m, &seq, goal).is_none().then_some((seq, prov, plan))
    });
    match found {
        Some((i, (seq, prov, plan))) => prep.finish(seq, prov, Some(plan), goal, cfg, 0, i as u64),
        None => Err(Error::construction(
            "classical",
            format!("no sequencing in {retries} independent draws"),
            !prep.in_regime,
        )),
    }
}

fn empty_plan(prep: &Prepared) -> BlockPlan {
    BlockPlan {
        k: prep.d.modulus.k(),
        blocks: Vec::new(),
        taus: Vec::new(),
        k_param: prep.k_param,
        p_len: prep.d.positive.len(),
        n_len: prep.d.negative.len(),
        seed: 0,
    }
}

fn trivial(a: &GroundSet, goal: Goal, cfg: &PipelineConfig) -> FinalOrdering {
    FinalOrdering {
        k: a.modulus().k(),
        ordering: a.elements().to_vec(),
        mode: goal_mode(goal),
        t: goal_t(goal),
        seed: cfg.seed,
        resamples: 0,
        retries: 0,
        provenance: if a.is_empty() {
            Vec::new()
        } else {
            vec![Segment::Oracle { start: 1, end: a.len() }]
        },
        producer: Producer::Oracle,
        lambda: 1 % a.modulus().k(),
        r: 0,
        s: 0,
        k_param: 0,
        k_clamped: false,
        k_overridden: false,
        in_regime: false,
        pn_negated: false,
        plan: None,
    }
}

fn from_oracle(a: &GroundSet, goal: Goal, cfg: &PipelineConfig) -> Result<FinalOrdering> {
    match brute_force(a, goal)? {
        Some(o) => {
            let mut f = trivial(a, goal, cfg);
            f.ordering = o.into_items();
            Ok(f)
        }
        None => Err(Error::construction(
            "oracle",
            format!("exhaustive search proves that no ordering meets {goal}"),
            false,
        )),
    }
}

fn with_fallback(
    a: &GroundSet,
    goal: Goal,
    cfg: &PipelineConfig,
    run: impl FnOnce() -> Result<FinalOrdering>,
) -> Result<FinalOrdering> {
    a.require_nonzero()?;
    if a.len() <= 1 {
        return Ok(trivial(a, goal, cfg));
    }
    match run() {
        Ok(f) => Ok(f),
        Err(e) if cfg.oracle_fallback && a.len() <= ORACLE_LIMIT => from_oracle(a, goal, cfg).map_err(|oe| {
            Error::construction("pipeline", format!("{e}; oracle fallback: {oe}"), e.is_out_of_regime())
        }),
        Err(e) => Err(e),
    }
}

/// A t-weak sequencing of `a` for `t = cfg.t`.
pub fn run_tweak(a: &GroundSet, cfg: &PipelineConfig) -> Result<FinalOrdering> {
    let goal = tweak_goal(cfg)?;
    with_fallback(a, goal, cfg, || run_tweak_on(decompose_for(a, goal, cfg)?, cfg))
}

/// A sequencing of `a`.
pub fn run_classical(a: &GroundSet, cfg: &PipelineConfig) -> Result<FinalOrdering> {
    let goal = Goal::Sequencing;
    with_fallback(a, goal, cfg, || run_classical_on(decompose_for(a, goal, cfg)?, cfg))
}

/// Dispatches on `cfg.mode`. `Auto` picks t-weak when `t` is set and a full
/// sequencing otherwise, and hands sets of at most [`AUTO_ORACLE_LIMIT`]
/// elements to the oracle first.
pub fn run(a: &GroundSet, cfg: &PipelineConfig) -> Result<FinalOrdering> {
    match cfg.mode {
        Mode::Classical => run_classical(a, cfg),
        Mode::Tweak => run_tweak(a, cfg),
        Mode::Auto => {
            let goal = if cfg.t.is_some() { tweak_goal(cfg)? } else { Goal::Sequencing };
            a.require_nonzero()?;
            if a.len() <= AUTO_ORACLE_LIMIT {
                return from_oracle(a, goal, cfg);
            }
            match goal {
                Goal::TWeak(_) => run_tweak(a, cfg),
                _ => run_classical(a, cfg),
            }
        }
    }
}
