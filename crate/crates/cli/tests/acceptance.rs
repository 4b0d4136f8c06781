//! Acceptance criteria 1-7. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;
use std::time::Instant;

use serde_json::Value;

use zkseq::dissociation::{dimension, greedy_max_dissociated, DissociatedSet};
use zkseq::exec::rng_for;
use zkseq::mc::{
    binomial_big, estimate_acceptability, estimate_anticoncentration_many, lll_budget_from_degree, lll_budget_report,
    representable_sums, sample_targets,
};
use zkseq::pipeline::synthetic::{planted, PlantedConfig};
use zkseq::pipeline::{
    expected_pattern, is_boundary_safe, lll_dependency_degree, run_classical_on, run_tweak_on, split_blocks, BlockPlan,
    Mode, PipelineConfig, Producer,
};
use zkseq::pn::{order_pn, PnConfig};
use zkseq::structure::Decomposition;
use zkseq::{Execution, GroundSet, Modulus};

/// Criterion 2: estimates within this many standard errors.
const STDERR_TOLERANCE: f64 = 5.0;
/// Criterion 2: Monte Carlo trials.
const ANTICONCENTRATION_TRIALS: u64 = 1_000_000;
/// Criterion 2: sampled targets.
const ANTICONCENTRATION_TARGETS: usize = 10;
/// Criteria 4 and 5: planted instances.
const INSTANCES: u64 = 100;
/// Criterion 4: t-weak window.
const TWEAK_T: usize = 8;
/// Criterion 4: required successes.
const TWEAK_REQUIRED: usize = 100;
/// Criterion 5: required successes and retry cap.
const CLASSICAL_REQUIRED: usize = 95;
const CLASSICAL_MAX_RETRIES: usize = 1000;
/// Criterion 6: budget example and its tolerance.
const BUDGET_P: f64 = 0.01;
const BUDGET_D: u64 = 30;
const BUDGET_EXPECTED: f64 = 0.8155;
const BUDGET_TOLERANCE: f64 = 5e-5;
/// Criterion 6: plan sizes checked exhaustively.
const MAX_U: usize = 8;
const MAX_T: usize = 4;
/// Criterion 7: report-only acceptability reference.
const ACCEPTABILITY_REFERENCE: f64 = 0.99;

type Outcome = Result<String, String>;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["zkseq"];
    full.extend_from_slice(args);
    let code = zkseq_cli::run(full, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into(), String::from_utf8_lossy(&err).into())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn criterion_1() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let seq_path = dir.path().join("seq.json");
    let seq = seq_path.to_str().unwrap();
    let mut total = 0usize;
    let mut oracle = 0usize;
    for p in [5u64, 7, 11, 13] {
        for mask in 1u64..1 << (p - 1) {
            let a: Vec<u64> = (1..p).filter(|x| mask >> (x - 1) & 1 == 1).collect();
            let list = a.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
            let ps = p.to_string();
            let (code, _, err) = cli(&[
                "sequence", "--modulus", &ps, "--elements", &list, "--mode", "classical", "--seed", "0", "--out", seq,
            ]);
            if code != 0 {
                return Err(format!("sequence exit {code} on {a:?} in Z_{p}: {err}"));
            }
            let json = read_json(&seq_path);
            let mut got: Vec<u64> = json["ordering"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_u64().unwrap())
                .collect();
            if json["producer"] == "oracle" {
                oracle += 1;
            }
            got.sort_unstable();
            if got != a {
                return Err(format!("output is not an ordering of {a:?} in Z_{p}"));
            }
            for goal in ["valid", "sequencing"] {
                let (code, _, _) = cli(&["verify", "--ordering", seq, "--goal", goal]);
                if code != 0 {
                    return Err(format!("verify --goal {goal} exit {code} on {a:?} in Z_{p}"));
                }
            }
            total += 1;
        }
    }
    Ok(format!("{total} sets, 0 failures ({oracle} via oracle fallback)"))
}

fn criterion_2() -> Outcome {
    let m = Modulus::new(3u64.pow(13)).unwrap();
    let d = DissociatedSet::new(GroundSet::new(m, (0..12).map(|i| 3u64.pow(i))).unwrap()).map_err(|e| e.to_string())?;
    if binomial_big(12, 3) != 220u32.into() || binomial_big(16, 4) != 1820u32.into() {
        return Err("binomial constants".into());
    }
    // every 3-subset sum is distinct, so each is hit with probability exactly 1/220
    let pool = representable_sums(&d, 3).map_err(|e| e.to_string())?;
    if pool.len() != 220 {
        return Err(format!("{} distinct 3-subset sums, expected 220", pool.len()));
    }
    let exact = 1.0 / 220.0;
    let targets = sample_targets(&pool, ANTICONCENTRATION_TARGETS, 2024);
    let rep = estimate_anticoncentration_many(&d, &[1], &targets, ANTICONCENTRATION_TRIALS, 1, Execution::default())
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for x in &targets {
        let e = &rep.estimates[&format!("x={x}")];
        let z = (e.estimate - exact).abs() / e.stderr;
        worst = worst.max(z);
        if z > STDERR_TOLERANCE {
            return Err(format!("x = {x}: estimate {} is {z:.2} stderr from 1/220", e.estimate));
        }
    }
    let max = &rep.estimates["max"];
    if max.estimate > exact + STDERR_TOLERANCE * max.stderr {
        return Err(format!("max estimate {} exceeds 1/220 + 5 stderr", max.estimate));
    }
    Ok(format!(
        "{} targets at {} trials, worst deviation {worst:.2} stderr, max {:.6} vs bound {exact:.6}",
        targets.len(),
        ANTICONCENTRATION_TRIALS,
        max.estimate
    ))
}

/// Dissociated by definition: the `2^n` subset sums are pairwise distinct.
fn dissociated_by_definition(m: u64, xs: &[u64]) -> bool {
    let mut seen = HashSet::new();
    (0u32..1 << xs.len()).all(|mask| {
        let s = xs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &x)| x)
            .sum::<u64>()
            % m;
        seen.insert(s)
    })
}

fn criterion_3() -> Outcome {
    let m = Modulus::new(1000).unwrap();
    let mut count = 0;
    for mask in 1u32..1 << 12 {
        if mask.count_ones() > 5 {
            continue;
        }
        let b: Vec<u64> = (1..=12).filter(|x| mask >> (x - 1) & 1 == 1).collect();
        let brute = (0u32..1 << b.len())
            .filter(|sub| {
                let s: Vec<u64> = b.iter().enumerate().filter(|(i, _)| sub >> i & 1 == 1).map(|(_, &x)| x).collect();
                dissociated_by_definition(1000, &s)
            })
            .map(|sub| sub.count_ones() as usize)
            .max()
            .unwrap();
        let set = GroundSet::new(m, b.iter().copied()).unwrap();
        let dim = dimension(&set).map_err(|e| e.to_string())?;
        if dim != brute {
            return Err(format!("dimension({b:?}) = {dim}, brute force {brute}"));
        }
        let greedy = greedy_max_dissociated(&set, set.len());
        if greedy.len() > dim || !dissociated_by_definition(1000, greedy.elements()) {
            return Err(format!("greedy witness {:?} for {b:?} is invalid", greedy.elements()));
        }
        count += 1;
    }
    if count != 1585 {
        return Err(format!("{count} sets, expected 1585"));
    }
    Ok(format!("{count} sets agree"))
}

/// Partial sums of `seq` have no repeat within `t` positions and no zero.
fn t_weak_by_definition(m: &Modulus, seq: &[u64], t: usize) -> bool {
    let mut sums = vec![0u64];
    for &x in seq {
        sums.push(m.add(*sums.last().unwrap(), x));
    }
    let n = seq.len();
    (1..=n).all(|j| (j.saturating_sub(t)..j).all(|i| sums[i] != sums[j] || (i == 0 && n < 2)))
}

fn distinct_partial_sums(m: &Modulus, seq: &[u64]) -> bool {
    let mut seen = HashSet::new();
    let mut acc = 0;
    let n = seq.len();
    seq.iter().enumerate().all(|(i, &x)| {
        acc = m.add(acc, x);
        seen.insert(acc) && (acc != 0 || i + 1 == n)
    })
}

fn instances() -> Vec<(GroundSet, Decomposition)> {
    (0..INSTANCES).map(|seed| planted(PlantedConfig::default(), seed).unwrap()).collect()
}

fn check_plan(plan: &BlockPlan, d: &Decomposition) -> Result<(), String> {
    if plan.pattern() != expected_pattern(d.s()) || !plan.follows_pattern() {
        return Err("block order breaks the arrangement pattern".into());
    }
    if !plan.is_consistent_with(d) {
        return Err("plan quarters do not partition the blocks".into());
    }
    let m = d.modulus;
    for (a, b) in plan.pairs() {
        if !is_boundary_safe(&m, &plan.blocks[a].elements, &plan.blocks[b].elements, plan.k_param) {
            return Err(format!("pair ({a}, {b}) is not boundary safe"));
        }
    }
    Ok(())
}

fn criterion_4(inst: &[(GroundSet, Decomposition)]) -> Outcome {
    let mut ok = 0;
    let mut resamples = 0;
    let mut failures = Vec::new();
    for (seed, (a, d)) in inst.iter().enumerate() {
        let cfg = PipelineConfig {
            mode: Mode::Tweak,
            t: Some(TWEAK_T),
            seed: seed as u64,
            ..PipelineConfig::default()
        };
        let budget = 1_000_000 * a.len() as u64;
        let res = run_tweak_on(d.clone(), &cfg);
        let verdict = res.map_err(|e| e.to_string()).and_then(|f| {
            let mut sorted = f.ordering.clone();
            sorted.sort_unstable();
            if sorted != a.elements() {
                return Err("not an ordering of A".into());
            }
            if !t_weak_by_definition(&d.modulus, &f.ordering, TWEAK_T) {
                return Err("not t-weak".into());
            }
            if f.resamples > budget {
                return Err(format!("{} resamples over budget", f.resamples));
            }
            let plan = f.plan.as_ref().ok_or("no plan returned")?;
            check_plan(plan, d)?;
            resamples += f.resamples;
            Ok(())
        });
        match verdict {
            Ok(()) => ok += 1,
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let line = format!("{ok}/{} t-weak (t = {TWEAK_T}), {resamples} resamples in total", inst.len());
    if ok >= TWEAK_REQUIRED {
        Ok(line)
    } else {
        Err(format!("{line}; {}", failures.join("; ")))
    }
}

fn criterion_5(inst: &[(GroundSet, Decomposition)]) -> Outcome {
    let mut ok = 0;
    let mut flagged = 0;
    let mut retries = 0;
    for (seed, (a, d)) in inst.iter().enumerate() {
        let cfg = PipelineConfig {
            mode: Mode::Classical,
            seed: seed as u64,
            max_retries: CLASSICAL_MAX_RETRIES,
            ..PipelineConfig::default()
        };
        match run_classical_on(d.clone(), &cfg) {
            Ok(f) => {
                let mut sorted = f.ordering.clone();
                sorted.sort_unstable();
                if sorted != a.elements() || !distinct_partial_sums(&d.modulus, &f.ordering) {
                    return Err(format!("seed {seed}: returned ordering is not a sequencing"));
                }
                if f.producer != Producer::Pipeline {
                    return Err(format!("seed {seed}: unexpected producer"));
                }
                retries += f.retries;
                ok += 1;
            }
            Err(e) if e.is_out_of_regime() => flagged += 1,
            Err(e) => return Err(format!("seed {seed}: unflagged failure: {e}")),
        }
    }
    let line = format!(
        "{ok}/{} sequencings, {flagged} flagged failures, {retries} retries in total",
        inst.len()
    );
    if ok >= CLASSICAL_REQUIRED {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Randomness sources of each block, derived from the plan layout alone:
/// its own split, and for paired blocks the pair ordering and the partner's
/// split.
fn sources_by_block(plan: &BlockPlan) -> Vec<BTreeSet<(u8, usize)>> {
    let u = plan.u();
    let pairs: Vec<(usize, usize)> = (1..u / 2).map(|g| (2 * g - 1, 2 * g)).collect();
    (0..u)
        .map(|j| {
            let mut s = BTreeSet::from([(0u8, plan.blocks[j].source)]);
            for (g, &(x, y)) in pairs.iter().enumerate() {
                if x == j || y == j {
                    s.insert((1, g));
                    s.insert((0, plan.blocks[x + y - j].source));
                }
            }
            s
        })
        .collect()
}

fn degree_by_enumeration(plan: &BlockPlan, t: usize) -> u64 {
    let n = plan.total_len();
    let max_len = t.min(n - 1);
    let by_block = sources_by_block(plan);
    let mut owner = vec![None; n + 1];
    for (j, _) in plan.blocks.iter().enumerate() {
        let (lo, hi) = plan.block_range(j);
        for slot in owner.iter_mut().take(hi + 1).skip(lo) {
            *slot = Some(j);
        }
    }
    let mut intervals = Vec::new();
    for s in 1..=n {
        for e in s..(s + max_len).min(n + 1) {
            let src: BTreeSet<(u8, usize)> = (s..=e)
                .filter_map(|i| owner[i])
                .flat_map(|j| by_block[j].iter().copied())
                .collect();
            intervals.push(src);
        }
    }
    (0..intervals.len())
        .map(|i| {
            (0..intervals.len())
                .filter(|&j| j != i && !intervals[i].is_disjoint(&intervals[j]))
                .count() as u64
        })
        .max()
        .unwrap_or(0)
}

fn criterion_6(inst: &[(GroundSet, Decomposition)]) -> Outcome {
    let rep = lll_budget_from_degree(BUDGET_D, BUDGET_P).map_err(|e| e.to_string())?;
    let epd = rep.values["ePD"];
    if (epd - BUDGET_EXPECTED).abs() > BUDGET_TOLERANCE || !rep.passed() {
        return Err(format!("ePD = {epd}, verdict {:?}", rep.verdicts["ePD"]));
    }
    if lll_budget_from_degree(10, 0.1).unwrap().passed() || !lll_budget_from_degree(10, 0.0).unwrap().passed() {
        return Err("budget verdicts for the other examples".into());
    }
    let mut plans = 0;
    for (seed, (_, d)) in inst.iter().take(10).enumerate() {
        let one = Decomposition {
            blocks: vec![d.blocks[0].clone()],
            delta: d.blocks[0].sum(),
            ..d.clone()
        };
        for dec in [&one, d] {
            for k in 1..=2 {
                let plan = split_blocks(dec, k, seed as u64, &mut rng_for(seed as u64, 0)).map_err(|e| e.to_string())?;
                if plan.u() > MAX_U {
                    continue;
                }
                for t in 1..=MAX_T {
                    let fast = lll_dependency_degree(&plan, t);
                    let slow = degree_by_enumeration(&plan, t);
                    if fast != slow {
                        return Err(format!("u = {}, t = {t}: degree {fast}, enumeration {slow}", plan.u()));
                    }
                    let r = lll_budget_report(&plan, t, BUDGET_P).map_err(|e| e.to_string())?;
                    if r.values["D"] != fast as f64 {
                        return Err("budget report degree".into());
                    }
                }
                plans += 1;
            }
        }
    }
    Ok(format!(
        "ePD = {epd:.4} pass; degree matches enumeration on {plans} plans (u <= {MAX_U}, t <= {MAX_T})"
    ))
}

fn criterion_7(inst: &[(GroundSet, Decomposition)]) -> Outcome {
    println!(
        "  statement: the asymptotic thresholds exp(c (log p)^(1/3)) for sequencings and exp(c (log p)^(1/4)) \
         for t-weak sequencings are NOT reproducible at desk scale (their constants are unspecified and the \
         regime is astronomically large)."
    );
    println!(
        "  coverage: validators as contracts (1, 4, 5), exact finite probabilities (2), exact oracle \
         equivalence (3), exact budget arithmetic and dependency degrees (6), plus the report-only \
         acceptability comparison below."
    );
    let (_, d) = &inst[0];
    let pn = order_pn(&d.positive, &d.negative, Some(d.delta), &[], &[], &PnConfig::default()).map_err(|e| e.to_string())?;
    let rep = estimate_acceptability(d, &pn, 2, 100_000, 7, Execution::default()).map_err(|e| e.to_string())?;
    let (t1, tu) = (&rep.estimates["t_1"], &rep.estimates["t_u"]);
    Ok(format!(
        "acceptability t_1 = {:.4} +- {:.4}, t_u = {:.4} +- {:.4} vs {ACCEPTABILITY_REFERENCE} (report-only, K = 2)",
        t1.estimate, t1.stderr, tu.estimate, tu.stderr
    ))
}

fn main() {
    let inst = instances();
    let criteria: Vec<(usize, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(criterion_3)),
        (4, Box::new(|| criterion_4(&inst))),
        (5, Box::new(|| criterion_5(&inst))),
        (6, Box::new(|| criterion_6(&inst))),
        (7, Box::new(|| criterion_7(&inst))),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("[criterion {n}] PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("[criterion {n}] FAIL ({secs:.1}s) {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
