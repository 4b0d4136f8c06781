//! The `zkseq` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 construction failed,
//! 3 verification failed. Machine output (JSON or CSV) goes to `--out` when
//! given, with a one-line summary on stdout; otherwise it goes to stdout.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use zkseq::dissociation::{dimension, greedy_max_dissociated, is_dissociated, DissociatedSet};
use zkseq::mc::{
    estimate_acceptability, estimate_anticoncentration_many, estimate_interval_events, estimate_permissible_density,
    lll_budget_from_degree, lll_budget_report, representable_sums, sample_targets, union_bound_report,
    ExperimentReport,
};
use zkseq::oracle::{brute_force, census};
use zkseq::pipeline::synthetic::{planted, PlantedConfig};
use zkseq::pipeline::{split_blocks, Mode, PipelineConfig};
use zkseq::pn::{order_pn, PnConfig};
use zkseq::rectification::{rectify, RectifyMethod};
use zkseq::structure::{compute_r_tweak, decompose_with_report, DecomposeConfig};
use zkseq::verify::check;
use zkseq::{Error, Execution, Goal, GroundSet, Modulus, Ordering};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONSTRUCTION: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "zkseq", version, about = "Sequencings and t-weak sequencings of subsets of Z_k")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Construct an ordering of a set.
    Sequence(SequenceArgs),
    /// Check an ordering against a goal.
    Verify(VerifyArgs),
    /// Split a set into P, N and dissociated blocks.
    Decompose(DecomposeArgs),
    /// Find a dilation that makes a set small.
    Rectify(RectifyArgs),
    /// Test whether a set is dissociated.
    Dissociate(DissociateArgs),
    /// Exhaustive search for one set, or a census without --elements.
    Oracle(OracleArgs),
    /// Exhaustive census of all subsets of Z_k \ {0}.
    Census(CensusArgs),
    /// Monte Carlo experiments.
    Mc(McArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Seed; falls back to SEQ_SEED, then 0.
    #[arg(long, env = "SEQ_SEED", default_value_t = 0)]
    seed: u64,
    /// Write machine output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SetArgs {
    #[arg(long)]
    modulus: Option<u64>,
    /// JSON `{"k": .., "elements": [..]}` or a whitespace/comma separated list.
    #[arg(long, conflicts_with = "elements")]
    set: Option<PathBuf>,
    /// Comma separated residues; negative values are reduced.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    elements: Option<Vec<i128>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GoalKind {
    Valid,
    Sequencing,
    Tweak,
}

#[derive(Debug, Args)]
struct GoalArgs {
    #[arg(long, value_enum)]
    goal: Option<GoalKind>,
    /// Window of the t-weak goal.
    #[arg(long)]
    t: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Classical,
    Tweak,
}

#[derive(Debug, Args)]
struct SequenceArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    /// Override the fringe length K.
    #[arg(long)]
    k: Option<usize>,
    /// Override the block scale R.
    #[arg(long)]
    r: Option<u64>,
    #[arg(long)]
    max_resamples: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    max_retries: usize,
    /// Never hand small sets to the exhaustive oracle.
    #[arg(long)]
    no_oracle: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// JSON with `k` and `ordering` (sequence output is accepted).
    #[arg(long, conflicts_with = "elements")]
    ordering: Option<PathBuf>,
    #[arg(long)]
    modulus: Option<u64>,
    /// Inline ordering instead of --ordering.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    elements: Option<Vec<i128>>,
    #[command(flatten)]
    goal: GoalArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Pigeonhole,
    Exhaustive,
}

impl From<MethodArg> for RectifyMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pigeonhole => RectifyMethod::Pigeonhole,
            MethodArg::Exhaustive => RectifyMethod::Exhaustive,
        }
    }
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    set: SetArgs,
    /// Block scale; defaults to the t-weak value from --c1.
    #[arg(long)]
    r: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 64)]
    retries: usize,
    #[arg(long, default_value_t = 1)]
    min_block: usize,
    #[arg(long, value_enum, default_value = "pigeonhole")]
    method: MethodArg,
    /// Return the block-free decomposition when no attempt validates.
    #[arg(long)]
    flat_fallback: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RectifyArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, value_enum, default_value = "pigeonhole")]
    method: MethodArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct DissociateArgs {
    #[command(flatten)]
    set: SetArgs,
    /// Also report the dissociativity dimension and a greedy witness.
    #[arg(long)]
    dimension: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    goal: GoalArgs,
    /// Census size cap when no set is given.
    #[arg(long)]
    max_size: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CensusArgs {
    #[arg(long)]
    modulus: u64,
    #[arg(long)]
    max_size: Option<usize>,
    #[command(flatten)]
    goal: GoalArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct McArgs {
    #[command(subcommand)]
    experiment: McCmd,
}

#[derive(Debug, Args)]
struct McCommon {
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct FixtureArgs {
    /// Seed of the planted fixture; defaults to --seed.
    #[arg(long)]
    fixture_seed: Option<u64>,
    /// Fringe length K.
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Debug, Subcommand)]
enum McCmd {
    /// Subset-sum frequency of quarters of a random 4-partition.
    Anticoncentration {
        /// Dissociated set; defaults to {3^0, ..., 3^11} in Z_{3^13}.
        #[command(flatten)]
        set: SetArgs,
        /// Quarters in I, 1-based.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        quarters: Vec<usize>,
        /// Targets; defaults to 10 sampled representable sums.
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<u64>>,
        #[command(flatten)]
        mc: McCommon,
    },
    /// Acceptability of t_1 and t_u on a planted fixture.
    Acceptability {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[command(flatten)]
        mc: McCommon,
    },
    /// Density of boundary-safe orderings of two blocks.
    Permissible {
        #[arg(long)]
        modulus: u64,
        #[arg(long, value_delimiter = ',')]
        left: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        right: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        mc: McCommon,
    },
    /// e·P·D against 1.
    LllBudget {
        #[arg(long)]
        p_hat: f64,
        /// Dependency degree; computed on a planted plan when omitted.
        #[arg(long)]
        degree: Option<u64>,
        #[arg(long, default_value_t = 8)]
        t: usize,
        #[command(flatten)]
        fixture: FixtureArgs,
        #[command(flatten)]
        mc: McCommon,
    },
    /// |A|²(P_I + P_II) against 1.
    UnionBound {
        #[arg(long)]
        a_size: usize,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        p_type_i: f64,
        #[arg(long)]
        p_type_ii: f64,
        #[command(flatten)]
        mc: McCommon,
    },
    /// Zero-sum frequencies of Type I and Type II intervals.
    IntervalEvents {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[arg(long)]
        max_len: Option<usize>,
        #[command(flatten)]
        mc: McCommon,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Construction(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ConstructionFailed { .. }
            | Error::SearchExhausted { .. }
            | Error::RectificationInfeasible { .. }
            | Error::Assembly(_) => CliError::Construction(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult = std::result::Result<i32, CliError>;

/// Parses `args` (including the program name) and runs the command,
/// writing to `stdout` and `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Sequence(a) => cmd_sequence(a, stdout),
        Cmd::Verify(a) => cmd_verify(a, stdout),
        Cmd::Decompose(a) => cmd_decompose(a, stdout),
        Cmd::Rectify(a) => cmd_rectify(a, stdout),
        Cmd::Dissociate(a) => cmd_dissociate(a, stdout),
        Cmd::Oracle(a) => cmd_oracle(a, stdout),
        Cmd::Census(a) => cmd_census(a, stdout),
        Cmd::Mc(a) => cmd_mc(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Construction(msg)) => {
            let _ = writeln!(stderr, "construction failed: {msg}");
            EXIT_CONSTRUCTION
        }
    }
}

fn emit(common: &Common, stdout: &mut dyn Write, body: &[u8], summary: &str) -> std::result::Result<(), CliError> {
    match &common.out {
        Some(path) => {
            fs::write(path, body)?;
            writeln!(stdout, "{summary}")?;
        }
        None => stdout.write_all(body)?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn reduce_all(m: &Modulus, raw: &[i128]) -> std::result::Result<Vec<u64>, CliError> {
    raw.iter()
        .map(|&x| {
            if x < 0 {
                Ok(m.reduce(x))
            } else {
                let v = u64::try_from(x).map_err(|_| CliError::Usage(format!("{x} does not fit in u64")))?;
                Ok(m.check(v)?)
            }
        })
        .collect()
}

#[derive(Deserialize)]
struct SetFile {
    k: Option<u64>,
    #[serde(alias = "ordering")]
    elements: Vec<u64>,
}

fn read_numbers(path: &Path) -> std::result::Result<(Option<u64>, Vec<i128>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Ok(f) = serde_json::from_str::<SetFile>(&text) {
        return Ok((f.k, f.elements.into_iter().map(i128::from).collect()));
    }
    let nums = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i128>().map_err(|_| CliError::Usage(format!("{}: bad number {t:?}", path.display()))))
        .collect::<std::result::Result<_, _>>()?;
    Ok((None, nums))
}

/// Modulus and raw residues from `--set` or `--modulus`/`--elements`.
fn load_raw(
    modulus: Option<u64>,
    set: Option<&Path>,
    elements: Option<&[i128]>,
) -> std::result::Result<(Modulus, Vec<u64>), CliError> {
    let (file_k, raw) = match (set, elements) {
        (Some(p), _) => read_numbers(p)?,
        (None, Some(e)) => (None, e.to_vec()),
        (None, None) => return Err(CliError::Usage("give --set FILE or --elements LIST".into())),
    };
    let k = match (modulus, file_k) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Usage(format!("--modulus {a} disagrees with k = {b} in the file")))
        }
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => return Err(CliError::Usage("--modulus is required".into())),
    };
    let m = Modulus::new(k)?;
    let xs = reduce_all(&m, &raw)?;
    Ok((m, xs))
}

fn load_set(args: &SetArgs) -> std::result::Result<GroundSet, CliError> {
    let (m, xs) = load_raw(args.modulus, args.set.as_deref(), args.elements.as_deref())?;
    let a = GroundSet::new(m, xs)?;
    a.require_nonzero()?;
    Ok(a)
}

fn resolve_goal(g: &GoalArgs, default: Goal) -> std::result::Result<Goal, CliError> {
    match (g.goal, g.t) {
        (_, Some(0)) => Err(CliError::Usage("--t must be at least 1".into())),
        (None | Some(GoalKind::Tweak), Some(t)) => Ok(Goal::TWeak(t)),
        (Some(GoalKind::Tweak), None) => Err(CliError::Usage("--goal tweak needs --t".into())),
        (Some(_), Some(_)) => Err(CliError::Usage("--t only applies to --goal tweak".into())),
        (Some(GoalKind::Valid), None) => Ok(Goal::Valid),
        (Some(GoalKind::Sequencing), None) => Ok(Goal::Sequencing),
        (None, None) => Ok(default),
    }
}

fn cmd_sequence(args: SequenceArgs, stdout: &mut dyn Write) -> CliResult {
    let mode = match args.mode {
        ModeArg::Auto => Mode::Auto,
        ModeArg::Classical => Mode::Classical,
        ModeArg::Tweak => Mode::Tweak,
    };
    if mode == Mode::Tweak && args.t.is_none() {
        return Err(CliError::Usage("--mode tweak requires --t".into()));
    }
    if args.t == Some(0) {
        return Err(CliError::Usage("--t must be at least 1".into()));
    }
    let a = load_set(&args.set)?;
    let cfg = PipelineConfig {
        mode,
        t: args.t,
        k_override: args.k,
        r_override: args.r,
        c1: args.c1,
        c2: args.c2,
        max_resamples: args.max_resamples,
        max_retries: args.max_retries,
        seed: args.common.seed,
        oracle_fallback: !args.no_oracle,
        exec: Execution::default(),
    };
    let fin = zkseq::pipeline::run(&a, &cfg)?;
    let summary = format!(
        "sequence: {} elements of Z_{} via {:?} ({:?} mode), {} resamples, {} retries",
        fin.ordering.len(),
        fin.k,
        fin.producer,
        fin.mode,
        fin.resamples,
        fin.retries
    )
    .to_lowercase();
    emit(&args.common, stdout, &to_json(&fin), &summary)?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: VerifyArgs, stdout: &mut dyn Write) -> CliResult {
    let (m, items) = load_raw(args.modulus, args.ordering.as_deref(), args.elements.as_deref())?;
    let o = Ordering::new(m, items)?;
    let goal = resolve_goal(&args.goal, Goal::Sequencing)?;
    let verdict = check(&o, goal);
    let body = json!({ "k": m.k(), "ordering": o.items(), "verdict": verdict });
    let summary = match &verdict.witness {
        None => format!("verify: {goal} pass"),
        Some(w) => format!("verify: {goal} fail, {w}"),
    };
    emit(&args.common, stdout, &to_json(&body), &summary)?;
    Ok(if verdict.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_decompose(args: DecomposeArgs, stdout: &mut dyn Write) -> CliResult {
    let a = load_set(&args.set)?;
    let r = args.r.unwrap_or_else(|| compute_r_tweak(a.modulus().p(), args.c1));
    let cfg = DecomposeConfig {
        retries: args.retries,
        seed: args.common.seed,
        method: args.method.into(),
        flat_fallback: args.flat_fallback,
        min_block: args.min_block,
        ..DecomposeConfig::default()
    };
    let (d, report) = decompose_with_report(&a, r, &cfg)?;
    let summary = format!(
        "decompose: |P| = {}, |N| = {}, s = {}, lambda = {}, passes = {}",
        d.positive.len(),
        d.negative.len(),
        d.s(),
        d.lambda,
        report.passes()
    );
    emit(&args.common, stdout, &to_json(&json!({ "decomposition": d, "report": report })), &summary)?;
    Ok(EXIT_OK)
}

fn cmd_rectify(args: RectifyArgs, stdout: &mut dyn Write) -> CliResult {
    let a = load_set(&args.set)?;
    let res = rectify(&a, args.method.into())?;
    let summary = format!("rectify: lambda = {}, max_abs = {}", res.lambda, res.max_abs);
    emit(&args.common, stdout, &to_json(&res), &summary)?;
    Ok(EXIT_OK)
}

fn cmd_dissociate(args: DissociateArgs, stdout: &mut dyn Write) -> CliResult {
    let a = load_set(&args.set)?;
    let d = is_dissociated(&a)?;
    let body = if args.dimension {
        let dim = dimension(&a)?;
        let greedy = greedy_max_dissociated(&a, a.len());
        json!({ "dissociated": d, "dimension": dim, "greedy": greedy.elements() })
    } else {
        json!({ "dissociated": d })
    };
    emit(&args.common, stdout, &to_json(&body), &format!("dissociate: {d}"))?;
    Ok(EXIT_OK)
}

fn write_census(
    k: u64,
    max_size: Option<usize>,
    goal: Goal,
    common: &Common,
    stdout: &mut dyn Write,
) -> CliResult {
    let report = census(k, max_size.unwrap_or(usize::MAX), goal, Execution::default())?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    let fails = report.failures().count();
    let summary = format!(
        "census: Z_{k}, {} subsets, goal {goal}, {} achievable, {fails} without",
        report.rows.len(),
        report.rows.len() - fails
    );
    emit(common, stdout, &buf, &summary)?;
    Ok(EXIT_OK)
}

fn cmd_oracle(args: OracleArgs, stdout: &mut dyn Write) -> CliResult {
    let goal = resolve_goal(&args.goal, Goal::Sequencing)?;
    if args.set.set.is_none() && args.set.elements.is_none() {
        let k = args
            .set
            .modulus
            .ok_or_else(|| CliError::Usage("--modulus is required".into()))?;
        return write_census(k, args.max_size, goal, &args.common, stdout);
    }
    let a = load_set(&args.set)?;
    let found = brute_force(&a, goal)?;
    let body = json!({
        "k": a.modulus().k(),
        "goal": goal.to_string(),
        "found": found.is_some(),
        "ordering": found.as_ref().map(|o| o.items().to_vec()),
    });
    let summary = format!("oracle: {goal} {}", if found.is_some() { "found" } else { "none exists" });
    emit(&args.common, stdout, &to_json(&body), &summary)?;
    Ok(EXIT_OK)
}

fn cmd_census(args: CensusArgs, stdout: &mut dyn Write) -> CliResult {
    let goal = resolve_goal(&args.goal, Goal::Sequencing)?;
    write_census(args.modulus, args.max_size, goal, &args.common, stdout)
}

fn write_report(rep: &ExperimentReport, mc: &McCommon, stdout: &mut dyn Write) -> CliResult {
    let body = match mc.format {
        Format::Json => to_json(rep),
        Format::Csv => {
            let mut buf = Vec::new();
            rep.write_csv(&mut buf, true)?;
            buf
        }
    };
    let verdict = if rep.passed() { "pass" } else { "fail" };
    emit(&mc.common, stdout, &body, &format!("mc {}: {verdict}", rep.experiment))?;
    Ok(EXIT_OK)
}

fn powers_of_three() -> GroundSet {
    let m = Modulus::new(3u64.pow(13)).expect("valid modulus");
    GroundSet::new(m, (0..12).map(|i| 3u64.pow(i))).expect("distinct nonzero residues")
}

fn fixture(f: &FixtureArgs, seed: u64) -> std::result::Result<(zkseq::structure::Decomposition, zkseq::pn::PNOrderings), CliError> {
    let (_, d) = planted(PlantedConfig::default(), f.fixture_seed.unwrap_or(seed))?;
    let pn = order_pn(&d.positive, &d.negative, Some(d.delta), &[], &[], &PnConfig::default())?;
    Ok((d, pn))
}

fn cmd_mc(args: McArgs, stdout: &mut dyn Write) -> CliResult {
    let exec = Execution::default();
    match args.experiment {
        McCmd::Anticoncentration { set, quarters, x, mc } => {
            let seed = mc.common.seed;
            let base = if set.set.is_none() && set.elements.is_none() {
                powers_of_three()
            } else {
                load_set(&set)?
            };
            let d = DissociatedSet::new(base)?;
            let targets = match x {
                Some(xs) => xs,
                None => {
                    let mut q = quarters.clone();
                    q.sort_unstable();
                    q.dedup();
                    let size = d.as_set().len() / 4 * q.len();
                    let pool = representable_sums(&d, size)?;
                    sample_targets(&pool, 10, seed)
                }
            };
            let rep = estimate_anticoncentration_many(&d, &quarters, &targets, mc.trials, seed, exec)?;
            write_report(&rep, &mc, stdout)
        }
        McCmd::Acceptability { fixture: f, mc } => {
            let (d, pn) = fixture(&f, mc.common.seed)?;
            let rep = estimate_acceptability(&d, &pn, f.k, mc.trials, mc.common.seed, exec)?;
            write_report(&rep, &mc, stdout)
        }
        McCmd::Permissible {
            modulus,
            left,
            right,
            k,
            mc,
        } => {
            let m = Modulus::new(modulus)?;
            let rep = estimate_permissible_density(&m, &left, &right, k, mc.trials, mc.common.seed, exec)?;
            write_report(&rep, &mc, stdout)
        }
        McCmd::LllBudget {
            p_hat,
            degree,
            t,
            fixture: f,
            mc,
        } => {
            let rep = match degree {
                Some(deg) => lll_budget_from_degree(deg, p_hat)?,
                None => {
                    let (d, _) = fixture(&f, mc.common.seed)?;
                    let seed = mc.common.seed;
                    let plan = split_blocks(&d, f.k, seed, &mut zkseq::exec::rng_for(seed, 0))?;
                    lll_budget_report(&plan, t, p_hat)?
                }
            };
            write_report(&rep, &mc, stdout)
        }
        McCmd::UnionBound {
            a_size,
            r,
            p_type_i,
            p_type_ii,
            mc,
        } => {
            for p in [p_type_i, p_type_ii] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(CliError::Usage(format!("probability {p} outside [0, 1]")));
                }
            }
            write_report(&union_bound_report(a_size, r, p_type_i, p_type_ii), &mc, stdout)
        }
        McCmd::IntervalEvents { fixture: f, max_len, mc } => {
            let (d, pn) = fixture(&f, mc.common.seed)?;
            let rep = estimate_interval_events(&d, &pn, f.k, max_len, mc.trials, mc.common.seed, exec)?;
            write_report(&rep, &mc, stdout)
        }
    }
}
