//! `pbdnf`: generate, check, decompose, transform, restrict and learn
//! pseudo-Boolean DNFs and submodular functions.
//!
//! Every run prints (or writes to `--out`) one JSON report
//! `{"run": …, "result": …, "timestamp": …}` whose `run` echoes the parsed
//! arguments. Errors go to stderr as `{"error": {"kind", "message"}}`.

mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pbdnf::construct::{self, general_dnf_traced, monotone_dnf, verify};
use pbdnf::fourier::{formula_spectrum, range_encode, wht};
use pbdnf::learner::{
    self, class_members, empirical_error, learn_submodular, pac_learn_pbdnf, properize, test_submodularity, Backend,
    ClassSpec, ErrorMode, LearnerConfig, SampledConfig,
};
use pbdnf::restrictions::{rows_to_csv, switching_experiment, RestrictionFamily};
use pbdnf::submodular::{is_monotone, monotonicity_violation, submodularity_violation};
use pbdnf::{cube, CountingOracle, Formula};
use serde::Serialize;
use serde_json::{json, Value};

use input::Target;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "pbdnf",
    version,
    about = "Pseudo-Boolean DNFs, submodular functions and their Fourier learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Generate a formula or set function from a generator spec.
    Gen(GenArgs),
    /// Evaluate the input at one point.
    Eval(EvalArgs),
    /// Tabulate the input as a set function.
    Table(TargetArgs),
    /// Check submodularity and monotonicity.
    Check(TargetArgs),
    /// Convert a submodular function into a pseudo-Boolean DNF.
    Decompose(DecomposeArgs),
    /// Fourier spectrum of the input mapped onto [-1, 1].
    Wht(WhtArgs),
    /// Random-restriction depth experiment.
    Switchlab(SwitchArgs),
    /// Learn the input from membership queries.
    Learn(LearnArgs),
    /// Learn-then-check submodularity tester (n <= 4).
    TestSubmodular(TestArgs),
    /// Learn the input and project onto an enumerable class.
    Properize(ProperizeArgs),
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// Seed for every random choice of the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validate inputs without computing.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args, Serialize)]
struct Source {
    /// JSON input: formula {n, terms}, set function {n, values},
    /// graph {n, edges} or set system {universe, sets}.
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Generator spec, e.g. `formula:n=10,k=2,r=3,s=4` or `zoo:n=8`.
    #[arg(long)]
    gen: Option<String>,
}

impl Source {
    fn load(&self, seed: u64) -> Result<Target> {
        match (&self.input, &self.gen) {
            (Some(path), _) => input::read_target(path),
            (None, Some(spec)) => input::generate(spec, seed),
            (None, None) => bail!(CliError("one of --input or --gen is required".into())),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct GenArgs {
    /// Generator spec.
    #[arg(long)]
    gen: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    #[command(flatten)]
    source: Source,
    /// Point as a bit string (x0 first), `0b…` mask or integer mask.
    #[arg(long)]
    point: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct TargetArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct DecomposeArgs {
    #[command(flatten)]
    source: Source,
    /// Use the monotone construction (input must be monotone).
    #[arg(long)]
    monotone: bool,
    /// Compare the formula with the input on every point.
    #[arg(long)]
    verify: bool,
    /// Drop subsumed terms.
    #[arg(long)]
    simplify: bool,
    /// Include the recursion sets and their terms.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct WhtArgs {
    #[command(flatten)]
    source: Source,
    /// Range bound of the encoding; defaults to the input's maximum value.
    #[arg(long)]
    r: Option<u32>,
    /// Keep coefficients with |c| >= theta.
    #[arg(long)]
    theta: Option<f64>,
    /// Keep coefficients of degree <= tau.
    #[arg(long)]
    tau: Option<usize>,
    /// Write the coefficients as CSV (set,degree,value).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct SwitchArgs {
    #[command(flatten)]
    source: Source,
    /// Width bound; also the width of the generated formula.
    #[arg(long)]
    k: usize,
    /// Range bound; also the range of the generated formula.
    #[arg(long)]
    r: u32,
    /// Star probability of i.i.d. restrictions.
    #[arg(long, conflicts_with = "live")]
    p: Option<f64>,
    /// Exact number of live variables instead of --p.
    #[arg(long)]
    live: Option<usize>,
    /// Depth thresholds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    s: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Variables of the generated formula (without --input/--gen).
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Terms of the generated formula (without --input/--gen).
    #[arg(long, default_value_t = 6)]
    terms: usize,
    /// Write the rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum BackendKind {
    Exact,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
struct LearnOptions {
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = BackendKind::Exact)]
    backend: BackendKind,
    /// Threshold of the sampled backend.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    bucket_samples: Option<u64>,
    #[arg(long)]
    coefficient_samples: Option<u64>,
    #[arg(long)]
    max_buckets: Option<usize>,
    /// Maximum number of membership queries.
    #[arg(long)]
    budget: Option<u64>,
    /// Agnostic mode (not supported).
    #[arg(long)]
    agnostic: bool,
}

impl LearnOptions {
    fn config(&self, k: usize, r: u32, seed: u64) -> Result<LearnerConfig> {
        let backend = match self.backend {
            BackendKind::Exact => Backend::Exact,
            BackendKind::Sampled => Backend::Sampled(SampledConfig {
                theta: self
                    .theta
                    .ok_or_else(|| CliError("the sampled backend needs --theta".into()))?,
                bucket_samples: self.bucket_samples,
                coefficient_samples: self.coefficient_samples,
                max_buckets: self.max_buckets,
            }),
        };
        let mut config = LearnerConfig::new(self.epsilon, self.delta, k, r.max(1), backend).with_seed(seed);
        config.agnostic = self.agnostic;
        config.validate()?;
        Ok(config)
    }

    fn oracle<'a>(&self, target: &'a Target) -> TargetOracle<'a> {
        match self.budget {
            Some(b) => CountingOracle::with_budget(TargetRef(target), b),
            None => CountingOracle::new(TargetRef(target)),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct LearnArgs {
    #[command(flatten)]
    source: Source,
    /// Width bound; defaults to the formula's width.
    #[arg(long)]
    k: Option<usize>,
    /// Range bound; defaults to the input's maximum value.
    #[arg(long)]
    r: Option<u32>,
    /// Treat the input as submodular and learn it as a DNF of width 2k.
    #[arg(long)]
    submodular: bool,
    #[command(flatten)]
    learn: LearnOptions,
    /// Include the learned spectrum in the report.
    #[arg(long)]
    emit_hypothesis: bool,
    /// Points sampled for the error estimate when n > 20.
    #[arg(long, default_value_t = 100_000)]
    error_samples: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct TestArgs {
    #[command(flatten)]
    source: Source,
    /// Range bound of the class; defaults to the input's maximum value.
    /// The tester's distance parameter is --epsilon; the learner runs at a
    /// quarter of it.
    #[arg(long)]
    k: Option<u32>,
    #[command(flatten)]
    learn: LearnOptions,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ClassKind {
    Submodular,
    MonotoneSubmodular,
    UniformMatroid,
    ConcaveCardinality,
}

#[derive(Debug, Args, Serialize)]
struct ProperizeArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value_t = ClassKind::Submodular)]
    class: ClassKind,
    /// Range bound of the class; defaults to the input's maximum value.
    #[arg(long)]
    k: Option<u32>,
    #[command(flatten)]
    learn: LearnOptions,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
struct CliError(String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

struct TargetRef<'a>(&'a Target);

impl pbdnf::PointFunction for TargetRef<'_> {
    type Value = u32;

    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn value_at(&self, x: cube::PointMask) -> u32 {
        match self.0 {
            Target::Formula(f) => f.value_at(x),
            Target::SetFunction(f) => f.value(x),
        }
    }
}

type TargetOracle<'a> = CountingOracle<TargetRef<'a>>;

fn dry_run(target: Option<&Target>) -> Value {
    match target {
        Some(t) => json!({"dry_run": true, "valid": true, "input": t.kind(), "n": t.dimension()}),
        None => json!({"dry_run": true, "valid": true}),
    }
}

fn check_table(n: usize) -> Result<()> {
    if n > learner::MAX_TABLE_VARS {
        bail!(pbdnf::Error::DimensionTooLarge {
            n,
            max: learner::MAX_TABLE_VARS
        });
    }
    Ok(())
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(command: &Command) -> Result<Value> {
    match command {
        Command::Gen(a) => {
            let target = input::generate(&a.gen, a.common.seed)?;
            if a.common.dry_run {
                return Ok(dry_run(Some(&target)));
            }
            Ok(serde_json::to_value(&target)?)
        }
        Command::Eval(a) => {
            let target = a.source.load(a.common.seed)?;
            let x = input::parse_point(&a.point, target.dimension())?;
            if a.common.dry_run {
                return Ok(dry_run(Some(&target)));
            }
            Ok(json!({"point": x, "value": target.value(x)?}))
        }
        Command::Table(a) => {
            let target = a.source.load(a.common.seed)?;
            check_table(target.dimension())?;
            if a.common.dry_run {
                return Ok(dry_run(Some(&target)));
            }
            Ok(serde_json::to_value(target.to_set_function()?)?)
        }
        Command::Check(a) => {
            let target = a.source.load(a.common.seed)?;
            check_table(target.dimension())?;
            if a.common.dry_run {
                return Ok(dry_run(Some(&target)));
            }
            let f = target.to_set_function()?;
            let violation = submodularity_violation(&f)?;
            let mono = monotonicity_violation(&f)?;
            Ok(json!({
                "n": f.dimension(),
                "submodular": violation.is_none(),
                "monotone": mono.is_none(),
                "submodularity_violation": violation,
                "monotonicity_violation": mono.map(|(set, i)| json!({"set": set, "element": i})),
                "range_max": f.range_max(),
            }))
        }
        Command::Decompose(a) => decompose(a),
        Command::Wht(a) => wht_command(a),
        Command::Switchlab(a) => switchlab(a),
        Command::Learn(a) => learn(a),
        Command::TestSubmodular(a) => {
            let target = a.source.load(a.common.seed)?;
            let k = a.k.unwrap_or(target.range_max());
            let config = a.learn.config(0, 1, a.common.seed)?;
            if target.dimension() > 4 {
                bail!(pbdnf::Error::ClassTooLarge(format!(
                    "the tester enumerates the class exhaustively and supports n <= 4 (got n={})",
                    target.dimension()
                )));
            }
            if a.common.dry_run {
                return Ok(dry_run(Some(&target)));
            }
            let oracle = a.learn.oracle(&target);
            let outcome = test_submodularity(&oracle, k, a.learn.epsilon, &config)?;
            Ok(json!({"outcome": outcome, "queries": oracle.queries_used()}))
        }
        Command::Properize(a) => properize_command(a),
    }
}

fn decompose(a: &DecomposeArgs) -> Result<Value> {
    let target = a.source.load(a.common.seed)?;
    check_table(target.dimension())?;
    if a.common.dry_run {
        return Ok(dry_run(Some(&target)));
    }
    let f = target.to_set_function()?;
    let (mut formula, groups) = if a.monotone {
        if !is_monotone(&f)? {
            bail!(pbdnf::Error::InvalidParameter(
                "--monotone needs a monotone input".into()
            ));
        }
        (monotone_dnf(&f), None)
    } else {
        let d = general_dnf_traced(&f);
        (d.formula, Some(d.groups))
    };
    if a.simplify {
        formula = formula.simplify();
    }
    let mut result = json!({
        "formula": formula,
        "terms": formula.size(),
        "width": formula.width(),
        "pos_width": formula.pos_width(),
        "neg_width": formula.neg_width(),
    });
    if a.trace {
        result["groups"] = serde_json::to_value(groups.unwrap_or_default())?;
        result["recursion_sets"] = serde_json::to_value(construct::recursion_sets(&f))?;
    }
    if a.verify {
        result["verify"] = serde_json::to_value(verify(&f, &formula)?)?;
    }
    Ok(result)
}

fn wht_command(a: &WhtArgs) -> Result<Value> {
    let target = a.source.load(a.common.seed)?;
    let r = a.r.unwrap_or(target.range_max()).max(1);
    if let Target::SetFunction(f) = &target {
        if f.range_max() > r {
            bail!(pbdnf::Error::ValueOutOfRange {
                value: f.range_max() as u64,
                max: r as u64
            });
        }
    }
    if a.common.dry_run {
        return Ok(dry_run(Some(&target)));
    }
    let n = target.dimension();
    let spectrum = match &target {
        Target::Formula(f) => {
            // The encoding is affine, so only the constant coefficient moves.
            let step = 2.0 / r as f64;
            formula_spectrum(f)?.affine(step, -1.0)
        }
        Target::SetFunction(f) => wht(&range_encode(f.table(), r)?)?,
    };
    let spectrum = match (a.theta, a.tau) {
        (None, None) => spectrum,
        (theta, tau) => spectrum.truncate(theta.unwrap_or(0.0), tau.unwrap_or(n)),
    };
    let levels: Vec<f64> = (0..=spectrum.degree()).map(|t| spectrum.level_l1(t)).collect();
    if let Some(path) = &a.csv {
        let mut text = String::from("set,degree,value\n");
        for (&s, &c) in spectrum.coeffs() {
            text.push_str(&format!("{s},{},{c}\n", cube::cardinality(s)));
        }
        write_file(path, &text)?;
    }
    Ok(json!({
        "r": r,
        "degree": spectrum.degree(),
        "sparsity": spectrum.len(),
        "l1": spectrum.l1(),
        "mass": spectrum.mass(),
        "level_l1": levels,
        "spectrum": spectrum,
    }))
}

fn switchlab(a: &SwitchArgs) -> Result<Value> {
    let formula: Formula = match (&a.source.input, &a.source.gen) {
        (None, None) => pbdnf::formula::random_formula(a.n, a.k, a.r, a.terms, a.common.seed)?,
        _ => match a.source.load(a.common.seed)? {
            Target::Formula(f) => f,
            Target::SetFunction(_) => bail!(CliError("switchlab needs a formula input".into())),
        },
    };
    let family = match (a.p, a.live) {
        (Some(p), None) if p > 0.0 && p <= 1.0 => RestrictionFamily::Iid { p },
        (None, Some(live)) if live <= formula.dimension() => RestrictionFamily::Fixed { live },
        (None, None) => bail!(CliError("one of --p or --live is required".into())),
        _ => bail!(pbdnf::Error::InvalidParameter(
            "--p must lie in (0, 1] and --live in 0..=n".into()
        )),
    };
    if formula.width() > a.k || formula.max_constant() > a.r {
        bail!(pbdnf::Error::InvalidParameter(format!(
            "formula has width {} and constants up to {}, above --k {} / --r {}",
            formula.width(),
            formula.max_constant(),
            a.k,
            a.r
        )));
    }
    if a.trials == 0 || a.s.is_empty() {
        bail!(pbdnf::Error::InvalidParameter(
            "--trials and --s must be nonempty".into()
        ));
    }
    if a.common.dry_run {
        return Ok(dry_run(Some(&Target::Formula(formula))));
    }
    let mut depths = a.s.clone();
    depths.sort_unstable();
    depths.dedup();
    let rows = switching_experiment(&formula, a.k, a.r, family, &depths, a.trials, a.common.seed)?;
    if let Some(path) = &a.csv {
        write_file(path, &rows_to_csv(&rows))?;
    }
    Ok(json!({"formula": formula, "family": family, "rows": rows}))
}

fn learn(a: &LearnArgs) -> Result<Value> {
    let target = a.source.load(a.common.seed)?;
    let n = target.dimension();
    let r = a.r.unwrap_or(target.range_max());
    if r < target.range_max() {
        bail!(pbdnf::Error::ValueOutOfRange {
            value: target.range_max() as u64,
            max: r as u64
        });
    }
    let k = match (a.k, &target) {
        (Some(k), _) => k,
        (None, Target::Formula(f)) => f.width(),
        (None, Target::SetFunction(_)) if a.submodular => 0,
        (None, Target::SetFunction(_)) => n,
    };
    let config = a.learn.config(k, r, a.common.seed)?;
    if matches!(config.backend, Backend::Exact) {
        check_table(n)?;
    }
    if a.common.dry_run {
        return Ok(dry_run(Some(&target)));
    }
    let oracle = a.learn.oracle(&target);
    let outcome = if a.submodular {
        learn_submodular(&oracle, r, &config)?
    } else {
        pac_learn_pbdnf(&oracle, &config)?
    };
    let mode = if n <= learner::MAX_TABLE_VARS {
        ErrorMode::Exact
    } else {
        ErrorMode::Sampled {
            samples: a.error_samples,
            seed: pbdnf::seed::split(a.common.seed, 1),
        }
    };
    let error = empirical_error(&outcome.hypothesis, &TargetRef(&target), mode)?;
    let mut result = json!({
        "report": outcome.report,
        "queries": oracle.queries_used(),
        "error": error,
    });
    if a.emit_hypothesis {
        result["hypothesis"] = serde_json::to_value(&outcome.hypothesis.spectrum)?;
    }
    Ok(result)
}

fn properize_command(a: &ProperizeArgs) -> Result<Value> {
    let target = a.source.load(a.common.seed)?;
    let n = target.dimension();
    let k = a.k.unwrap_or(target.range_max());
    let class = match a.class {
        ClassKind::Submodular => ClassSpec::Submodular { k },
        ClassKind::MonotoneSubmodular => ClassSpec::MonotoneSubmodular { k },
        ClassKind::UniformMatroid => ClassSpec::UniformMatroid,
        ClassKind::ConcaveCardinality => ClassSpec::ConcaveCardinality { k },
    };
    let config = a.learn.config(0, 1, a.common.seed)?;
    let max_n = match class {
        ClassSpec::Submodular { .. } | ClassSpec::MonotoneSubmodular { .. } => 4,
        _ => 10,
    };
    if n > max_n {
        bail!(pbdnf::Error::ClassTooLarge(format!(
            "{class:?} is enumerated only for n <= {max_n} (got n={n})"
        )));
    }
    if a.common.dry_run {
        return Ok(dry_run(Some(&target)));
    }
    let members = class_members(class, n)?;
    let oracle = a.learn.oracle(&target);
    let outcome = learn_submodular(&oracle, k, &config)?;
    let proper = properize(&outcome.hypothesis, &members)?;
    let distance = empirical_error(&proper.member, &TargetRef(&target), ErrorMode::Exact)?.error;
    Ok(json!({
        "class": class,
        "class_size": members.len(),
        "member": proper.member,
        "hypothesis_distance": proper.distance,
        "target_distance": distance,
        "queries": oracle.queries_used(),
        "report": outcome.report,
    }))
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<pbdnf::Error>() {
        e.kind()
    } else if err.downcast_ref::<CliError>().is_some() {
        "invalid_spec"
    } else if err.downcast_ref::<serde_json::Error>().is_some() {
        "invalid_input"
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else {
        "invalid_spec"
    }
}

fn report_error(kind: &str, message: &str) {
    let body = json!({"error": {"kind": kind, "message": message}});
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            e.exit()
        }
        Err(e) => {
            report_error("invalid_spec", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    let common = match &cli.command {
        Command::Gen(a) => &a.common,
        Command::Eval(a) => &a.common,
        Command::Table(a) | Command::Check(a) => &a.common,
        Command::Decompose(a) => &a.common,
        Command::Wht(a) => &a.common,
        Command::Switchlab(a) => &a.common,
        Command::Learn(a) => &a.common,
        Command::TestSubmodular(a) => &a.common,
        Command::Properize(a) => &a.common,
    };
    let outcome = run(&cli.command).and_then(|result| {
        let report = json!({
            "run": serde_json::to_value(&cli.command)?,
            "result": result,
            "timestamp": timestamp(),
        });
        let text = serde_json::to_string_pretty(&report)? + "\n";
        match &common.out {
            Some(path) => write_file(path, &text),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| anyhow!(e)),
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(error_kind(&e), &format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}
