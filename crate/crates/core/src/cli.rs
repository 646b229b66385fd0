//! Command-line front end: `maxvar <subcommand> [--flags]`.
//!
//! Exit codes: 0 on success and on verification that passes, 1 when a
//! verification fails, 2 on usage, configuration or input errors. Every
//! structured output is written atomically and wraps the [`RunConfig`] it
//! came from.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::coverings::{multiscale_covers, random_dense_family};
use crate::error::{Error, Result};
use crate::experiments::{
    compute_envelopes, corpus_constants, golden_dir, lemma_names, lemma_suite, levelset_rate, optimality_experiment,
    variation_ratio, Envelopes, Shape, ShapeSpec,
};
use crate::grid::io::{read, write_atomic, write_field, write_set, GridFile};
use crate::grid::{level_set, variation_coarea, Domain, GridGeometry, GridSet};
use crate::maximal::{Operator, RadiusSchedule};
use crate::numeric::logspace;

#[derive(Parser, Debug)]
#[command(name = "maxvar", about = "Maximal functions of indicator sets on uniform grids", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rasterize a shape to a grid-set file.
    Gen(GenArgs),
    /// Apply a maximal operator to a grid set.
    Maximal(MaximalArgs),
    /// Level set of a field, or the level-set rate report of a set.
    Levelset(LevelsetArgs),
    /// Variation of a field, or the variation ratio of a set.
    Variation(VariationArgs),
    /// Multi-scale cover of a set with a random dense ball family.
    Cover(CoverArgs),
    /// Run the lemma suite.
    Verify(VerifyArgs),
    /// Run an experiment.
    Experiment(ExperimentArgs),
    /// Recompute and store the golden envelopes.
    EnvelopeRegen(EnvelopeArgs),
}

#[derive(Args, Debug, Clone)]
struct OpArgs {
    #[arg(long, value_enum, default_value_t = OpKind::Uncentered)]
    op: OpKind,
    /// `geom:RATIO`, `geom:RMIN,RMAX,RATIO`, `arith:STEP` or `list:R1,R2,...`
    /// (radii in world units; RATIO/STEP forms run from one cell to half
    /// the box diagonal).
    #[arg(long)]
    schedule: Option<String>,
    /// Grid-set file for `Ω`; free space when absent.
    #[arg(long)]
    domain: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OpKind {
    Dyadic,
    Uncentered,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// `ball:R`, `cube:H`, `annulus:RI,RO`, `balls:K`, `dyadic:LEVEL,P`, `half:OFFSET`.
    #[arg(long)]
    shape: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Cell side, or `auto` for `1/n`.
    #[arg(long, default_value = "auto")]
    h: String,
    #[arg(long, default_value_t = 2)]
    margin: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MaximalArgs {
    #[command(flatten)]
    op: OpArgs,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LevelsetArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Level for a field input.
    #[arg(long)]
    lambda: Option<f64>,
    /// λ grid for a set input: `log:LO,HI,COUNT` or `list:L1,L2,...`.
    #[arg(long, default_value = "log:0.001,0.3,25")]
    lambdas: String,
    #[command(flatten)]
    op: OpArgs,
    /// Grid-set output (field input) or JSON report (set input).
    #[arg(long)]
    out: PathBuf,
    /// Also write one CSV row per λ.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VariationArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    op: OpArgs,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    lambda: f64,
    /// Size of the random dense family.
    #[arg(long, default_value_t = 15)]
    balls: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    report: PathBuf,
    /// Also write one CSV row per cover ball.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// `all` or a single lemma name.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Run only the first N lemma checks.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write one CSV row per lemma.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ExperimentKind {
    /// Level-set rate of a small ball.
    Optimality,
    /// Corpus constants against the golden envelopes.
    Corpus,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    kind: ExperimentKind,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value = "log:0.001,0.3,25")]
    lambdas: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    golden_dir: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write one CSV row per λ (optimality) or per shape (corpus).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnvelopeArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long)]
    golden_dir: Option<PathBuf>,
}

/// Validated configuration of one invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub margin_cells: Option<usize>,
    pub operator: Option<String>,
    pub schedule: Option<RadiusSchedule>,
    pub lambdas: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub golden_dir: Option<PathBuf>,
}

impl RunConfig {
    fn new(command: &str, threads: Option<usize>) -> Self {
        RunConfig {
            command: command.to_string(),
            input: None,
            output: None,
            d: None,
            n: None,
            h: None,
            margin_cells: None,
            operator: None,
            schedule: None,
            lambdas: None,
            seed: None,
            threads,
            golden_dir: None,
        }
    }
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    config: &'a RunConfig,
    report: &'a T,
}

fn write_report<T: Serialize>(path: &Path, config: &RunConfig, report: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Wrapped { config, report })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn parse_numbers(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("not a number: {t:?}"))))
        .collect()
}

/// `log:LO,HI,COUNT` or `list:L1,L2,...`.
pub fn parse_lambdas(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("cannot parse λ grid {text:?}"));
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    let nums = parse_numbers(rest)?;
    let out = match (kind, nums.as_slice()) {
        ("log", &[lo, hi, count]) if lo > 0.0 && hi > lo && count >= 2.0 && count.fract() == 0.0 => {
            logspace(lo, hi, count as usize)
        }
        ("list", list) if !list.is_empty() => list.to_vec(),
        _ => return Err(bad()),
    };
    if out.iter().any(|l| !(*l > 0.0 && *l < 1.0)) || out.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("λ grid {text:?} must increase strictly within (0, 1)")));
    }
    Ok(out)
}

/// Schedule forms accepted by `--schedule`.
pub fn parse_schedule(text: &str, geometry: &GridGeometry) -> Result<RadiusSchedule> {
    let bad = || Error::InvalidSchedule(text.to_string());
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    let nums = parse_numbers(rest)?;
    let (r_min, r_max) = (geometry.h(), 0.5 * geometry.diameter());
    let s = match (kind, nums.as_slice()) {
        ("geom", &[ratio]) => RadiusSchedule::Geometric { r_min, r_max, ratio },
        ("geom", &[r_min, r_max, ratio]) => RadiusSchedule::Geometric { r_min, r_max, ratio },
        ("arith", &[step]) => RadiusSchedule::Arithmetic { r_min, r_max, step },
        ("list", radii) if !radii.is_empty() => RadiusSchedule::Explicit { radii: radii.to_vec() },
        _ => return Err(bad()),
    };
    s.validate(geometry)?;
    Ok(s)
}

fn operator(args: &OpArgs, geometry: &GridGeometry) -> Result<Operator> {
    Ok(match args.op {
        OpKind::Dyadic => Operator::Dyadic,
        OpKind::Uncentered => Operator::Uncentered {
            schedule: match &args.schedule {
                Some(s) => parse_schedule(s, geometry)?,
                None => RadiusSchedule::default_for(geometry),
            },
        },
    })
}

fn domain(args: &OpArgs, geometry: &GridGeometry) -> Result<Domain> {
    match &args.domain {
        None => Ok(Domain::FreeSpace),
        Some(p) => {
            let mask = read_set(p)?;
            mask.geometry().ensure_same(geometry)?;
            Ok(Domain::Within(mask))
        }
    }
}

fn read_set(path: &Path) -> Result<GridSet> {
    match read(path)? {
        GridFile::Set(s) => Ok(s),
        GridFile::Field(_) => Err(Error::InvalidArgument(format!("{} holds a field, not a set", path.display()))),
    }
}

fn describe_op(op: &Operator, config: &mut RunConfig) {
    config.operator = Some(op.name().to_string());
    if let Operator::Uncentered { schedule } = op {
        config.schedule = Some(schedule.clone());
    }
}

fn cmd_gen(a: &GenArgs, mut config: RunConfig) -> Result<i32> {
    if a.n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    let h = if a.h == "auto" {
        1.0 / a.n as f64
    } else {
        a.h.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad --h {:?}", a.h)))?
    };
    let geometry = GridGeometry::cube(a.d, a.n, h)?;
    let spec = ShapeSpec { shape: Shape::parse(&a.shape, a.d)?, seed: a.seed, margin_cells: a.margin };
    config.d = Some(a.d);
    config.n = Some(a.n);
    config.h = Some(h);
    config.margin_cells = Some(a.margin);
    config.seed = Some(a.seed);
    config.output = Some(a.out.clone());
    let set = crate::experiments::generate_shape(&spec, &geometry)?;
    write_set(&a.out, &set)?;
    println!("{} cells, measure {}", set.count(), set.measure());
    Ok(0)
}

fn cmd_maximal(a: &MaximalArgs, mut config: RunConfig) -> Result<i32> {
    let set = read_set(&a.input)?;
    let g = set.geometry().clone();
    let op = operator(&a.op, &g)?;
    let dom = domain(&a.op, &g)?;
    describe_op(&op, &mut config);
    let field = op.apply(&set, &dom)?;
    write_field(&a.out, &field)?;
    Ok(0)
}

fn cmd_levelset(a: &LevelsetArgs, mut config: RunConfig) -> Result<i32> {
    config.input = Some(a.input.clone());
    config.output = Some(a.out.clone());
    match read(&a.input)? {
        GridFile::Field(field) => {
            let lambda = a.lambda.ok_or_else(|| Error::InvalidArgument("a field input needs --lambda".into()))?;
            let set = level_set(&field, lambda)?;
            write_set(&a.out, &set)?;
            println!("{} cells above {lambda}", set.count());
        }
        GridFile::Set(set) => {
            let g = set.geometry().clone();
            let op = operator(&a.op, &g)?;
            let dom = domain(&a.op, &g)?;
            let lambdas = parse_lambdas(&a.lambdas)?;
            describe_op(&op, &mut config);
            config.lambdas = Some(lambdas.clone());
            let rep = levelset_rate(&set, &dom, &op, &lambdas)?;
            write_report(&a.out, &config, &rep)?;
            if let Some(path) = &a.csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["lambda", "perimeter", "measure", "empty", "c_dy", "c_un"]).map_err(csv_err)?;
                for r in &rep.rows {
                    w.write_record([
                        r.lambda.to_string(),
                        r.perimeter.to_string(),
                        r.measure.to_string(),
                        r.empty.to_string(),
                        r.c_dy.to_string(),
                        r.c_un.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                write_atomic(path, &w.into_inner().map_err(|e| Error::Format(e.to_string()))?)?;
            }
            match &rep.fit {
                Some(f) => println!("slope {:.4} ± {:.4}", f.slope, f.half_width),
                None => println!("slope unavailable"),
            }
        }
    }
    Ok(0)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn cmd_variation(a: &VariationArgs, mut config: RunConfig) -> Result<i32> {
    match read(&a.input)? {
        GridFile::Field(field) => {
            let dom = domain(&a.op, field.geometry())?;
            println!("{}", variation_coarea(&field, &dom)?);
        }
        GridFile::Set(set) => {
            let g = set.geometry().clone();
            let op = operator(&a.op, &g)?;
            let dom = domain(&a.op, &g)?;
            describe_op(&op, &mut config);
            println!("{}", variation_ratio(&set, &dom, &op)?);
        }
    }
    Ok(0)
}

fn cmd_cover(a: &CoverArgs, mut config: RunConfig) -> Result<i32> {
    let set = read_set(&a.input)?;
    config.input = Some(a.input.clone());
    config.output = Some(a.report.clone());
    config.seed = Some(a.seed);
    config.lambdas = Some(vec![a.lambda]);
    let family = random_dense_family(&set, a.lambda, a.balls, a.seed)?;
    let mut cover = multiscale_covers(&set, &family, a.lambda)?;
    cover.report.seed = Some(a.seed);
    write_report(&a.report, &config, &cover.report)?;
    if let Some(path) = &a.csv {
        write_atomic(path, cover.report.to_csv()?.as_bytes())?;
    }
    let ok = cover.report.passes();
    println!("{} balls over {} scales: {}", cover.report.balls.len(), cover.scales.len(), if ok { "pass" } else { "FAIL" });
    Ok(if ok { 0 } else { 1 })
}

fn cmd_verify(a: &VerifyArgs, mut config: RunConfig) -> Result<i32> {
    config.seed = Some(a.seed);
    config.output = a.report.clone();
    let mut report = lemma_suite(a.seed, if a.suite == "all" { a.budget.unwrap_or(usize::MAX) } else { usize::MAX });
    if a.suite != "all" {
        if !lemma_names().contains(&a.suite.as_str()) {
            return Err(Error::InvalidArgument(format!("unknown lemma {:?}; known: {:?}", a.suite, lemma_names())));
        }
        report.records.retain(|r| r.lemma == a.suite);
        report.timing.runtimes_ms.retain(|k, _| *k == a.suite);
    }
    for r in &report.records {
        println!("{:<24} {}", r.lemma, if r.as_expected() { "ok" } else { "UNEXPECTED" });
    }
    if let Some(path) = &a.report {
        write_report(path, &config, &report)?;
    }
    if let Some(path) = &a.csv {
        write_atomic(path, report.to_csv()?.as_bytes())?;
    }
    Ok(if report.all_as_expected() { 0 } else { 1 })
}

fn cmd_experiment(a: &ExperimentArgs, mut config: RunConfig) -> Result<i32> {
    config.seed = Some(a.seed);
    config.n = Some(a.n);
    config.d = Some(a.d);
    match a.kind {
        ExperimentKind::Optimality => {
            let lambdas = parse_lambdas(&a.lambdas)?;
            config.lambdas = Some(lambdas.clone());
            let rep = optimality_experiment(a.d, a.n, &lambdas)?;
            if let Some(path) = &a.report {
                write_report(path, &config, &rep)?;
            }
            if let Some(path) = &a.csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["lambda", "perimeter", "c_dy", "c_un"]).map_err(csv_err)?;
                for r in &rep.rate.rows {
                    w.write_record([r.lambda.to_string(), r.perimeter.to_string(), r.c_dy.to_string(), r.c_un.to_string()])
                        .map_err(csv_err)?;
                }
                write_atomic(path, &w.into_inner().map_err(|e| Error::Format(e.to_string()))?)?;
            }
            if let Some(f) = &rep.rate.fit {
                println!("slope {:.4} ± {:.4} (expected {:.4})", f.slope, f.half_width, rep.expected_slope);
            }
            Ok(if rep.passes() { 0 } else { 1 })
        }
        ExperimentKind::Corpus => {
            let dir = a.golden_dir.clone().unwrap_or_else(golden_dir);
            config.golden_dir = Some(dir.clone());
            let env = Envelopes::load(&dir)?;
            let (rows, max) = corpus_constants(a.n, a.seed)?;
            let checks = max.iter().map(|(k, v)| env.check(k, *v)).collect::<Result<Vec<_>>>()?;
            for c in &checks {
                println!("{:<28} {:>10.4} ≤ {:>10.4}  {}", c.name, c.measured, c.limit, if c.passes { "ok" } else { "FAIL" });
            }
            if let Some(path) = &a.report {
                write_report(path, &config, &(&rows, &checks))?;
            }
            if let Some(path) = &a.csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["index", "operator", "variation_ratio", "sup_c_dy", "sup_c_un"]).map_err(csv_err)?;
                for r in &rows {
                    w.write_record([
                        r.index.to_string(),
                        r.operator.clone(),
                        r.variation_ratio.to_string(),
                        r.sup_c_dy.to_string(),
                        r.sup_c_un.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                write_atomic(path, &w.into_inner().map_err(|e| Error::Format(e.to_string()))?)?;
            }
            Ok(if checks.iter().all(|c| c.passes) { 0 } else { 1 })
        }
    }
}

fn cmd_envelope(a: &EnvelopeArgs, mut config: RunConfig) -> Result<i32> {
    let dir = a.golden_dir.clone().unwrap_or_else(golden_dir);
    config.golden_dir = Some(dir.clone());
    config.seed = Some(a.seed);
    config.n = Some(a.n);
    let env = compute_envelopes(a.seed, a.n)?;
    env.save(&dir)?;
    for (k, v) in &env.values {
        println!("{k:<28} {v:.6}");
    }
    Ok(0)
}

/// Parse `argv` (program name first) and run one subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return 2;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let name = match &cli.command {
        Command::Gen(_) => "gen",
        Command::Maximal(_) => "maximal",
        Command::Levelset(_) => "levelset",
        Command::Variation(_) => "variation",
        Command::Cover(_) => "cover",
        Command::Verify(_) => "verify",
        Command::Experiment(_) => "experiment",
        Command::EnvelopeRegen(_) => "envelope-regen",
    };
    let config = RunConfig::new(name, cli.threads);
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a, config),
        Command::Maximal(a) => cmd_maximal(a, config),
        Command::Levelset(a) => cmd_levelset(a, config),
        Command::Variation(a) => cmd_variation(a, config),
        Command::Cover(a) => cmd_cover(a, config),
        Command::Verify(a) => cmd_verify(a, config),
        Command::Experiment(a) => cmd_experiment(a, config),
        Command::EnvelopeRegen(a) => cmd_envelope(a, config),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
