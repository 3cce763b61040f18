//! The `gbfrs` command line: ball generation, attribute selection, noise
//! sweeps and an invariant check suite.

pub mod check;
pub mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::{Serialize, Serializer};

use crate::dataset::{load_csv, normalize_min_max, CsvOptions, Dataset, LabelColumn};
use crate::error::{Error, Result};
use crate::evaluation::{noise_sweep, ExperimentConfig, Method, NoiseKind};
use crate::feature_selection::{forward_select, CMode, SelectionMode, SelectionTrace};
use crate::granular_ball::{generate, BallConfig, GranularBallSet, InitialCount};

use check::{run_checks, CheckSettings};
use config::{expand_config_args, DatasetFingerprint, RunHeader};

/// Overrides `--seed` (and `--seeds` for sweeps) when set.
pub const SEED_ENV: &str = "GBFRS_SEED";

fn display<T: std::fmt::Display, S: Serializer>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Comma-separated list, or `start:stop:step` for floats.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

impl std::str::FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
            let (start, stop, step) = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(format!("bad range {s:?}"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            // round to 12 decimals so 0.6 + 8 * 0.05 lands on 1.0
            let values = (0..=count)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect();
            return Ok(FloatList(values));
        }
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(FloatList)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SeedList(pub Vec<u64>);

impl std::str::FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(SeedList)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MethodList(pub Vec<Method>);

impl std::str::FromStr for MethodList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.split(',')
            .map(|x| x.trim().parse::<Method>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(MethodList)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gbfrs",
    version,
    about = "Granular-ball fuzzy rough set feature selection"
)]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition a dataset into granular-balls and write them as JSON.
    #[command(args_override_self = true)]
    GenerateBalls(GenerateArgs),
    /// Greedy forward attribute selection.
    #[command(args_override_self = true)]
    Select(SelectArgs),
    /// Cross-validated accuracy of each method across noise levels.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Run the invariant suite against a dataset.
    #[command(args_override_self = true)]
    Check(CheckArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// CSV file with one row per sample.
    #[arg(long)]
    pub input: PathBuf,

    /// Label column: a header name, a zero-based index or `last`.
    #[arg(long = "label-col", default_value = "last")]
    #[serde(serialize_with = "display")]
    pub label_col: LabelColumn,

    /// Whether the first row is a header.
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub header: bool,

    /// Min-max normalize attributes to [0,1] before use.
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub normalize: bool,

    /// `key = value` file of flags; command-line flags take precedence.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,

    /// Purity threshold T in (0,1].
    #[arg(long, default_value_t = 1.0)]
    pub purity: f64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Initial cluster count: `ceil` or `floor` of sqrt(n), or a number.
    #[arg(long = "initial-balls", default_value = "ceil")]
    #[serde(serialize_with = "display")]
    pub initial_balls: InitialCount,

    /// Ball set JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Gbfrs,
    Classic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,

    #[arg(long, value_enum, default_value_t = ModeArg::Gbfrs)]
    pub mode: ModeArg,

    #[arg(long, default_value_t = 1.0)]
    pub purity: f64,

    /// `schedule` (C = |B|) or `fixed:<value>`.
    #[arg(long = "c-mode", default_value = "schedule")]
    #[serde(serialize_with = "display")]
    pub c_mode: CMode,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long = "initial-balls", default_value = "ceil")]
    #[serde(serialize_with = "display")]
    pub initial_balls: InitialCount,

    /// Reuse a ball set written by `generate-balls` instead of generating.
    #[arg(long)]
    pub balls: Option<PathBuf>,

    /// Selection trace JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,

    /// Purity thresholds searched per training fold: `a,b,c` or `start:stop:step`.
    #[arg(long = "purity-grid", default_value = "0.6:1.0:0.05")]
    pub purity_grid: FloatList,

    /// Noise levels: `a,b,c` or `start:stop:step`.
    #[arg(long, default_value = "0:0.3:0.05")]
    pub noise: FloatList,

    #[arg(long = "noise-kind", default_value = "label")]
    #[serde(serialize_with = "display")]
    pub noise_kind: NoiseKind,

    #[arg(long, default_value = "gbfrs,classic-frs,all-features")]
    pub methods: MethodList,

    #[arg(long, default_value = "1")]
    pub seeds: SeedList,

    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    #[arg(long = "inner-folds", default_value_t = 3)]
    pub inner_folds: usize,

    #[arg(long = "knn-k", default_value_t = 3)]
    pub knn_k: usize,

    #[arg(long = "c-mode", default_value = "schedule")]
    #[serde(serialize_with = "display")]
    pub c_mode: CMode,

    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub stratified: bool,

    #[arg(long = "initial-balls", default_value = "ceil")]
    #[serde(serialize_with = "display")]
    pub initial_balls: InitialCount,

    /// Record wall-clock seconds per cell. Timed reports are not byte-reproducible.
    #[arg(long, default_value_t = false, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub timing: bool,

    /// Report JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Flat per-cell CSV path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,

    /// Purity thresholds to build ball sets at.
    #[arg(long = "purity-grid", default_value = "0.6,0.8,1.0")]
    pub purity_grid: FloatList,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Random attribute subsets drawn per property.
    #[arg(long, default_value_t = 20)]
    pub subsets: usize,

    #[arg(long = "initial-balls", default_value = "ceil")]
    #[serde(serialize_with = "display")]
    pub initial_balls: InitialCount,

    /// Check report JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn check_purity(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidPurity(t))
    }
}

fn load(data: &DataArgs) -> Result<(Dataset, DatasetFingerprint)> {
    let opts = CsvOptions {
        label_column: data.label_col.clone(),
        has_header: data.header,
    };
    let loaded = load_csv(&data.input, &opts)?;
    for w in &loaded.warnings {
        log::warn!("{w}");
    }
    let fingerprint = DatasetFingerprint::of_file(&data.input, &loaded.dataset)?;
    let ds = if data.normalize {
        normalize_min_max(&loaded.dataset)
    } else {
        loaded.dataset
    };
    Ok((ds, fingerprint))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: Option<&Path>) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}

/// Pretty JSON with a trailing newline, to `path` or stdout.
fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes()).map_err(io_err(path))?;
            w.flush().map_err(io_err(path))
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(io_err(None)),
    }
}

#[derive(Serialize)]
struct BallSetOutput<'a> {
    header: RunHeader,
    #[serde(flatten)]
    set: &'a GranularBallSet,
}

fn ball_summary(gbs: &GranularBallSet, ds: &Dataset) -> String {
    // bins [0.5,0.6), ..., [0.9,1.0), 1.0; anything lower goes in the first
    let mut bins = [0usize; 6];
    for b in &gbs.balls {
        let idx = if b.purity >= 1.0 {
            5
        } else {
            ((b.purity * 10.0).floor() as isize - 5).clamp(0, 4) as usize
        };
        bins[idx] += 1;
    }
    let labels = ["<0.6", "0.6-0.7", "0.7-0.8", "0.8-0.9", "0.9-1.0", "1.0"];
    let histogram: Vec<String> = labels
        .iter()
        .zip(bins)
        .map(|(l, c)| format!("{l}: {c}"))
        .collect();
    let coverage = match gbs.validate_against(ds) {
        Ok(()) => format!("ok ({} samples in exactly one ball)", ds.n()),
        Err(e) => format!("FAILED ({e})"),
    };
    let truncated = gbs
        .balls
        .iter()
        .filter(|b| b.truncated_radius.is_some())
        .count();
    format!(
        "balls: {}\npurity histogram: {}\ncoverage: {coverage}\ntruncated radii: {truncated}",
        gbs.len(),
        histogram.join(", ")
    )
}

fn cmd_generate_balls(mut args: GenerateArgs) -> Result<()> {
    if let Some(seed) = seed_override()? {
        args.seed = seed;
    }
    check_purity(args.purity)?;
    let (ds, fingerprint) = load(&args.data)?;
    let cfg = BallConfig {
        initial: args.initial_balls,
        ..BallConfig::new(args.purity, args.seed)
    };
    let gbs = generate(&ds, &cfg)?;
    let header = RunHeader::new("generate-balls", args.seed.into(), &args, fingerprint)?;
    emit_json(&BallSetOutput { header, set: &gbs }, args.out.as_deref())?;
    let summary = ball_summary(&gbs, &ds);
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceOutput {
    header: RunHeader,
    mode: SelectionMode,
    purity_threshold: Option<f64>,
    seed: u64,
    chosen: Vec<usize>,
    chosen_names: Vec<String>,
    dependency_path: Vec<f64>,
    significance_path: Vec<f64>,
    round_best_significance: Vec<f64>,
    stopped_reason: crate::feature_selection::StopReason,
    #[serde(serialize_with = "display")]
    c_mode: CMode,
}

fn load_balls(path: &Path, ds: &Dataset) -> Result<GranularBallSet> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let gbs: GranularBallSet = serde_json::from_reader(std::io::BufReader::new(file))?;
    gbs.validate_against(ds)?;
    Ok(gbs)
}

fn cmd_select(mut args: SelectArgs) -> Result<()> {
    if let Some(seed) = seed_override()? {
        args.seed = seed;
    }
    if args.mode == ModeArg::Gbfrs && args.balls.is_none() {
        check_purity(args.purity)?;
    }
    let (ds, fingerprint) = load(&args.data)?;
    let (trace, purity): (SelectionTrace, Option<f64>) = match args.mode {
        ModeArg::Classic => (
            forward_select(&ds, SelectionMode::ClassicPoint, args.c_mode),
            None,
        ),
        ModeArg::Gbfrs => {
            let gbs = match &args.balls {
                Some(path) => load_balls(path, &ds)?,
                None => generate(
                    &ds,
                    &BallConfig {
                        initial: args.initial_balls,
                        ..BallConfig::new(args.purity, args.seed)
                    },
                )?,
            };
            let t = gbs.purity_threshold;
            (
                forward_select(&gbs, SelectionMode::GranularBall, args.c_mode),
                Some(t),
            )
        }
    };
    let names: Vec<String> = trace
        .chosen
        .iter()
        .map(|&a| ds.attribute_names()[a].clone())
        .collect();
    let header = RunHeader::new("select", args.seed.into(), &args, fingerprint)?;
    let out = TraceOutput {
        header,
        mode: trace.mode,
        purity_threshold: purity,
        seed: args.seed,
        chosen: trace.chosen.clone(),
        chosen_names: names.clone(),
        dependency_path: trace.dependency_path.clone(),
        significance_path: trace.significance_path.clone(),
        round_best_significance: trace.round_best_significance.clone(),
        stopped_reason: trace.stopped_reason,
        c_mode: trace.c_mode,
    };
    match &args.out {
        Some(path) => {
            emit_json(&out, Some(path))?;
            println!("{}", names.join(","));
        }
        None => {
            emit_json(&out, None)?;
            eprintln!("{}", names.join(","));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportOutput<'a> {
    header: RunHeader,
    #[serde(flatten)]
    report: &'a crate::evaluation::EvaluationReport,
}

fn cmd_sweep(mut args: SweepArgs) -> Result<()> {
    if let Some(seed) = seed_override()? {
        args.seeds = SeedList(vec![seed]);
    }
    let cfg = ExperimentConfig {
        purity_grid: args.purity_grid.0.clone(),
        noise_levels: args.noise.0.clone(),
        noise_kind: args.noise_kind,
        folds: args.folds,
        inner_folds: args.inner_folds,
        knn_k: args.knn_k,
        seeds: args.seeds.0.clone(),
        methods: args.methods.0.clone(),
        c_mode: args.c_mode,
        stratified: args.stratified,
        initial_balls: args.initial_balls,
        record_timing: args.timing,
    };
    cfg.validate()?;
    let (ds, fingerprint) = load(&args.data)?;
    let name = args.data.input.file_stem().map_or_else(
        || "dataset".to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    let report = noise_sweep(&ds, &cfg, &name)?;
    let seed = serde_json::to_value(&args.seeds)?;
    let header = RunHeader::new("sweep", seed, &args, fingerprint)?;
    if let Some(path) = &args.csv {
        let mut w = create(path)?;
        writeln!(w, "# {}", serde_json::to_string(&header)?).map_err(io_err(Some(path)))?;
        report.write_csv(&mut w)?;
        w.flush().map_err(io_err(Some(path)))?;
    }
    emit_json(
        &ReportOutput {
            header,
            report: &report,
        },
        args.out.as_deref(),
    )?;
    if args.out.is_some() {
        for c in &report.cells {
            println!(
                "{:<13} {:<9} {:.2}  {:.4} ± {:.4}  |B|={:.2}",
                c.method.name(),
                c.noise_kind.to_string(),
                c.noise_level,
                c.mean_accuracy,
                c.std_accuracy,
                c.mean_subset_size
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckOutput {
    header: RunHeader,
    passed: bool,
    checks: Vec<check::CheckOutcome>,
}

/// Returns whether every check passed.
fn cmd_check(mut args: CheckArgs) -> Result<bool> {
    if let Some(seed) = seed_override()? {
        args.seed = seed;
    }
    if args.purity_grid.0.is_empty() {
        return Err(Error::Config("purity grid is empty".into()));
    }
    for &t in &args.purity_grid.0 {
        check_purity(t)?;
    }
    let (ds, fingerprint) = load(&args.data)?;
    let settings = CheckSettings {
        purities: args.purity_grid.0.clone(),
        seed: args.seed,
        subsets: args.subsets,
        initial: args.initial_balls,
    };
    let checks = run_checks(&ds, &settings)?;
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!(
            "{} {:<26} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    if let Some(path) = &args.out {
        let header = RunHeader::new("check", args.seed.into(), &args, fingerprint)?;
        emit_json(
            &CheckOutput {
                header,
                passed,
                checks,
            },
            Some(path),
        )?;
    }
    Ok(passed)
}

/// Exit code 2 for invalid parameters, 1 for everything else.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidPurity(_)
        | Error::InvalidNoiseRate(_)
        | Error::InvalidFoldCount { .. }
        | Error::KnnTooLarge { .. }
        | Error::InvalidDistanceParameter(_)
        | Error::Config(_) => 2,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenerateBalls(a) => cmd_generate_balls(a).map(|_| true),
        Command::Select(a) => cmd_select(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Check(a) => cmd_check(a),
    }
}

/// Entry point used by the binary.
pub fn main_with_args(args: Vec<OsString>) -> ExitCode {
    let args = match expand_config_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e).max(2));
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
