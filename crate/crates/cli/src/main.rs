//! Command-line surface over the dictionary library: construction,
//! exhaustive verification, certification, brute-force spark search,
//! and the sparse-recovery demonstration, with stable scriptable
//! outputs.
//!
//! Exit codes: 0 on success, 1 when a computed check fails (a failing
//! verification, a certificate that cannot conclude, a demo below
//! 100%, or exporting an artifact that records failure), 2 for invalid
//! invocations — bad flags, out-of-cap parameters, unreadable paths.

mod artifacts;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sparkdict_core::{
    binomial, brute_spark, build_dictionary, certify, lemma_suite, mutual_coherence,
    prune_by_coherence, search_level_with_first, subset_lex_rank, uniqueness_demo, Check,
    FieldSpec, ScaledDictionary, SparkConclusion, SparkOutcome, SparkSearchReport,
};

use artifacts::Artifact;

/// Environment variable overriding the extension-degree cap n ≤ 20
/// (hard ceiling 31: row dimension 2^n must fit memory).
const SIZE_CAP_ENV: &str = "SPARKDICT_MAX_N";

/// The working grid `verify --all` sweeps: the five largest instances
/// where every check is exhaustive-friendly.
const VERIFY_GRID: [(u32, u32); 5] = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1)];

#[derive(Parser)]
#[command(
    name = "sparkdict",
    version,
    about = "Spark-optimal dictionaries, certified exactly"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the scaled dictionary as CSV plus a JSON manifest.
    Build(BuildArgs),
    /// Run the exhaustive identity checks; nonzero exit on any failure.
    Verify(VerifyArgs),
    /// Emit a spark certificate with exact coherence, bounds, and witness.
    Certify(CertifyArgs),
    /// Brute-force the spark by exact-rank subset enumeration.
    Spark(SparkArgs),
    /// Seeded exhaustive ℓ0-recovery demonstration.
    Recover(RecoverArgs),
    /// Re-serialize an existing JSON artifact between formats.
    Export(ExportArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Subfield exponent: the construction uses q = 2^r bases plus one.
    #[arg(short, long, value_parser = clap::value_parser!(u32).range(1..))]
    r: u32,
    /// Tower height: signals live in dimension q^(2t) = 2^(2tr).
    #[arg(short, long, value_parser = clap::value_parser!(u32).range(1..))]
    t: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Directory receiving dictionary_r{r}_t{t}.csv and
    /// manifest_r{r}_t{t}.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Subfield exponent (with -t; or use --all).
    #[arg(short, long, requires = "t", conflicts_with = "all",
          value_parser = clap::value_parser!(u32).range(1..))]
    r: Option<u32>,
    /// Tower height (with -r; or use --all).
    #[arg(short, long, requires = "r", conflicts_with = "all",
          value_parser = clap::value_parser!(u32).range(1..))]
    t: Option<u32>,
    /// Verify the whole working grid.
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SparkArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Largest subset size to test before reporting a lower bound.
    #[arg(long)]
    k_max: usize,
    /// Test every size from 2 up, even sizes the 1 + 1/μ bound rules out.
    #[arg(long)]
    no_prune: bool,
    /// Worker threads for the subset scan (results are identical).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(usize))]
    threads: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RecoverArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Number of planted random signals.
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// PRNG seed recorded in the report.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ExportArgs {
    /// Path to an existing JSON artifact (certificate, spark report,
    /// demo report, or manifest).
    input: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Dispatches a parsed invocation; `Ok(false)` means the command ran
/// but a computed check failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Spark(args) => cmd_spark(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Export(args) => cmd_export(args),
    }
}

/// Builds the field description under the (possibly overridden) size
/// cap.
fn spec_for(r: u32, t: u32) -> Result<FieldSpec> {
    let cap = match std::env::var(SIZE_CAP_ENV) {
        Ok(raw) => raw
            .parse::<u32>()
            .with_context(|| format!("{SIZE_CAP_ENV} must be an integer, got {raw:?}"))?,
        Err(_) => sparkdict_core::field::DEFAULT_DEGREE_CAP,
    };
    FieldSpec::build_capped(r, t, cap.min(sparkdict_core::field::HARD_DEGREE_CAP))
        .map_err(|e| anyhow!("invalid parameters r={r} t={t}: {e}"))
}

fn cmd_build(args: BuildArgs) -> Result<bool> {
    let spec = spec_for(args.spec.r, args.spec.t)?;
    let d = build_dictionary(&spec);
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let csv_path = args
        .out
        .join(format!("dictionary_r{}_t{}.csv", spec.r(), spec.t()));
    let manifest_path = args
        .out
        .join(format!("manifest_r{}_t{}.json", spec.r(), spec.t()));
    artifacts::write_dictionary_csv(&d, &csv_path)?;
    artifacts::emit(
        &artifacts::stable_json(&artifacts::manifest(&d))?,
        Some(&manifest_path),
    )?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", manifest_path.display());
    Ok(true)
}

#[derive(Serialize)]
struct VerifyEntry {
    spec: FieldSpec,
    checks: Vec<Check>,
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let points: Vec<(u32, u32)> = if args.all {
        VERIFY_GRID.to_vec()
    } else {
        match (args.r, args.t) {
            (Some(r), Some(t)) => vec![(r, t)],
            _ => bail!("verify needs -r and -t together, or --all"),
        }
    };
    let mut entries = Vec::new();
    for (r, t) in points {
        let spec = spec_for(r, t)?;
        let checks = lemma_suite(&spec).map_err(|e| anyhow!("cannot verify r={r} t={t}: {e}"))?;
        entries.push(VerifyEntry { spec, checks });
    }
    let all_pass = entries.iter().all(|e| e.checks.iter().all(|c| c.pass));
    match args.output.format {
        Format::Json => artifacts::emit(
            &artifacts::stable_json(&entries)?,
            args.output.out.as_deref(),
        )?,
        Format::Text => {
            let mut text = String::new();
            for entry in &entries {
                for check in &entry.checks {
                    let mark = if check.pass { "ok  " } else { "FAIL" };
                    text.push_str(&format!(
                        "{mark} r={} t={} {}: {}\n",
                        entry.spec.r(),
                        entry.spec.t(),
                        check.name,
                        check.detail
                    ));
                }
            }
            artifacts::emit(&text, args.output.out.as_deref())?;
        }
        Format::Csv => bail!("verify has no CSV form; use json or text"),
    }
    Ok(all_pass)
}

fn cmd_certify(args: CertifyArgs) -> Result<bool> {
    let spec = spec_for(args.spec.r, args.spec.t)?;
    let cert = certify(&spec);
    let ok = cert.all_checks_pass() && matches!(cert.concluded_spark, SparkConclusion::Exact(_));
    match args.output.format {
        Format::Json => {
            artifacts::emit(&artifacts::stable_json(&cert)?, args.output.out.as_deref())?
        }
        Format::Text => artifacts::emit(
            &artifacts::certificate_text(&cert),
            args.output.out.as_deref(),
        )?,
        Format::Csv => bail!("certify has no direct CSV form; export the JSON instead"),
    }
    Ok(ok)
}

fn cmd_spark(args: SparkArgs) -> Result<bool> {
    let spec = spec_for(args.spec.r, args.spec.t)?;
    let d = build_dictionary(&spec);
    let prune = !args.no_prune;
    let started = Instant::now();
    let report = if args.threads > 1 {
        parallel_spark(&d, args.k_max, prune, args.threads)?
    } else {
        brute_spark(&d, args.k_max, prune).map_err(|e| anyhow!("{e}"))?
    };
    let measured_ms = started.elapsed().as_millis();
    match args.output.format {
        // JSON keeps elapsed_ms null so identical runs stay
        // byte-identical; the text form carries the measurement.
        Format::Json => artifacts::emit(
            &artifacts::stable_json(&report)?,
            args.output.out.as_deref(),
        )?,
        Format::Text => artifacts::emit(
            &artifacts::spark_report_text(&report, Some(measured_ms)),
            args.output.out.as_deref(),
        )?,
        Format::Csv => bail!("spark has no direct CSV form; export the JSON instead"),
    }
    Ok(true)
}

/// Level-by-level scan distributing first columns across a thread
/// pool. `find_map_first` keeps the lexicographically earliest hit, and
/// the examined count is reconstructed from completed-level binomials
/// plus the witness's lexicographic rank — so the report is
/// byte-identical to the sequential one under any schedule.
fn parallel_spark(
    d: &ScaledDictionary,
    k_max: usize,
    prune: bool,
    threads: usize,
) -> Result<SparkSearchReport> {
    if k_max < 2 {
        bail!("k_max must be at least 2, got {k_max}");
    }
    if k_max > d.num_columns() {
        bail!(
            "k_max {k_max} exceeds the {} available columns",
            d.num_columns()
        );
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building the worker pool")?;
    let mu = prune.then(|| mutual_coherence(d));
    let cols = d.num_columns();
    let mut examined = 0u64;
    for k in 2..=k_max {
        if let Some(mu) = mu {
            if prune_by_coherence(mu, k) {
                continue;
            }
        }
        let hit = pool.install(|| {
            (0..=cols - k).into_par_iter().find_map_first(|first| {
                let mut scratch = 0u64;
                search_level_with_first(d, k, first, &mut scratch)
            })
        });
        if let Some(witness) = hit {
            examined += u64::try_from(subset_lex_rank(&witness.column_indices, cols) + 1)
                .expect("leaf count fits u64");
            return Ok(SparkSearchReport {
                outcome: SparkOutcome::Exact(witness.size() as u64),
                witness: Some(witness),
                subsets_examined: examined,
                elapsed_ms: None,
            });
        }
        examined += u64::try_from(binomial(cols as u64, k as u64)).expect("leaf count fits u64");
    }
    Ok(SparkSearchReport {
        outcome: SparkOutcome::AtLeast(k_max as u64 + 1),
        witness: None,
        subsets_examined: examined,
        elapsed_ms: None,
    })
}

fn cmd_recover(args: RecoverArgs) -> Result<bool> {
    let spec = spec_for(args.spec.r, args.spec.t)?;
    let report = uniqueness_demo(&spec, args.trials, args.seed);
    let ok = report.successes == report.trials && report.collision_exhibit.synthesized_equal;
    match args.output.format {
        Format::Json => artifacts::emit(
            &artifacts::stable_json(&report)?,
            args.output.out.as_deref(),
        )?,
        Format::Text => {
            artifacts::emit(&artifacts::demo_text(&report), args.output.out.as_deref())?
        }
        Format::Csv => bail!("recover has no direct CSV form; export the JSON instead"),
    }
    Ok(ok)
}

fn cmd_export(args: ExportArgs) -> Result<bool> {
    let raw = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&raw).with_context(|| format!("parsing {}", args.input.display()))?;
    let artifact = Artifact::detect(&value)?;
    let rendered = match args.output.format {
        Format::Json => artifact.to_json()?,
        Format::Text => artifact.to_text(),
        Format::Csv => artifact.to_csv()?,
    };
    artifacts::emit(&rendered, args.output.out.as_deref())?;
    Ok(artifact.records_success())
}
