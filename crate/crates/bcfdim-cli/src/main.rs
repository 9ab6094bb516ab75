//! `bcfdim`: JSON and CSV reports for certified dimension brackets, pressure
//! curves, spectrum constructions, inequality sweeps, digit expansions, and
//! the dimension-gap counterexample.
//!
//! Exit codes: 0 when the run's claim is certified, 2 when the run finished
//! with a non-certified or inconclusive result (including budget exhaustion),
//! 1 on usage errors. The word budget guard can be overridden with the
//! `BCFDIM_BUDGET` environment variable; everything else is a flag.

mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use bcfdim::expansion::{bcf_digits, bcf_eval, cf_digits};
use bcfdim::moebius::MoebiusWord;
use bcfdim::pressure::{dimension_bracket_opts, lambda_bracket_opts, Cutoffs, EngineOpts};
use bcfdim::spectrum::{find_gap_params, gap_demo, greedy_build_opts};
use bcfdim::systems::{make_system_with_k, parse_alphabet, parse_rational, Family, SystemSpec};
use clap::{Parser, Subcommand, ValueEnum};

use report::{emit, evidence_value, Report, RunConfig};
use verify::Lemma;

#[derive(Debug)]
enum CliError {
    Lib(bcfdim::Error),
    Usage(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "{e}"),
        }
    }
}

impl From<bcfdim::Error> for CliError {
    fn from(e: bcfdim::Error) -> Self {
        CliError::Lib(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            // bad arguments are usage errors; failed computations are not
            CliError::Usage(_) => 1,
            CliError::Lib(
                bcfdim::Error::InvalidInput(_)
                | bcfdim::Error::ParseAlphabet { .. }
                | bcfdim::Error::Unsupported(_),
            ) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "bcfdim", version, about = "certified dimension brackets for continued-fraction systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker count; reports are byte-identical for any value.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Report format; csv is available for pressure-curve and verify.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExpandKind {
    /// Backward digits b >= 2 via the ceiling rule.
    Backward,
    /// Standard (Gauss) digits a >= 1.
    Standard,
}

#[derive(Subcommand)]
enum Command {
    /// Certified two-sided Hausdorff dimension bracket for one alphabet.
    Dim {
        #[arg(long, default_value = "bcf")]
        system: String,
        /// Letters: comma-separated items `k`, `a..b`, or `a..` (cofinite).
        #[arg(long)]
        alphabet: String,
        /// Target bracket width.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Largest enumeration depth.
        #[arg(long, default_value_t = 12)]
        depth: u32,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// CSV/JSON curve of (t, lambda_lo, lambda_hi) over a t grid.
    PressureCurve {
        #[arg(long, default_value = "bcf")]
        system: String,
        #[arg(long)]
        alphabet: String,
        #[arg(long, default_value_t = 0.6)]
        t_min: f64,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        /// Number of grid points, endpoints included.
        #[arg(long, default_value_t = 9)]
        t_samples: u32,
        /// Enumeration depth for every grid point.
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Greedy subsystem whose dimension approaches a target from below.
    Spectrum {
        #[arg(long, default_value = "bcf")]
        system: String,
        /// Dimension value to realize.
        #[arg(long)]
        target_t: f64,
        /// Largest letter the greedy scan may use.
        #[arg(long, default_value_t = 64)]
        max_index: u64,
        /// Width target for the final bracket.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Seeded random sweep of one inequality family; JSON-lines report.
    Verify {
        #[arg(long, value_enum)]
        lemma: Lemma,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Digit expansion of a rational with the exact prefix interval.
    Expand {
        /// The value, e.g. `2/7` or `0.25`.
        #[arg(long)]
        value: String,
        /// Number of digits to produce.
        #[arg(long, default_value_t = 10)]
        digits: usize,
        #[arg(long, value_enum, default_value_t = ExpandKind::Backward)]
        kind: ExpandKind,
    },
    /// Dimension-gap counterexample: parameters, certificates, narrative.
    Counterexample {},
}

/// Shared engine knobs.
#[derive(clap::Args)]
struct Tuning {
    /// Largest tracked letter of a cofinite range (default: planned).
    #[arg(long)]
    letter_cutoff: Option<u64>,
    /// Largest tracked parabolic run length in star mode (default: planned).
    #[arg(long)]
    star_n_cutoff: Option<u32>,
    /// Distortion constant override.
    #[arg(long)]
    k: Option<f64>,
    /// Counterexample family parameter.
    #[arg(long, default_value_t = 48)]
    n2: u64,
    /// Similarity contraction ratios, e.g. `1/3,1/3`.
    #[arg(long)]
    ratios: Option<String>,
}

impl Tuning {
    fn fixed_cutoffs(&self) -> Result<Option<Cutoffs>, CliError> {
        match (self.letter_cutoff, self.star_n_cutoff) {
            (None, None) => Ok(None),
            (Some(_), None) | (None, Some(_)) => Err(CliError::Usage(
                "set both --letter-cutoff and --star-n-cutoff or neither".into(),
            )),
            (Some(letter_cutoff), Some(star_n_cutoff)) => {
                Ok(Some(Cutoffs { letter_cutoff, star_n_cutoff }))
            }
        }
    }

    fn system(&self, name: &str) -> Result<SystemSpec, CliError> {
        let family = match name {
            "bcf" => Family::Bcf,
            "bcf-star" => Family::BcfStar,
            "gauss" => Family::Gauss,
            "counterexample" => Family::Counterexample { n2: self.n2 },
            "similarity" => {
                let text = self.ratios.as_deref().ok_or_else(|| {
                    CliError::Usage("--system similarity requires --ratios, e.g. 1/3,1/3".into())
                })?;
                let ratios = text
                    .split(',')
                    .map(|item| parse_rational(item.trim()))
                    .collect::<bcfdim::Result<Vec<_>>>()?;
                Family::Similarity { ratios }
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown system {other:?}; expected bcf, bcf-star, gauss, counterexample, or similarity"
                )))
            }
        };
        Ok(make_system_with_k(family, self.k)?)
    }
}

fn budget_from_env() -> Result<u128, CliError> {
    match std::env::var("BCFDIM_BUDGET") {
        Ok(text) => text.trim().parse::<u128>().map_err(|_| {
            CliError::Usage(format!("BCFDIM_BUDGET must be a nonnegative integer, got {text:?}"))
        }),
        Err(_) => Ok(EngineOpts::default().budget),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(certified) => ExitCode::from(if certified { 0 } else { 2 }),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn base_config(cli: &Cli, command: &str, budget: u128) -> RunConfig {
    RunConfig {
        command: command.to_string(),
        output: cli.output.as_ref().map(|p| p.display().to_string()),
        format: match cli.format {
            Format::Json => "json".to_string(),
            Format::Csv => "csv".to_string(),
        },
        budget,
        ..RunConfig::default()
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let budget = budget_from_env()?;
    match &cli.command {
        Command::Dim { system, alphabet, tol, depth, tuning } => {
            run_dim(cli, budget, system, alphabet, *tol, *depth, tuning)
        }
        Command::PressureCurve { system, alphabet, t_min, t_max, t_samples, depth, tuning } => {
            run_curve(cli, budget, system, alphabet, *t_min, *t_max, *t_samples, *depth, tuning)
        }
        Command::Spectrum { system, target_t, max_index, tol, tuning } => {
            run_spectrum(cli, budget, system, *target_t, *max_index, *tol, tuning)
        }
        Command::Verify { lemma, samples, seed } => run_verify(cli, budget, *lemma, *samples, *seed),
        Command::Expand { value, digits, kind } => run_expand(cli, budget, value, *digits, *kind),
        Command::Counterexample {} => run_counterexample(cli, budget),
    }
}

#[derive(serde::Serialize)]
struct DimResult {
    system: String,
    alphabet: String,
    t_lo: f64,
    t_hi: f64,
    width: f64,
    certified_below: bool,
    certified_above: bool,
    trivial_upper: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn run_dim(
    cli: &Cli,
    budget: u128,
    system: &str,
    alphabet: &str,
    tol: f64,
    depth: u32,
    tuning: &Tuning,
) -> Result<bool, CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::Usage("csv output is only available for pressure-curve and verify".into()));
    }
    let sys = tuning.system(system)?;
    let a = parse_alphabet(alphabet)?;
    let opts = EngineOpts {
        target_width: tol,
        max_depth: depth,
        threads: cli.threads,
        budget,
        fixed_cutoffs: tuning.fixed_cutoffs()?,
        ..EngineOpts::default()
    };
    let bracket = dimension_bracket_opts(&sys, &a, &opts)?;
    let mut config = base_config(cli, "dim", budget);
    config.system = Some(system.to_string());
    config.alphabet = Some(a.to_string());
    config.tol = Some(tol);
    config.depth = Some(depth);
    config.letter_cutoff = tuning.letter_cutoff;
    config.star_n_cutoff = tuning.star_n_cutoff;
    let report = Report {
        config: &config,
        result: DimResult {
            system: sys.family.name().to_string(),
            alphabet: a.to_string(),
            t_lo: bracket.t_lo,
            t_hi: bracket.t_hi,
            width: bracket.width(),
            certified_below: bracket.certified_below,
            certified_above: bracket.certified_above,
            trivial_upper: bracket.trivial_upper,
            note: bracket.note.clone(),
        },
        evidence: bracket.evidence.iter().map(evidence_value).collect(),
        certified: bracket.certified,
        version: bcfdim::VERSION,
    };
    emit(&report.body()?, cli.output.as_ref())?;
    Ok(bracket.certified)
}

#[allow(clippy::too_many_arguments)]
fn run_curve(
    cli: &Cli,
    budget: u128,
    system: &str,
    alphabet: &str,
    t_min: f64,
    t_max: f64,
    t_samples: u32,
    depth: u32,
    tuning: &Tuning,
) -> Result<bool, CliError> {
    if !(t_min <= t_max) || t_samples == 0 {
        return Err(CliError::Usage(format!(
            "empty t grid: t_min {t_min}, t_max {t_max}, {t_samples} samples"
        )));
    }
    let sys = tuning.system(system)?;
    let a = parse_alphabet(alphabet)?;
    let opts = EngineOpts {
        threads: cli.threads,
        budget,
        fixed_cutoffs: tuning.fixed_cutoffs()?,
        ..EngineOpts::default()
    };
    let mut brackets = Vec::with_capacity(t_samples as usize);
    for i in 0..t_samples {
        let t = if t_samples == 1 {
            t_min
        } else {
            t_min + (t_max - t_min) * f64::from(i) / f64::from(t_samples - 1)
        };
        brackets.push(lambda_bracket_opts(&sys, &a, t, depth, None, &opts)?);
    }
    let mut config = base_config(cli, "pressure-curve", budget);
    config.system = Some(system.to_string());
    config.alphabet = Some(a.to_string());
    config.depth = Some(depth);
    config.t_min = Some(t_min);
    config.t_max = Some(t_max);
    config.t_samples = Some(t_samples);
    config.letter_cutoff = tuning.letter_cutoff;
    config.star_n_cutoff = tuning.star_n_cutoff;
    let body = match cli.format {
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&format!("# config: {}\n", serde_json::to_string(&config)?));
            out.push_str(&format!("# version: {}\n", bcfdim::VERSION));
            out.push_str("t,lambda_lo,lambda_hi\n");
            for b in &brackets {
                out.push_str(&format!("{},{},{}\n", b.t, b.lambda_lo, b.lambda_hi));
            }
            out
        }
        Format::Json => Report {
            config: &config,
            result: &brackets,
            evidence: brackets.iter().map(evidence_value).collect(),
            certified: true,
            version: bcfdim::VERSION,
        }
        .body()?,
    };
    emit(&body, cli.output.as_ref())?;
    Ok(true)
}

fn run_spectrum(
    cli: &Cli,
    budget: u128,
    system: &str,
    target_t: f64,
    max_index: u64,
    tol: f64,
    tuning: &Tuning,
) -> Result<bool, CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::Usage("csv output is only available for pressure-curve and verify".into()));
    }
    let sys = tuning.system(system)?;
    let opts = EngineOpts { threads: cli.threads, budget, ..EngineOpts::default() };
    let result = greedy_build_opts(&sys, sys.min_index(), target_t, max_index, tol, &opts)?;
    let mut config = base_config(cli, "spectrum", budget);
    config.system = Some(system.to_string());
    config.target_t = Some(target_t);
    config.max_index = Some(max_index);
    config.tol = Some(tol);
    let certified = result.achieved.certified_above;
    let report = Report {
        config: &config,
        result: &result,
        evidence: result.step_log.iter().map(evidence_value).collect(),
        certified,
        version: bcfdim::VERSION,
    };
    emit(&report.body()?, cli.output.as_ref())?;
    Ok(certified)
}

#[derive(serde::Serialize)]
struct VerifySummary {
    lemma: &'static str,
    samples: u64,
    failures: u64,
    all_pass: bool,
}

fn run_verify(cli: &Cli, budget: u128, lemma: Lemma, samples: u64, seed: u64) -> Result<bool, CliError> {
    let outcome = verify::run_sweep(lemma, samples, seed, cli.format == Format::Csv)?;
    let mut config = base_config(cli, "verify", budget);
    config.lemma = Some(lemma.name().to_string());
    config.samples = Some(samples);
    config.seed = Some(seed);
    let all_pass = outcome.failures == 0;
    let summary = Report {
        config: &config,
        result: VerifySummary { lemma: lemma.name(), samples, failures: outcome.failures, all_pass },
        evidence: Vec::new(),
        certified: all_pass,
        version: bcfdim::VERSION,
    };
    let mut body = outcome.lines.join("\n");
    if !body.is_empty() {
        body.push('\n');
    }
    // one-line envelope keeps the whole report valid JSON-lines
    body.push_str(&serde_json::to_string(&summary)?);
    body.push('\n');
    emit(&body, cli.output.as_ref())?;
    Ok(all_pass)
}

#[derive(serde::Serialize)]
struct ExpandResult {
    digits: Vec<u64>,
    origin: String,
    terminated: bool,
    interval_lo: String,
    interval_hi: String,
    interval_lo_float: f64,
    interval_hi_float: f64,
}

fn run_expand(cli: &Cli, budget: u128, value: &str, digits: usize, kind: ExpandKind) -> Result<bool, CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::Usage("csv output is only available for pressure-curve and verify".into()));
    }
    if digits == 0 {
        return Err(CliError::Usage("--digits must be at least 1".into()));
    }
    let x = parse_rational(value)?;
    let (expansion, interval) = match kind {
        ExpandKind::Backward => {
            let d = bcf_digits(&x, digits)?;
            let interval = bcf_eval(&d.digits)?;
            (d, interval)
        }
        ExpandKind::Standard => {
            let d = cf_digits(&x, digits)?;
            let interval = MoebiusWord::gauss_word(&d.digits)?.image();
            (d, interval)
        }
    };
    let mut config = base_config(cli, "expand", budget);
    config.value = Some(value.to_string());
    config.digits = Some(digits);
    config.kind = Some(
        match kind {
            ExpandKind::Backward => "backward",
            ExpandKind::Standard => "standard",
        }
        .to_string(),
    );
    let to_f64 = |r: &num_rational::BigRational| {
        let n: f64 = r.numer().to_string().parse().unwrap_or(f64::NAN);
        let d: f64 = r.denom().to_string().parse().unwrap_or(f64::NAN);
        n / d
    };
    let report = Report {
        config: &config,
        result: ExpandResult {
            digits: expansion.digits.clone(),
            origin: expansion.origin.clone(),
            terminated: expansion.terminated,
            interval_lo: interval.0.to_string(),
            interval_hi: interval.1.to_string(),
            interval_lo_float: to_f64(&interval.0),
            interval_hi_float: to_f64(&interval.1),
        },
        evidence: vec![evidence_value(&expansion)],
        certified: true,
        version: bcfdim::VERSION,
    };
    emit(&report.body()?, cli.output.as_ref())?;
    Ok(true)
}

fn run_counterexample(cli: &Cli, budget: u128) -> Result<bool, CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::Usage("csv output is only available for pressure-curve and verify".into()));
    }
    let certificate = find_gap_params()?;
    let demo = gap_demo(&certificate)?;
    let config = base_config(cli, "counterexample", budget);
    let evidence = vec![
        evidence_value(&certificate.dim_12_bracket),
        evidence_value(&certificate.not1_certificate),
        evidence_value(&certificate.not2_certificate),
    ];
    let report = Report {
        config: &config,
        result: &demo,
        evidence,
        certified: true,
        version: bcfdim::VERSION,
    };
    emit(&report.body()?, cli.output.as_ref())?;
    Ok(true)
}
