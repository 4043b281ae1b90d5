//! `irslab`: evaluate envelope probabilities, run verification suites,
//! sample subgroups and tabulate the parametrized family.
//!
//! Exit codes: 0 pass, 1 failed check, 2 parse or validation error,
//! 3 requested width not reached.

mod config;

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use irslab_core::exactnum::{Dyadic, ProbabilityValue, DEFAULT_FACTOR_CAP};
use irslab_core::freegroup::Word;
use irslab_core::measures::{EnvEvent, Evaluator, MeasureDescriptor};
use irslab_core::sampler::{MembershipMatrix, DEFAULT_TOLERANCE_EXP};
use irslab_core::suites::{self, Suite, SuiteParams};

use config::{parse_width, RunConfig};

const LONG_ABOUT: &str = "\
Exact and certified computations for co-induced invariant random subgroups of
the free group F2 = <a, b>, built from the chain of subgroups of F2' cut out by
the free basis {t [a,b] t^-1 : t = a^p b^q}.

Words use the letters a, b, A = a^-1, B = b^-1; \"\" or \"e\" is the identity.
Measures are mu_F, mu_HF, mu_G, mu_aF:<a>, mu_aG:<a> or a JSON descriptor.
Widths accept decimals (rounded down to a power of two) or dyadics like 1/2^20.

Set IRSLAB_THREADS to cap the worker threads used by sampling.

Exit codes: 0 pass, 1 failed check, 2 parse error, 3 width not reached.";

#[derive(Parser, Debug)]
#[command(name = "irslab", version, about = "IRS laboratory for F2", long_about = LONG_ABOUT)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Envelope probability mu(Env w) for each word
    Eval(EvalArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
    /// Sample subgroups and compare membership frequencies with exact values
    Sample(SampleArgs),
    /// Tabulate mu_{a,G}(Env w) over several values of a
    Family(FamilyArgs),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON run configuration; flags given on the command line win
    #[arg(long, value_name = "FILE")]
    config: Option<String>,
    /// Also write the JSON report to this file
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Measure name or JSON descriptor
    #[arg(long)]
    measure: Option<String>,
    /// Word to evaluate (repeatable)
    #[arg(long = "word", value_name = "WORD")]
    words: Vec<String>,
    /// Treat all words as one event Env{w1, w2, ...}
    #[arg(long)]
    joint: bool,
    /// Target enclosure width [default: 1e-6]
    #[arg(long)]
    width: Option<String>,
    /// Exit 0 even when an enclosure stops short of the width
    #[arg(long)]
    allow_wide: bool,
    /// Cap on the factors of a co-induced product [default: 1000000]
    #[arg(long)]
    max_factors: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// One of faithful, invariance, closure, chain-limits, combination, mixing
    suite: String,
    /// Longest word length swept [default: 8; invariance caps it at 6]
    #[arg(long)]
    max_len: Option<usize>,
    /// Largest power n for chain-limits [default: 10]
    #[arg(long)]
    n: Option<u32>,
    /// Number of (g, w) pairs for invariance [default: 100]
    #[arg(long)]
    pairs: Option<usize>,
    /// Word sample size for combination [default: 200]
    #[arg(long)]
    sample: Option<usize>,
    /// Seed for the random choices of invariance and combination [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Enclosure width [default: 1e-6]
    #[arg(long)]
    width: Option<String>,
    /// Exponent s of the mixing shift a^s [default: 10]
    #[arg(long, allow_negative_numbers = true)]
    shift: Option<i64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Co-induced measure to sample [default: mu_G]
    #[arg(long)]
    measure: Option<String>,
    /// Number of seeds [default: 10000]
    #[arg(long)]
    n: Option<u64>,
    /// Word whose membership is tested (repeatable)
    #[arg(long = "word", value_name = "WORD")]
    words: Vec<String>,
    /// First seed; seeds are consecutive [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Per-query tolerance exponent t, error below 2^-t [default: 60]
    #[arg(long)]
    tolerance_exp: Option<u64>,
    /// Write the membership matrix as CSV
    #[arg(long, value_name = "FILE")]
    csv: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// Family parameter in (0, 3/4), dyadic (repeatable) [default: 1/8 1/4 3/8 1/2 5/8]
    #[arg(long = "a", value_name = "A")]
    a_values: Vec<String>,
    /// Word [default: abAB]
    #[arg(long)]
    word: Option<String>,
    /// Enclosure width [default: 1e-6]
    #[arg(long)]
    width: Option<String>,
    /// Exit 0 even when an enclosure stops short of the width
    #[arg(long)]
    allow_wide: bool,
    #[command(flatten)]
    common: Common,
}

/// How a run ends.
#[derive(Debug)]
enum Failure {
    Check(String),
    Parse(String),
    Width(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Width(_) => 3,
        }
    }
}

impl From<irslab_core::Error> for Failure {
    fn from(e: irslab_core::Error) -> Failure {
        match e {
            irslab_core::Error::Statistics(m) => Failure::Check(m),
            other => Failure::Parse(other.to_string()),
        }
    }
}

type Run = Result<Option<Failure>, Failure>;

fn parse_words(raw: &[String]) -> Result<Vec<Word>, Failure> {
    raw.iter()
        .map(|s| s.parse::<Word>().map_err(Failure::from))
        .collect()
}

fn word_label(w: &Word) -> String {
    if w.is_identity() {
        "e".into()
    } else {
        w.to_string()
    }
}

/// Wraps a command result in the common report envelope.
fn envelope(
    command: &str,
    config: &impl Serialize,
    tolerances: Value,
    result: impl Serialize,
    pass: bool,
) -> Value {
    json!({
        "irslab": env!("CARGO_PKG_VERSION"),
        "command": command,
        "instance": suites::instance_description(),
        "config": config,
        "tolerances": tolerances,
        "result": result,
        "pass": pass,
    })
}

fn emit(report: &Value, out: Option<&str>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    print!("{text}");
    if let Some(path) = out {
        fs::write(path, &text).map_err(|e| Failure::Check(format!("cannot write {path}: {e}")))?;
    }
    Ok(())
}

fn width_note(width: &Dyadic) -> Value {
    json!({ "width": width, "width_f64": width.to_f64() })
}

#[derive(Serialize)]
struct EvalConfig {
    measure: MeasureDescriptor,
    words: Vec<String>,
    joint: bool,
    width: Dyadic,
    allow_wide: bool,
    max_factors: u64,
}

#[derive(Serialize)]
struct EvalRow {
    event: Vec<String>,
    value: ProbabilityValue,
    /// Decimal rendering of the endpoints, for reading only.
    approx: (f64, f64),
    width_reached: bool,
}

fn cmd_eval(args: EvalArgs) -> Run {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let measure = MeasureDescriptor::parse(
        &args
            .measure
            .or(cfg.measure_text()?)
            .unwrap_or_else(|| "mu_G".into()),
    )?;
    let raw = if args.words.is_empty() {
        cfg.words.clone().unwrap_or_default()
    } else {
        args.words
    };
    if raw.is_empty() {
        return Err(Failure::Parse("eval needs at least one --word".into()));
    }
    let words = parse_words(&raw)?;
    let width = parse_width(args.width.as_deref(), cfg.width.as_ref())?;
    let joint = args.joint || cfg.joint.unwrap_or(false);
    let allow_wide = args.allow_wide || cfg.allow_wide.unwrap_or(false);
    let max_factors = args
        .max_factors
        .or(cfg.max_factors)
        .unwrap_or(DEFAULT_FACTOR_CAP);
    if max_factors == 0 {
        return Err(Failure::Parse("--max-factors must be positive".into()));
    }
    let evaluator = Evaluator::with_factor_cap(max_factors);
    let out = args.common.out.or(cfg.out.clone());

    let events: Vec<Vec<Word>> = if joint {
        vec![words.clone()]
    } else {
        words.iter().map(|w| vec![w.clone()]).collect()
    };
    let mut rows = Vec::with_capacity(events.len());
    for e in events {
        let value = evaluator.env_prob(&measure, &EnvEvent::new(e.iter().cloned()), &width)?;
        rows.push(EvalRow {
            event: e.iter().map(word_label).collect(),
            approx: value.interval().approx(),
            width_reached: value.width_reached(),
            value,
        });
    }
    let reached = rows.iter().all(|r| r.width_reached);
    let config = EvalConfig {
        measure,
        words: words.iter().map(word_label).collect(),
        joint,
        width: width.clone(),
        allow_wide,
        max_factors,
    };
    let report = envelope("eval", &config, width_note(&width), &rows, reached);
    emit(&report, out.as_deref())?;
    Ok((!reached && !allow_wide)
        .then(|| Failure::Width("an enclosure did not reach the requested width".into())))
}

fn cmd_verify(args: VerifyArgs) -> Run {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let suite: Suite = args.suite.parse()?;
    let d = SuiteParams::default();
    let params = SuiteParams {
        max_len: args.max_len.or(cfg.max_len).unwrap_or(d.max_len),
        n: args.n.or(cfg.n.map(|n| n as u32)).unwrap_or(d.n),
        pairs: args.pairs.or(cfg.pairs).unwrap_or(d.pairs),
        sample: args.sample.or(cfg.sample).unwrap_or(d.sample),
        seed: args.seed.or(cfg.seed).unwrap_or(d.seed),
        width: parse_width(args.width.as_deref(), cfg.width.as_ref())?,
        shift: args.shift.or(cfg.shift).unwrap_or(d.shift),
    };
    if params.n == 0 || params.n > 64 {
        return Err(Failure::Parse(format!(
            "--n must lie in 1..=64, got {}",
            params.n
        )));
    }
    if params.max_len > 10 {
        return Err(Failure::Parse(format!(
            "--max-len must be at most 10, got {}",
            params.max_len
        )));
    }
    let out = args.common.out.or(cfg.out.clone());
    let report = suites::run_suite(suite, &params)?;
    let pass = report.pass;
    let env = envelope("verify", &params, width_note(&params.width), &report, pass);
    emit(&env, out.as_deref())?;
    Ok((!pass).then(|| Failure::Check(format!("{} check(s) failed", report.failures))))
}

#[derive(Serialize)]
struct SampleConfig {
    measure: MeasureDescriptor,
    n: u64,
    seed: u64,
    words: Vec<String>,
    tolerance_exp: u64,
}

fn write_csv(path: &str, m: &MembershipMatrix) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Check(format!("cannot write {path}: {e}"));
    let mut wtr = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["seed".to_string()];
    header.extend(m.words.iter().map(word_label));
    wtr.write_record(&header).map_err(io)?;
    for (seed, row) in m.seeds.iter().zip(&m.rows) {
        let mut rec = vec![seed.to_string()];
        rec.extend(row.iter().map(|b| if *b { "1" } else { "0" }.to_string()));
        wtr.write_record(&rec).map_err(io)?;
    }
    wtr.flush()
        .map_err(|e| Failure::Check(format!("cannot write {path}: {e}")))
}

fn cmd_sample(args: SampleArgs) -> Run {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let measure = MeasureDescriptor::parse(
        &args
            .measure
            .or(cfg.measure_text()?)
            .unwrap_or_else(|| "mu_G".into()),
    )?;
    let raw = if args.words.is_empty() {
        cfg.words.clone().unwrap_or_default()
    } else {
        args.words
    };
    if raw.is_empty() {
        return Err(Failure::Parse("sample needs at least one --word".into()));
    }
    let words = parse_words(&raw)?;
    let n = args.n.or(cfg.n).unwrap_or(10_000);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let tolerance_exp = args
        .tolerance_exp
        .or(cfg.tolerance_exp)
        .unwrap_or(DEFAULT_TOLERANCE_EXP);
    if tolerance_exp == 0 {
        return Err(Failure::Parse("--tolerance-exp must be positive".into()));
    }
    let out = args.common.out.or(cfg.out.clone());
    let csv_path = args.csv.or(cfg.csv.clone());

    let (report, matrix) = suites::sample_report(&measure, n, seed, &words, tolerance_exp)?;
    if let Some(path) = csv_path.as_deref() {
        write_csv(path, &matrix)?;
    }
    let pass = report.pass;
    let config = SampleConfig {
        measure,
        n,
        seed,
        words: words.iter().map(word_label).collect(),
        tolerance_exp,
    };
    let tolerances = json!({
        "membership_tolerance": format!("2^-{tolerance_exp} total variation per query"),
        "reference_width": report.reference_width,
        "sigma_threshold": report.statistics.threshold_sigma,
        "seeds": format!("{seed} .. {seed} + {n} - 1"),
    });
    let env = envelope("sample", &config, tolerances, &report, pass);
    emit(&env, out.as_deref())?;
    Ok((!pass)
        .then(|| Failure::Check("a frequency is more than 3 sigma from its exact value".into())))
}

#[derive(Serialize)]
struct FamilyConfig {
    a: Vec<Dyadic>,
    word: String,
    width: Dyadic,
    allow_wide: bool,
}

fn cmd_family(args: FamilyArgs) -> Run {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let raw_a = if args.a_values.is_empty() {
        cfg.a.clone().unwrap_or_else(|| {
            ["1/8", "1/4", "3/8", "1/2", "5/8"]
                .map(String::from)
                .to_vec()
        })
    } else {
        args.a_values
    };
    let a_values = raw_a
        .iter()
        .map(|s| s.parse::<Dyadic>().map_err(Failure::from))
        .collect::<Result<Vec<_>, _>>()?;
    let word: Word = args
        .word
        .or(cfg.words.as_ref().and_then(|w| w.first().cloned()))
        .unwrap_or_else(|| "abAB".into())
        .parse()?;
    let width = parse_width(args.width.as_deref(), cfg.width.as_ref())?;
    let allow_wide = args.allow_wide || cfg.allow_wide.unwrap_or(false);
    let out = args.common.out.or(cfg.out.clone());

    let table = suites::family(&a_values, &word, &width)?;
    let reached = table.widths_reached;
    let config = FamilyConfig {
        a: a_values,
        word: word_label(&word),
        width: width.clone(),
        allow_wide,
    };
    let env = envelope("family", &config, width_note(&width), &table, reached);
    emit(&env, out.as_deref())?;
    Ok((!reached && !allow_wide)
        .then(|| Failure::Width("an enclosure did not reach the requested width".into())))
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("IRSLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Failure::Parse(format!(
            "IRSLAB_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    // a second initialization only happens in tests; the first one wins
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = init_threads().and_then(|()| match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Family(a) => cmd_family(a),
    });
    match run {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(f)) | Err(f) => {
            let msg = match &f {
                Failure::Check(m) | Failure::Parse(m) | Failure::Width(m) => m,
            };
            eprintln!("irslab: {msg}");
            ExitCode::from(f.code())
        }
    }
}
