use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use coherelab::error::Error;
use coherelab::harness::{run_suite, SuiteConfig};
use coherelab::interferometer::{sample_pattern, PhaseGrid};
use coherelab::measures::{
    c_chernoff_2, c_chernoff_inf, c_fisher_2, c_fisher_inf, c_guess, c_i_lower, c_i_upper, c_l1,
    c_max, c_nabla_2, c_nabla_inf, c_rel_ent, c_trace_dist, default_lower_bound_setup, robustness,
    Diagnostics, MeasureResult, Witness,
};
use coherelab::numerics::ComplexMatrix;
use coherelab::quantum::{random_density, DensityMatrix, Povm};

#[derive(Parser)]
#[command(name = "coherelab", version, about = "Interferometer visibility and coherence measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute coherence measures of a state file.
    Measure(MeasureArgs),
    /// Sample an interference pattern over a phase sweep and export CSV.
    Pattern(PatternArgs),
    /// Run the strong-monotonicity suite from a config file.
    Suite(SuiteArgs),
    /// Write a seeded random (or maximally coherent) state file.
    RandomState(RandomStateArgs),
}

#[derive(Args)]
struct MeasureArgs {
    /// Path to a state JSON file.
    #[arg(long)]
    state: PathBuf,
    /// Compute every registered measure.
    #[arg(long, conflicts_with = "only")]
    all: bool,
    /// Comma-separated list of measure names.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Output format.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct PatternArgs {
    #[arg(long)]
    state: PathBuf,
    /// POVM spec: `fourier`, `basis:<JSON vectors>`, or a JSON POVM file path.
    #[arg(long, default_value = "fourier")]
    povm: String,
    /// Number of sweep points.
    #[arg(long, default_value_t = 33)]
    grid: usize,
    /// 1-based index of the swept phase component.
    #[arg(long, default_value_t = 2)]
    axis: usize,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Suite config JSON file; defaults apply if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report JSON path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RandomStateArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit the maximally coherent state instead of a random one.
    #[arg(long)]
    maximally_coherent: bool,
    /// Output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

const MEASURE_NAMES: [&str; 14] = [
    "c_l1",
    "c_rel_ent",
    "c_trace_dist",
    "c_max",
    "c_robustness",
    "c_guess",
    "c_nabla_2",
    "c_nabla_inf",
    "c_fisher_2",
    "c_fisher_inf",
    "c_chernoff_2",
    "c_chernoff_inf",
    "c_i_upper",
    "c_i_lower",
];

fn scalar_result(value: f64) -> MeasureResult {
    MeasureResult { value, witness: Witness::None, diagnostics: Diagnostics::default() }
}

fn evaluate_measure(name: &str, rho: &DensityMatrix) -> Result<MeasureResult, Error> {
    match name {
        "c_l1" => Ok(scalar_result(c_l1(rho))),
        "c_rel_ent" => Ok(scalar_result(c_rel_ent(rho)?)),
        "c_trace_dist" => Ok(c_trace_dist(rho)),
        "c_max" => Ok(c_max(rho)),
        "c_robustness" => robustness(rho),
        "c_guess" => c_guess(rho),
        "c_nabla_2" => c_nabla_2(rho),
        "c_nabla_inf" => c_nabla_inf(rho),
        "c_fisher_2" => c_fisher_2(rho),
        "c_fisher_inf" => c_fisher_inf(rho),
        "c_chernoff_2" => c_chernoff_2(rho),
        "c_chernoff_inf" => c_chernoff_inf(rho),
        "c_i_upper" => Ok(scalar_result(c_i_upper(rho)?)),
        "c_i_lower" => {
            let (ensemble, povm) = default_lower_bound_setup(rho)?;
            Ok(scalar_result(c_i_lower(rho, &ensemble, &povm)?))
        }
        _ => Err(Error::InvalidInput(format!("unknown measure name '{name}'"))),
    }
}

/// Round to 12 significant digits for stable, locale-independent output.
fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_json_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    return json!(sig12(f));
                }
            }
            Value::Number(n)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json_numbers).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter().map(|(k, v)| (k, round_json_numbers(v))).collect(),
        ),
        other => other,
    }
}

fn load_state(path: &PathBuf) -> Result<DensityMatrix, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    DensityMatrix::from_json_str(&text)
}

fn cmd_measure(args: &MeasureArgs) -> Result<(), Error> {
    if args.format != "json" {
        return Err(Error::InvalidInput(format!(
            "unsupported format '{}' for measure output",
            args.format
        )));
    }
    let rho = load_state(&args.state)?;
    let names: Vec<String> = if args.all || args.only.is_empty() {
        MEASURE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.only.clone()
    };
    for name in &names {
        if !MEASURE_NAMES.contains(&name.as_str()) {
            return Err(Error::InvalidInput(format!("unknown measure name '{name}'")));
        }
    }
    let mut out = serde_json::Map::new();
    for name in &names {
        let result = evaluate_measure(name, &rho)?;
        let value = serde_json::to_value(&result)
            .map_err(|e| Error::NumericalFailure(format!("serialization failed: {e}")))?;
        out.insert(name.clone(), round_json_numbers(value));
    }
    println!("{}", serde_json::to_string_pretty(&Value::Object(out)).unwrap());
    Ok(())
}

#[derive(Deserialize)]
struct PovmJson {
    labels: Option<Vec<String>>,
    elements: Vec<Vec<Vec<[f64; 2]>>>,
}

fn parse_vectors_json(text: &str) -> Result<Vec<Vec<Complex64>>, Error> {
    let raw: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("basis spec parse error: {e}")))?;
    Ok(raw
        .into_iter()
        .map(|v| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        .collect())
}

fn parse_povm(spec: &str, dim: usize) -> Result<Povm, Error> {
    if spec == "fourier" {
        return Ok(Povm::fourier(dim));
    }
    if let Some(body) = spec.strip_prefix("basis:") {
        return Povm::from_basis(&parse_vectors_json(body)?);
    }
    let text = fs::read_to_string(spec)
        .map_err(|e| Error::InvalidInput(format!("cannot read POVM file {spec}: {e}")))?;
    let parsed: PovmJson = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("POVM file parse error: {e}")))?;
    let elements: Vec<ComplexMatrix> = parsed
        .elements
        .iter()
        .map(|rows| {
            let converted: Vec<Vec<Complex64>> = rows
                .iter()
                .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .collect();
            ComplexMatrix::from_rows(&converted)
        })
        .collect::<Result<_, _>>()?;
    let labels = parsed
        .labels
        .unwrap_or_else(|| (0..elements.len()).map(|i| i.to_string()).collect());
    Povm::new(labels, elements)
}

fn cmd_pattern(args: &PatternArgs) -> Result<(), Error> {
    let rho = load_state(&args.state)?;
    let d = rho.dim();
    if args.axis == 0 || args.axis > d {
        return Err(Error::InvalidInput(format!(
            "sweep axis {} out of range 1..={d}",
            args.axis
        )));
    }
    let povm = parse_povm(&args.povm, d)?;
    let grid = PhaseGrid::axis_sweep(d, args.axis - 1, args.grid)?;
    let pattern = sample_pattern(&rho, &povm, &grid)?;
    let mut buf = Vec::new();
    pattern
        .write_csv(&mut buf)
        .map_err(|e| Error::NumericalFailure(format!("CSV write failed: {e}")))?;
    match &args.out {
        Some(path) => fs::write(path, &buf)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    Ok(())
}

fn cmd_suite(args: &SuiteArgs) -> Result<bool, Error> {
    let config: SuiteConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("config parse error: {e}")))?
        }
        None => SuiteConfig::default(),
    };
    let outcome = run_suite(&config)?;
    for (name, seconds) in &outcome.timings {
        eprintln!("timing: {name} {seconds:.3}s");
    }
    let report_text = serde_json::to_string_pretty(&round_json_numbers(
        serde_json::to_value(&outcome.report)
            .map_err(|e| Error::NumericalFailure(format!("serialization failed: {e}")))?,
    ))
    .unwrap();
    match &args.out {
        Some(path) => fs::write(path, &report_text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{report_text}"),
    }
    let failed = outcome.report.summary.failures > 0;
    if failed {
        for r in outcome.report.reports.iter().filter(|r| !r.pass) {
            eprintln!(
                "monotonicity failure: measure={} dim={} state_seed={} channel_seed={} slack={:e}",
                r.measure, r.dim, r.state_seed, r.channel_seed, r.slack
            );
        }
    }
    Ok(!failed)
}

fn cmd_random_state(args: &RandomStateArgs) -> Result<(), Error> {
    let rho = if args.maximally_coherent {
        DensityMatrix::maximally_coherent(args.dim)
    } else {
        random_density(args.dim, args.rank, args.seed)?
    };
    let text = rho.to_json_string();
    match &args.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_) | Error::NotPsd(_) | Error::Unsupported(_) => 2,
        Error::NumericalFailure(_) => 3,
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("COHERELAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Measure(args) => cmd_measure(args).map(|()| true),
        Command::Pattern(args) => cmd_pattern(args).map(|()| true),
        Command::Suite(args) => cmd_suite(args),
        Command::RandomState(args) => cmd_random_state(args).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
