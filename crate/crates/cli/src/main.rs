use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use microcc::cone::{cosphere_samples, garding_constant, q_vanishes_on_cone, sample_cone, QuadraticForm, KERNEL_TOL, QUADFORM_NAMES};
use microcc::experiments::{emit_outputs, run_scenario, ScenarioConfig, SCENARIOS};
use microcc::geometry::METRIC_NAMES;
use microcc::symbols::registry;

#[derive(Parser)]
#[command(name = "microcc", version, about = "Compensated compactness experiments on periodic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config (or a built-in one by name).
    Run {
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        config: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample the characteristic cone of a symbol.
    Cone {
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        quadform: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Estimate the Gårding constant of a form against a symbol.
    Garding {
        #[arg(long)]
        symbol: String,
        #[arg(long)]
        quadform: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Print the config of a built-in scenario.
    Show { name: String },
    /// List registered scenarios, symbols, forms and metrics.
    List,
}

fn dim_for(symbol: &str, dim: Option<usize>) -> usize {
    dim.or_else(|| registry::natural_dim(symbol)).unwrap_or(2)
}

fn run(cli: Cli) -> microcc::Result<bool> {
    match cli.command {
        Command::Run { config, builtin, json, csv } => {
            let mut cfg = match (config, builtin) {
                (Some(p), _) => ScenarioConfig::from_path(&p)?,
                (None, Some(name)) => ScenarioConfig::builtin(&name)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            let json = json.or_else(|| cfg.output.json.take());
            let csv = csv.or_else(|| cfg.output.csv.take());
            let report = run_scenario(&cfg)?;
            emit_outputs(&report, json.as_deref(), csv.as_deref())?;
            println!("scenario {}", report.scenario);
            for c in &report.checks {
                let rel = serde_json::to_value(c.relation).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                println!(
                    "  {} {}: {:.6e} {rel} {:.6e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold
                );
            }
            println!("verdict: {} ({})", if report.verdict.passed { "pass" } else { "fail" }, report.verdict.summary);
            Ok(report.verdict.passed)
        }
        Command::Cone { symbol, samples, quadform, dim } => {
            let dim = dim_for(&symbol, dim);
            let p = registry::builtin(&symbol, dim)?.principal;
            let cone = sample_cone(&p, &[vec![0.0; dim]], samples)?;
            let mut dims: Vec<usize> = cone.iter().map(|c| c.dim()).collect();
            dims.sort_unstable();
            dims.dedup();
            println!("symbol {symbol} (dim {dim}): {} of {samples} covectors with nontrivial kernel (tolerance {KERNEL_TOL:e})", cone.len());
            println!("kernel dimensions: {dims:?}");
            if let Some(name) = quadform {
                let q = QuadraticForm::builtin(&name)?;
                let cert = q_vanishes_on_cone(&q, &cone, 8)?;
                println!("{}", serde_json::to_string_pretty(&cert).map_err(|e| microcc::Error::Serialization(e.to_string()))?);
                return Ok(cert.vanishes(1e-10));
            }
            Ok(true)
        }
        Command::Garding { symbol, quadform, delta, dim, samples } => {
            let dim = dim_for(&symbol, dim);
            let p = registry::builtin(&symbol, dim)?.principal;
            let q = QuadraticForm::builtin(&quadform)?;
            let k = cosphere_samples(&[vec![0.0; dim]], dim, samples);
            let r = garding_constant(&q, &p, &k, delta, 400)?;
            println!("{}", serde_json::to_string_pretty(&r).map_err(|e| microcc::Error::Serialization(e.to_string()))?);
            Ok(r.violation_on_resample >= -1e-8)
        }
        Command::Show { name } => {
            println!("{}", ScenarioConfig::builtin(&name)?.to_json_pretty());
            Ok(true)
        }
        Command::List => {
            println!("scenarios: {}", SCENARIOS.join(", "));
            println!("symbols: {} (prefix scaled: for x-dependence)", registry::NAMES.join(", "));
            println!("quadratic forms: {}, identity:<J> (prefix scaled: for x-dependence)", QUADFORM_NAMES.join(", "));
            println!("metrics: {}", METRIC_NAMES.join(", "));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
