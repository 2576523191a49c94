//! Command-line toolkit for quench-based quantum-metric extraction.
//!
//! Subcommands: `metric` (figure-preset component sweeps), `chern`
//! (topological invariants), `sweep` (quality vs quench settings), and
//! `validate` (the invariant suite). Every run writes its outputs plus a JSON
//! manifest into a content-addressed directory; identical configurations
//! produce byte-identical outputs regardless of worker count.

mod commands {
    pub mod chern;
    pub mod metric;
    pub mod sweep;
    pub mod validate;
}
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{load_config, parse_float_list, parse_grid, RunConfig};
use manifest::{output_dir, run_id, RunWriter};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or I/O; exit code 2.
    Config(String),
    /// Invariant-suite failure; exit code 1.
    Validation(String),
    /// Numerical-quality budget exceeded; exit code 3.
    Quality(String),
    /// Error escalated from the computation modules; exit code 2.
    Module(qmt::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) | CliError::Module(_) => 2,
            CliError::Quality(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => format!("configuration error: {m}"),
            CliError::Validation(m) => format!("validation failure: {m}"),
            CliError::Quality(m) => format!("numerical-quality error: {m}"),
            CliError::Module(e) => format!("computation error: {e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qmt",
    version,
    about = "Non-Abelian quantum-metric extraction from simulated parameter quenches"
)]
struct Cli {
    /// JSON configuration file (defaults < file < flags).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: runs/<run-id>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores). Does not affect results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized validation draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Quench duration convention: map T to 2πT ("two-pi") or T ("one").
    #[arg(long, global = true, value_parser = ["two-pi", "one"])]
    time_unit: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep metric components along a figure preset, quench vs oracle.
    Metric(MetricArgs),
    /// Compute one topological invariant.
    Chern(ChernArgs),
    /// Sweep Chern quality over quench durations and step sizes.
    Sweep(SweepArgs),
    /// Run the cross-module invariant suite.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct MetricArgs {
    /// Preset name: fig-1a … fig-1d, fig-2a … fig-2d, fig-3a … fig-3d.
    #[arg(long)]
    preset: Option<String>,
    /// Number of sweep points.
    #[arg(long)]
    points: Option<usize>,
    #[command(flatten)]
    quench: QuenchFlags,
    /// Gauge: analytic | reference-projection | eigensolver-raw.
    #[arg(long)]
    gauge: Option<String>,
}

#[derive(Args, Debug)]
struct ChernArgs {
    /// Invariant: real | second.
    #[arg(long)]
    invariant: Option<String>,
    /// Method: curvature-oracle | metric-oracle | metric-quench.
    #[arg(long)]
    method: Option<String>,
    /// Oracle backing for the oracle methods: analytic | fd.
    #[arg(long)]
    oracle: Option<String>,
    /// Normalization of the metric-form second Chern number.
    #[arg(long)]
    normalization: Option<String>,
    /// Grid shape, e.g. 100x100 or 12x12x12x12.
    #[arg(long)]
    grid: Option<String>,
    /// Monopole sign: 1 or -1.
    #[arg(long, allow_negative_numbers = true)]
    sign: Option<i8>,
    #[command(flatten)]
    quench: QuenchFlags,
    #[arg(long)]
    gauge: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Invariant to sweep: real | second.
    #[arg(long)]
    invariant: Option<String>,
    /// Comma-separated quench durations.
    #[arg(long)]
    t_values: Option<String>,
    /// Comma-separated quench steps (radians).
    #[arg(long)]
    delta_values: Option<String>,
    /// Grid shape for the swept invariant.
    #[arg(long)]
    grid: Option<String>,
    #[command(flatten)]
    quench: QuenchFlags,
    #[arg(long)]
    gauge: Option<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Run the reduced (< 10 s) subset.
    #[arg(long)]
    quick: bool,
    /// Inject a fault (available: dirac-algebra); the matching check must fail.
    #[arg(long)]
    corrupt: Option<String>,
}

#[derive(Args, Debug)]
struct QuenchFlags {
    /// Quench step δλ in radians.
    #[arg(long)]
    delta: Option<f64>,
    /// Quench duration T (ramp time units).
    #[arg(long)]
    t_quench: Option<f64>,
    /// Midpoint-exponential substeps.
    #[arg(long)]
    substeps: Option<usize>,
    /// Schedule: sudden | linear.
    #[arg(long)]
    schedule: Option<String>,
}

fn parse_gauge(name: &str) -> Result<qmt::geometry::Gauge, CliError> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| CliError::Config(format!("unknown gauge {name:?}")))
}

fn apply_quench_flags(config: &mut RunConfig, flags: &QuenchFlags) {
    if let Some(d) = flags.delta {
        config.quench.delta_lambda = d;
    }
    if let Some(t) = flags.t_quench {
        config.quench.t_quench = t;
    }
    if let Some(s) = flags.substeps {
        config.quench.substeps = s;
    }
    if let Some(s) = &flags.schedule {
        config.quench.schedule = s.clone();
    }
}

fn apply_global_flags(config: &mut RunConfig, cli: &Cli) -> Result<(), CliError> {
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(unit) = &cli.time_unit {
        config.quench.time_unit = if unit == "one" {
            qmt::quench::TimeUnit::One
        } else {
            qmt::quench::TimeUnit::TwoPi
        };
    }
    Ok(())
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    // family hint for defaults: chern picks its family from the invariant
    let family_hint = match &cli.command {
        Command::Chern(args) => {
            let invariant = args
                .invariant
                .clone()
                .unwrap_or_else(|| "real".to_string());
            Some(if invariant == "second" {
                "yang-eff".to_string()
            } else {
                "dirac3d-eff".to_string()
            })
        }
        Command::Metric(args) => args
            .preset
            .as_deref()
            .and_then(|p| commands::metric::find_preset(p).ok())
            .map(|p| p.family.name().to_string()),
        Command::Sweep(args) => {
            let invariant = args
                .invariant
                .clone()
                .unwrap_or_else(|| "real".to_string());
            Some(if invariant == "second" {
                "yang-eff".to_string()
            } else {
                "dirac3d-eff".to_string()
            })
        }
        Command::Validate(_) => None,
    };
    let mut config = load_config(cli.config.as_deref(), family_hint.as_deref())?;
    apply_global_flags(&mut config, cli)?;

    match &cli.command {
        Command::Metric(args) => {
            if let Some(p) = &args.preset {
                config.metric.preset = p.clone();
            }
            if let Some(n) = args.points {
                config.metric.sweep_points = n;
            }
            if let Some(g) = &args.gauge {
                config.gauge = parse_gauge(g)?;
            }
            apply_quench_flags(&mut config, &args.quench);
        }
        Command::Chern(args) => {
            if let Some(i) = &args.invariant {
                config.chern.invariant = i.clone();
            }
            if let Some(m) = &args.method {
                config.chern.method = m.clone();
            }
            if let Some(o) = &args.oracle {
                config.chern.oracle = o.clone();
            }
            if let Some(n) = &args.normalization {
                config.chern.normalization = n.clone();
            }
            if let Some(s) = args.sign {
                if s != 1 && s != -1 {
                    return Err(CliError::Config(format!("--sign must be 1 or -1, got {s}")));
                }
                config.model.sign = s;
            }
            if let Some(g) = &args.grid {
                let counts = parse_grid(g)?;
                if counts.len() == 2 {
                    config.grid.s2 = [counts[0], counts[1]];
                } else {
                    config.grid.s4 = [counts[0], counts[1], counts[2], counts[3]];
                }
            }
            if let Some(g) = &args.gauge {
                config.gauge = parse_gauge(g)?;
            }
            apply_quench_flags(&mut config, &args.quench);
        }
        Command::Sweep(args) => {
            if let Some(i) = &args.invariant {
                config.chern.invariant = i.clone();
            }
            if let Some(t) = &args.t_values {
                config.sweep.t_values = parse_float_list(t)?;
            }
            if let Some(d) = &args.delta_values {
                config.sweep.delta_values = parse_float_list(d)?;
            }
            if let Some(g) = &args.grid {
                let counts = parse_grid(g)?;
                if counts.len() == 2 {
                    config.grid.s2 = [counts[0], counts[1]];
                } else {
                    config.grid.s4 = [counts[0], counts[1], counts[2], counts[3]];
                }
            }
            if let Some(g) = &args.gauge {
                config.gauge = parse_gauge(g)?;
            }
            apply_quench_flags(&mut config, &args.quench);
        }
        Command::Validate(_) => {}
    }
    config.validate()?;
    Ok(config)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = build_config(cli)?;
    let threads = cli.threads.unwrap_or_else(num_threads_default);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;

    let command_name = match &cli.command {
        Command::Metric(_) => "metric",
        Command::Chern(_) => "chern",
        Command::Sweep(_) => "sweep",
        Command::Validate(_) => "validate",
    };
    let id = run_id(command_name, &config);
    let dir = output_dir(cli.out.as_deref(), &id);
    let mut writer = RunWriter::create(&dir)?;

    match &cli.command {
        Command::Metric(_) => {
            let output = pool.install(|| commands::metric::run(&config))?;
            writer.write_output("components.csv", &output.components_csv)?;
            writer.write_output("runs.csv", &output.runs_csv)?;
            let headline = serde_json::json!({
                "rows": output.rows,
                "worst_abs_error": output.worst_abs_error,
            });
            let path = writer.finish(command_name, &id, threads, &config, headline)?;
            println!(
                "metric preset {}: {} rows, worst |quench − oracle| = {:.3e}",
                config.metric.preset, output.rows, output.worst_abs_error
            );
            println!("outputs in {}", path.parent().unwrap().display());
        }
        Command::Chern(_) => {
            let result = pool.install(|| commands::chern::run(&config));
            match result {
                Ok(result) => {
                    let json = serde_json::to_vec_pretty(&result)
                        .map_err(|e| CliError::Config(format!("serialization: {e}")))?;
                    writer.write_output("chern.json", &json)?;
                    let headline = serde_json::json!({
                        "value": result.value,
                        "mod2": result.mod2,
                    });
                    let path = writer.finish(command_name, &id, threads, &config, headline)?;
                    match result.mod2 {
                        Some(m) => println!(
                            "{} Chern number ({}): {:.6} (mod 2 → {m})",
                            config.chern.invariant, result.method, result.value
                        ),
                        None => println!(
                            "{} Chern number ({}): {:.6}",
                            config.chern.invariant, result.method, result.value
                        ),
                    }
                    println!("outputs in {}", path.parent().unwrap().display());
                }
                Err(e) => return Err(e),
            }
        }
        Command::Sweep(_) => {
            let output = pool.install(|| commands::sweep::run(&config))?;
            writer.write_output("sweep.csv", &output.csv)?;
            let headline = serde_json::json!({
                "monotonic_t": output.monotonic_t,
                "monotonic_delta": output.monotonic_delta,
            });
            let path = writer.finish(command_name, &id, threads, &config, headline)?;
            println!(
                "sweep complete: error non-increasing over T: {}, over δλ: {}",
                output.monotonic_t, output.monotonic_delta
            );
            println!("outputs in {}", path.parent().unwrap().display());
        }
        Command::Validate(args) => {
            let report =
                pool.install(|| commands::validate::run(&config, args.quick, args.corrupt.as_deref()))?;
            let json = serde_json::to_vec_pretty(&report)
                .map_err(|e| CliError::Config(format!("serialization: {e}")))?;
            writer.write_output("validate.json", &json)?;
            let headline = serde_json::json!({
                "all_passed": report.all_passed,
                "checks": report.checks.len(),
            });
            writer.finish(command_name, &id, threads, &config, headline)?;
            for c in &report.checks {
                let status = if c.passed { "pass" } else { "FAIL" };
                println!(
                    "[{status}] {} (residual {:.3e}, threshold {:.3e})",
                    c.id, c.residual, c.threshold
                );
            }
            if !report.all_passed {
                return Err(CliError::Validation(format!(
                    "failing checks: {:?}",
                    report.failing_ids()
                )));
            }
            println!("all {} checks passed", report.checks.len());
        }
    }
    Ok(())
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
