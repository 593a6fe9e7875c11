use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gaussmap_cli::output::{deterministic_json, write_all};
use gaussmap_cli::scenario::Analyses;
use gaussmap_cli::selftest::selftest;
use gaussmap_cli::{run, ConfigError, Scenario};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gaussmap", version, about = "Gauss maps of spacelike convex graphs and Legendre duality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Run every analysis enabled in the scenario.
    Analyze(Args),
    /// Frame reconstruction only.
    Reconstruct(Args),
    /// Finiteness sweep, hull and conjugate checks only.
    Legendre(Args),
    /// Gradient image against the hull of the finiteness set.
    Theorem(Args),
    /// Finiteness sweep and the disc figure.
    Figure(Args),
    /// The acceptance suite.
    Selftest(Args),
}

#[derive(clap::Args, Clone)]
struct Args {
    /// Scenario JSON file or `builtin:<name>`.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    order: Option<Order>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Order {
    #[value(name = "2")]
    Two,
    #[value(name = "4")]
    Four,
}

const DEFAULT_SELFTEST_SEED: u64 = 20240101;

fn configure_threads() -> Result<(), ConfigError> {
    if let Ok(v) = std::env::var("TOOL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| ConfigError::Invalid(format!("TOOL_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    }
    Ok(())
}

fn scenario_for(command: &Command, args: &Args) -> Result<Scenario, ConfigError> {
    let config = args.config.as_deref().ok_or_else(|| ConfigError::Invalid("--config is required".into()))?;
    let mut sc = Scenario::load(config)?;
    if let Some(seed) = args.seed {
        sc.seed = seed;
    }
    if let Some(order) = args.order {
        sc.order = if order == Order::Two { 2 } else { 4 };
    }
    let only = |f: fn(&mut Analyses)| {
        let mut a = Analyses::none();
        f(&mut a);
        a
    };
    match command {
        Command::Reconstruct(_) => sc.analyses = only(|a| a.reconstruct = true),
        Command::Legendre(_) | Command::Figure(_) => sc.analyses = only(|a| a.legendre = true),
        Command::Theorem(_) => sc.analyses = only(|a| a.theorem_check = true),
        _ => {}
    }
    sc.validate()?;
    Ok(sc)
}

fn out_dir(args: &Args, fallback: PathBuf) -> PathBuf {
    args.out.clone().unwrap_or(fallback)
}

fn execute(command: Command) -> Result<bool, ConfigError> {
    configure_threads()?;
    let args = match &command {
        Command::Analyze(a)
        | Command::Reconstruct(a)
        | Command::Legendre(a)
        | Command::Theorem(a)
        | Command::Figure(a)
        | Command::Selftest(a) => a.clone(),
    };

    if let Command::Selftest(_) = &command {
        let seed = args.seed.unwrap_or(DEFAULT_SELFTEST_SEED);
        let t = std::time::Instant::now();
        let report = selftest(seed);
        for c in &report.criteria {
            println!("{}", c.line());
        }
        let dir = out_dir(&args, PathBuf::from("out/selftest"));
        let timings = json!({ "total_seconds": t.elapsed().as_secs_f64() });
        write_all(
            &dir,
            &[
                ("report.json".into(), deterministic_json(&report)),
                ("timings.json".into(), serde_json::to_string_pretty(&timings).unwrap_or_default()),
            ],
        )
        .map_err(|source| ConfigError::Io { path: dir.clone(), source })?;
        return Ok(report.pass);
    }

    let sc = scenario_for(&command, &args)?;
    let dir = out_dir(&args, sc.output.clone().unwrap_or_else(|| PathBuf::from("out").join(&sc.name)));
    let output = run(&sc)?;
    for e in &output.report.analyses {
        println!("{} {}", e.analysis, if e.pass { "PASS" } else { "FAIL" });
        if let Some(msgs) = e.metrics.get("messages").and_then(|m| m.as_array()) {
            for m in msgs.iter().filter_map(|m| m.as_str()) {
                println!("  {m}");
            }
        }
        if let Some(err) = e.metrics.get("error").and_then(|m| m.as_str()) {
            println!("  error: {err}");
        }
    }
    let timings = json!({ "analyses": output.timings.iter().map(|(n, t)| json!({ "analysis": n, "seconds": t })).collect::<Vec<_>>() });
    let mut files = output.artifacts.clone();
    files.push(("report.json".into(), deterministic_json(&output.report)));
    files.push(("timings.json".into(), serde_json::to_string_pretty(&timings).unwrap_or_default()));
    write_all(&dir, &files).map_err(|source| ConfigError::Io { path: dir.clone(), source })?;
    println!("outputs in {}", dir.display());
    Ok(output.report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
