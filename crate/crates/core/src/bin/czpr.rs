use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use czpr::error::Error;
use czpr::harness::{self, ConfigOverrides, NoiseMode};

const EXIT_CONFIG: u8 = 2;
const EXIT_CONTAINMENT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "czpr",
    version,
    about = "Set-based state estimation benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a benchmark system and run the estimator along it.
    Run(RunArgs),
    /// List the registered systems.
    Systems,
}

#[derive(clap::Args)]
struct RunArgs {
    /// key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gen_limit: Option<usize>,
    #[arg(long)]
    con_limit: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// uniform, extreme or zero.
    #[arg(long)]
    noise_mode: Option<String>,
    /// Sampling time override (example2, example3).
    #[arg(long)]
    ts: Option<f64>,
    /// Fill the step_millis column with wall-clock times.
    #[arg(long)]
    timing: bool,
}

fn overrides(args: RunArgs) -> czpr::error::Result<ConfigOverrides> {
    let base = match &args.config {
        Some(p) => ConfigOverrides::from_file(p)?,
        None => ConfigOverrides::default(),
    };
    let noise_mode = args
        .noise_mode
        .as_deref()
        .map(str::parse::<NoiseMode>)
        .transpose()?;
    let flags = ConfigOverrides {
        system: args.system,
        steps: args.steps,
        seed: args.seed,
        gen_limit: args.gen_limit,
        con_limit: args.con_limit,
        out_path: args.out,
        noise_mode,
        ts: args.ts,
        timing: args.timing.then_some(true),
    };
    Ok(base.merge(flags))
}

fn run(args: RunArgs) -> ExitCode {
    let cfg = match overrides(args).and_then(ConfigOverrides::resolve) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("czpr: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let report = match harness::run(&cfg) {
        Ok(r) => r,
        Err(Error::EmptySet) => {
            eprintln!("czpr: enclosure became empty");
            return ExitCode::from(EXIT_CONTAINMENT);
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("czpr: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("czpr: {e}");
            return ExitCode::FAILURE;
        }
    };
    match harness::write_csv(&cfg, &report.records) {
        Ok(Some(csv)) => print!("{csv}"),
        Ok(None) => {}
        Err(e) => {
            eprintln!("czpr: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    if let Some(r) = report.records.iter().find(|r| !r.contains_truth) {
        eprintln!("czpr: true state outside the enclosure at k = {}", r.k);
        return ExitCode::from(EXIT_CONTAINMENT);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Systems => {
            for name in harness::register_systems() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
    }
}
