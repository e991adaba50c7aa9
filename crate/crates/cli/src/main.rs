use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use continuum_core::experiment::{parse_modes, parse_strategies, render_summary, run_experiment, Scenario};
use continuum_core::{workload, ExperimentConfig, OrderingMode, Result, Strategy};

#[derive(Parser)]
#[command(
    name = "continuum",
    version,
    about = "Service placement experiments on a simulated fog/edge/cloud network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the strategy x mode x seed sweep and write CSV reports.
    Run(RunArgs),
    /// Print the default configuration file.
    DefaultConfig,
    /// Generate one scenario and print its topology and workload.
    Scenario(ScenarioArgs),
    /// Place one scenario with one strategy and print the plan.
    Place(PlaceArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config; built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        match &self.config {
            Some(path) => ExperimentConfig::from_file(path),
            None => Ok(ExperimentConfig::default()),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(short, long, default_value = "results")]
    out: PathBuf,
    /// Run seeds 1..=N instead of the configured list.
    #[arg(long)]
    seeds: Option<u64>,
    /// Comma-separated strategy names.
    #[arg(long)]
    strategies: Option<String>,
    /// Comma-separated ordering modes (app_based, service_based).
    #[arg(long)]
    modes: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(short, long)]
    jobs: Option<usize>,
    /// Write per-run event traces under <out>/traces.
    #[arg(long)]
    trace: bool,
    /// Don't print the summary table.
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct PlaceArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    strategy: Strategy,
    #[arg(long, default_value = "service_based")]
    mode: OrderingMode,
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = args.config.load()?;
    if let Some(n) = args.seeds {
        config.seeds = (1..=n).collect();
    }
    if let Some(list) = &args.strategies {
        config.strategies = parse_strategies(list)?;
    }
    if let Some(list) = &args.modes {
        config.modes = parse_modes(list)?;
    }
    if let Some(jobs) = args.jobs {
        config.jobs = jobs;
    }
    let started = Instant::now();
    let report = run_experiment(&config, &args.out, args.trace)?;
    if !args.quiet {
        print!("{}", render_summary(&config, &report.summaries, &report.verdicts));
        println!();
        println!(
            "{} runs in {:.1}s, reports in {}",
            report.runs.len(),
            started.elapsed().as_secs_f64(),
            args.out.display()
        );
    }
    Ok(())
}

fn scenario(args: ScenarioArgs) -> Result<()> {
    let config = args.config.load()?;
    let s = Scenario::build(&config, args.seed)?;
    println!("{}", s.topology.to_toml()?);
    println!("{}", workload::to_toml(&s.apps, &s.users)?);
    Ok(())
}

fn place(args: PlaceArgs) -> Result<()> {
    let config = args.config.load()?;
    let s = Scenario::build(&config, args.seed)?;
    let plan = args.strategy.place(&s.topology, &s.apps, args.mode)?;
    print!("{}", plan.to_text());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::DefaultConfig => {
            print!("{}", ExperimentConfig::default().to_toml());
            Ok(())
        }
        Command::Scenario(args) => scenario(args),
        Command::Place(args) => place(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
