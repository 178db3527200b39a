use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geoptics::config::Config;
use geoptics::error::{HarnessError, EXIT_TREND, EXIT_USAGE};
use geoptics::experiments;

#[derive(Parser)]
#[command(name = "geoptics", version, about = "Semiclassical nonlinear Schrödinger experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single trajectory, or the o.d.e.-approximation sweep.
    Simulate(RunArgs),
    /// Exact amplitude/velocity system and correctors against the solver.
    Wkb(RunArgs),
    /// Taylor cascade of the limit system.
    Cascade(RunArgs),
    /// Divergence of nearby solutions (strong, corrector and weak scenarios).
    Instability(RunArgs),
    /// Linear equation with a perturbed potential.
    Linear(RunArgs),
    /// Norm inflation through parabolic rescaling.
    Inflate(RunArgs),
    /// Scaling identity, norm growth and frame transforms.
    Flowmap(RunArgs),
    /// Parse and validate a config without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for parameter sweeps; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Seed of the random data profiles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn fail(err: HarnessError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn run(name: &str, args: RunArgs) -> ExitCode {
    let config = match Config::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let expected = config.scenario.subcommand();
    if expected != name {
        return fail(HarnessError::config(format!(
            "scenario '{}' is run by the '{expected}' subcommand, not '{name}'",
            config.scenario.kind()
        )));
    }
    let threads = args.threads.max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return fail(HarnessError::config(format!("thread pool: {e}"))),
    };
    let report = match pool.install(|| experiments::run(&config.scenario, args.seed)) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Err(e) = geoptics::write_outputs(&args.out, &config, &report, args.seed, threads) {
        return fail(e);
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_TREND as u8)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    match cli.command {
        Command::Simulate(a) => run("simulate", a),
        Command::Wkb(a) => run("wkb", a),
        Command::Cascade(a) => run("cascade", a),
        Command::Instability(a) => run("instability", a),
        Command::Linear(a) => run("linear", a),
        Command::Inflate(a) => run("inflate", a),
        Command::Flowmap(a) => run("flowmap", a),
        Command::ValidateConfig { config } => match Config::load(&config) {
            Ok(c) => {
                println!("{}: {} scenario, run with '{}'", c.name, c.scenario.kind(), c.scenario.subcommand());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
