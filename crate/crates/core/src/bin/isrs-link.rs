use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use isrs_link::config::SimulationConfig;
use isrs_link::run::{run_optimize, run_rate_sweep, run_simulate, run_validate};
use isrs_link::Error;

#[derive(Parser)]
#[command(version, about = "Throughput estimation and launch-power optimization for S+C+L WDM links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate SNR, GMI and rates at the configured launch powers.
    Simulate(Common),
    /// Optimize the launch powers, then simulate at the optimum.
    Optimize(Common),
    /// Throughput against the number of code rates.
    RateSweep(Common),
    /// Run the numerical self-checks.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    config: PathBuf,
    /// Output directory (defaults to `output.dir` of the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write SVG figures.
    #[arg(long)]
    plot: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Validation { .. } | Error::Capacity(_) | Error::Capability(_) | Error::Io(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Simulate(c) | Command::Optimize(c) | Command::RateSweep(c) | Command::Validate(c)) = &cli.command;
    let mut cfg = match SimulationConfig::load(&c.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Some(seed) = c.seed {
        cfg.override_seed(seed);
    }
    if let Some(out) = &c.out {
        cfg.output.dir = std::path::absolute(out).unwrap_or_else(|_| out.clone());
    }
    let out = cfg.output.dir.clone();

    let result = match &cli.command {
        Command::Simulate(_) => run_simulate(&cfg, None, &out, c.plot).map(|r| {
            let ev = &r.evaluation;
            println!(
                "{}: {:.3} Tb/s with K = {} (GMI bound {:.3} Tb/s)",
                r.scenario,
                ev.total() / 1e12,
                r.k,
                ev.bound / 1e12
            );
            true
        }),
        Command::Optimize(_) => run_optimize(&cfg, &out, c.plot).map(|r| {
            let ev = &r.simulation.evaluation;
            println!(
                "swarm {:.3} Tb/s, refined {:.3} Tb/s (objective); {}: {:.3} Tb/s with K = {}",
                r.optimum.pso.best_value / 1e12,
                r.optimum.refine.value / 1e12,
                r.simulation.scenario,
                ev.total() / 1e12,
                r.simulation.k
            );
            true
        }),
        Command::RateSweep(_) => run_rate_sweep(&cfg, None, &out, c.plot).map(|s| {
            for (k, t) in &s.rows {
                println!("K = {k}: {:.3} Tb/s", t / 1e12);
            }
            println!("bound: {:.3} Tb/s", s.bound / 1e12);
            true
        }),
        Command::Validate(_) => run_validate(&cfg, &out).map(|r| {
            for ch in &r.checks {
                println!(
                    "{} {}: {:.3e} (limit {:.3e})",
                    if ch.passed { "PASS" } else { "FAIL" },
                    ch.name,
                    ch.value,
                    ch.limit
                );
            }
            r.passed
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
