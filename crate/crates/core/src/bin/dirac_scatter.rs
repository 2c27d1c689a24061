use clap::{Parser, Subcommand};

use dirac_scatter::config::load_config;
use dirac_scatter::runner;
use dirac_scatter::selftest;

#[derive(Parser)]
#[command(
    name = "dirac-scatter",
    about = "Radial Dirac scattering with Coulomb-type potentials: stationary and dynamical scattering operators, spectral transforms, and their comparison",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario described by a JSON config file.
    Run {
        /// Path to the config file.
        #[arg(long)]
        config: String,
        /// Override the scenario named in the config.
        #[arg(long)]
        scenario: Option<String>,
        /// Output directory (defaults to the config's output_dir).
        #[arg(long)]
        out: Option<String>,
        /// Worker threads (falls back to DIRAC_SCATTER_THREADS, then
        /// the machine parallelism).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a config file without running it.
    Validate {
        #[arg(long)]
        config: String,
    },
    /// Run the full acceptance suite and print one line per criterion.
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            scenario,
            out,
            threads,
        } => cmd_run(&config, scenario.as_deref(), out.as_deref(), threads),
        Command::Validate { config } => cmd_validate(&config),
        Command::Selftest { threads } => cmd_selftest(threads),
    };
    std::process::exit(code);
}

fn cmd_run(path: &str, scenario: Option<&str>, out: Option<&str>, threads: Option<usize>) -> i32 {
    let mut config = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    if let Some(name) = scenario {
        config.scenario = match serde_json::from_value(serde_json::Value::String(name.into())) {
            Ok(s) => s,
            Err(_) => {
                eprintln!(
                    "unknown scenario `{name}` (expected coulomb, scatter, spectral, ergodic or free_case)"
                );
                return 2;
            }
        };
        if let Err(e) = config.validate() {
            eprintln!("config error: {e}");
            return 2;
        }
    }
    if let Some(dir) = out {
        config.output_dir = dir.to_string();
    }
    match runner::run(&config, threads) {
        Ok(report) => {
            if let Err(e) = report.write_to(&config.output_dir) {
                eprintln!("write error: {e}");
                return 2;
            }
            println!(
                "scenario {:?}: {} ({:.1}s), outputs in {}/",
                config.scenario,
                if report.scenario_passed { "PASS" } else { "FAIL" },
                report.wall_clock_seconds,
                config.output_dir
            );
            if let Some(res) = report.max_ergodic_residual {
                println!("max |S_dyn - S_st| = {res:.3e}");
            }
            if report.scenario_passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("run error: {e}");
            2
        }
    }
}

fn cmd_validate(path: &str) -> i32 {
    match load_config(path) {
        Ok(config) => {
            println!(
                "valid: scenario {:?}, {} energies, hash {}",
                config.scenario,
                config.lambda_grid.len(),
                config.content_hash()
            );
            0
        }
        Err(e) => {
            eprintln!("invalid config: {e}");
            1
        }
    }
}

fn cmd_selftest(threads: Option<usize>) -> i32 {
    let threads = threads
        .or_else(|| {
            std::env::var("DIRAC_SCATTER_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    let results = selftest::run_all(threads);
    let mut all_ok = true;
    for r in &results {
        println!("{}", r.line());
        all_ok &= r.passed;
    }
    println!(
        "selftest: {}/{} criteria passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    if all_ok {
        0
    } else {
        1
    }
}
