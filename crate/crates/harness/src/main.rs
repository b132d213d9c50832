use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use meanfield::config::load_config;
use meanfield::error::{HarnessError, Result};
use meanfield::rate::rate_table;
use meanfield::suites::{run_suite, SUITES};
use meanfield::sweep::{needs_dynamics, plan, run_sweep, write_outputs, SweepOptions};

#[derive(Parser)]
#[command(name = "meanfield", version, about = "Mean-field limit experiments on truncated Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run invariant suites.
    Validate {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Run an ε-sweep and write results.csv, diagnostics.csv and manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also check the Duhamel identity on the first probe.
        #[arg(long)]
        dyson: bool,
    },
    /// Fit log gap against log ε for every series of a results file.
    Rate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "abs_gap")]
        column: String,
    },
    /// Print truncation sizes for a config without running it.
    Info {
        #[arg(long)]
        config: PathBuf,
    },
}

fn validate(suite: &str) -> Result<()> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(HarnessError::Validation(format!(
            "unknown suite `{suite}`; expected one of: all, {}",
            SUITES.join(", ")
        )));
    };
    let start = Instant::now();
    let mut failed = Vec::new();
    for name in names {
        let t0 = Instant::now();
        let report = run_suite(name).expect("listed suite")?;
        let status = if report.passed() { "PASS" } else { "FAIL" };
        let worst = report.worst().map(|c| c.to_string()).unwrap_or_default();
        println!("{status} {name:<20} worst: {worst} ({:.2}s)", t0.elapsed().as_secs_f64());
        for c in report.checks.iter().filter(|c| !c.passed()) {
            println!("     failed check {c}");
        }
        if !report.passed() {
            failed.push(name);
        }
    }
    println!("total {:.2}s", start.elapsed().as_secs_f64());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Validation(failed.join(", ")))
    }
}

fn run(config: PathBuf, out: Option<PathBuf>, dyson: bool) -> Result<()> {
    let cfg = load_config(&config)?;
    let dir = out
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| HarnessError::Validation("no output directory: pass --out or set `out`".into()))?;
    let output = run_sweep(&cfg, SweepOptions { dyson })?;
    write_outputs(&output, &dir)?;
    for d in &output.diagnostics {
        println!(
            "eps={:<10} n_max={:<4} dim={:<8} {} ms",
            d.eps, d.n_max_used, d.fock_dim, d.runtime_ms
        );
    }
    println!("wrote {} rows to {}", output.rows.len(), dir.join("results.csv").display());
    Ok(())
}

fn rate(input: PathBuf, column: &str) -> Result<()> {
    let table = rate_table(File::open(&input)?, column)?;
    println!("slopes of log {column} vs log eps (informative only)");
    println!("{:<14} {:<8} {:<8} {:<4} {:>10} {:>10} {:>6}", "family", "t", "probe", "k", "slope", "residual", "pts");
    for row in table {
        let (fam, t, probe, k) = &row.key;
        match row.fit {
            Some(f) => {
                let note = if f.excluded > 0 {
                    format!("  ({} non-positive gaps excluded)", f.excluded)
                } else {
                    String::new()
                };
                println!(
                    "{fam:<14} {t:<8} {probe:<8} {k:<4} {:>10.4} {:>10.2e} {:>6}{note}",
                    f.slope, f.residual, f.points
                );
            }
            None => println!("{fam:<14} {t:<8} {probe:<8} {k:<4} {:>10} {:>10} {:>6}", "-", "too few", row.total),
        }
    }
    Ok(())
}

fn info(config: PathBuf) -> Result<()> {
    let cfg = load_config(&config)?;
    let dynamics = needs_dynamics(&cfg);
    println!("d = {}, interaction order r = {}, sector cap = {}", cfg.d, cfg.interaction.r(), cfg.sector_cap);
    if !dynamics {
        println!("all times are 0: no Hamiltonian is built and the cap does not apply");
    }
    println!("{:<12} {:>8} {:>6} {:>14} {:>12} {:>12}", "eps", "state_n", "n_max", "fock_dim", "max_sector", "memory");
    for &eps in &cfg.eps {
        let p = plan(&cfg, eps);
        let flag = if dynamics && p.max_sector_dim > cfg.sector_cap as u128 { "  over cap" } else { "" };
        println!(
            "{:<12} {:>8} {:>6} {:>14} {:>12} {:>9.1} MB{flag}",
            eps,
            p.state_n_max,
            p.n_max,
            p.fock_dim,
            p.max_sector_dim,
            p.memory_bytes as f64 / 1e6
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { suite } => validate(&suite),
        Command::Run { config, out, dyson } => run(config, out, dyson),
        Command::Rate { input, column } => rate(input, &column),
        Command::Info { config } => info(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
