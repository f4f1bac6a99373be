use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use amortize_cli::experiment::{ITERATIONS_FILE, LEDGER_FILE, SUMMARY_FILE};
use amortize_cli::{compare, run, ExperimentConfig};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "amortize", version, about = "Amortized equity-of-attention reranking experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its metric curve, ledger snapshot and summary.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set theta=0.9`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run several experiments on the same data and merge their unfairness curves.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Override a config key in every config. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Destination of the merged wide CSV.
        #[arg(long, short)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, overrides } => {
            let config = ExperimentConfig::load_with_overrides(&config, &overrides)?;
            let result = run(&config)?;
            result.write_outputs(&config.output)?;
            let s = result.summary();
            println!(
                "{}: {} iterations, final unfairness {}, quality [{}, {}], {:.1} ms",
                s.label, s.iterations, s.final_unfairness, s.min_quality, s.max_quality, s.total_runtime_ms
            );
            println!(
                "wrote {ITERATIONS_FILE}, {LEDGER_FILE}, {SUMMARY_FILE} to {}",
                config.output.display()
            );
        }
        Command::Compare { configs, overrides, output } => {
            let configs = configs
                .iter()
                .map(|p| ExperimentConfig::load_with_overrides(p, &overrides))
                .collect::<Result<Vec<_>>>()?;
            let (table, runs) = compare(&configs)?;
            if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            let file = File::create(&output).with_context(|| format!("creating {}", output.display()))?;
            table.write_csv(file)?;
            for run in &runs {
                let s = run.summary();
                println!("{}: final unfairness {}, mean {}", s.label, s.final_unfairness, s.mean_unfairness);
            }
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}
