use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use srs_core::harness::{self, CsvTable};
use srs_core::SamplerKind;

/// Sequenced-replacement sampling experiments.
#[derive(Parser, Debug)]
#[command(name = "srs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact counts of accessible mini-batch configurations.
    Count {
        /// Dataset size N.
        #[arg(short = 'n', long)]
        dataset_size: u64,
        /// Mini-batch size B.
        #[arg(short = 'b', long)]
        batch_size: u64,
        /// Number of epochs n_E.
        #[arg(short = 'e', long, default_value_t = 1)]
        epochs: u64,
    },
    /// Monte-Carlo sample-coverage statistics for one sampler.
    Coverage {
        #[arg(short = 's', long, value_enum)]
        sampler: Kind,
        #[arg(short = 'n', long)]
        dataset_size: usize,
        #[arg(short = 'b', long)]
        batch_size: usize,
        /// Draws per replica.
        #[arg(short = 't', long)]
        iterations: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'r', long, default_value_t = 1)]
        replicas: usize,
        /// Output CSV path.
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
    /// Train one configuration and write per-epoch metrics.
    Train {
        /// Config file (`key = value` lines).
        config: PathBuf,
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
    /// Run the sampler x schedule x seed grid declared in a config file.
    Compare {
        config: PathBuf,
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Srs,
    Epoch,
    Replacement,
}

impl From<Kind> for SamplerKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Srs => SamplerKind::Srs,
            Kind::Epoch => SamplerKind::EpochShuffle,
            Kind::Replacement => SamplerKind::Replacement,
        }
    }
}

fn write_table(table: &CsvTable, out: &Path) -> Result<()> {
    table
        .write_to(out)
        .with_context(|| format!("writing {}", out.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Count {
            dataset_size,
            batch_size,
            epochs,
        } => {
            let report = harness::count(dataset_size, batch_size, epochs)?;
            print!("{}", report.table().to_csv_string()?);
        }
        Command::Coverage {
            sampler,
            dataset_size,
            batch_size,
            iterations,
            seed,
            replicas,
            out,
        } => {
            let (report, table) = harness::coverage(
                sampler.into(),
                dataset_size,
                batch_size,
                iterations,
                seed,
                replicas,
            )?;
            write_table(&table, &out)?;
            println!("{}", harness::coverage_summary(&report));
        }
        Command::Train { config, out } => {
            let cfg = harness::parse_config(&config)?;
            let (report, table) = harness::run_train(&cfg)?;
            write_table(&table, &out)?;
            println!(
                "{} epochs, {} iterations: final train_loss={} test_error={}",
                report.rows.len(),
                report.rows.last().map_or(0, |r| r.wall_iterations),
                report.rows.last().map_or(f64::NAN, |r| r.train_loss),
                report.final_test_error(),
            );
        }
        Command::Compare { config, out } => {
            let cfg = harness::parse_config(&config)?;
            let report = harness::compare(&cfg)?;
            write_table(&report.table(), &out)?;
            for m in &report.medians {
                println!(
                    "{} {}: median final_test_error={} best_test_error={}",
                    m.sampler, m.schedule, m.final_test_error, m.best_test_error
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
