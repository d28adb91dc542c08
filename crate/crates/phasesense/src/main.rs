use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use phasesense::error::Error;
use phasesense::fock::OracleOptions;
use phasesense::sweep::{
    run_compare, run_fig4, run_fig5, run_fig6, run_measure, write_table, OutputFormat, RunConfig,
    Table,
};

/// Sensitivity analysis for two-path phase estimation with coherent plus
/// squeezed light under photon loss.
#[derive(Parser)]
#[command(name = "phasesense", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Sweep configuration file (flat `key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Relative tolerance for the oracle/closed-form comparison.
    #[arg(long, global = true, default_value_t = 1e-4)]
    tolerance: f64,

    /// Hard per-mode Fock cutoff limit for the oracle.
    #[arg(long, global = true, default_value_t = 64)]
    cutoff_cap: usize,

    /// Evaluate the budget formula in the high-squeezing limit
    /// (`exp(-2r) -> 0`) instead of the consistency-checked exact form.
    #[arg(long, global = true)]
    ideal_squeezing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Enhancement factor vs lost photons for several squeezing fractions.
    Fig4,
    /// Optimal vs balanced squeezing fraction over the loss range.
    Fig5,
    /// Improvement ratio of the optimal over the balanced split.
    Fig6,
    /// Cross-check the closed-form Fisher information against the
    /// Fock-space oracle over a parameter grid.
    Compare,
    /// Simulate the explicit displacement-and-photon-counting measurement.
    Measure,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Tsv,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}

fn run(cli: &Cli) -> i32 {
    let cfg = match load_config(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let opts = OracleOptions {
        cutoff_cap: cli.cutoff_cap,
        ..OracleOptions::default()
    };
    let mut exit = 0;
    let result = match cli.command {
        Command::Fig4 => run_fig4(&cfg),
        Command::Fig5 => run_fig5(&cfg),
        Command::Fig6 => run_fig6(&cfg),
        Command::Measure => run_measure(&cfg, &opts),
        Command::Compare => {
            match run_compare(&cfg, &opts, cli.tolerance, cli.ideal_squeezing) {
                Ok(outcome) => {
                    eprintln!(
                        "compare: worst relative deviation {:.3e} over {} points \
                         ({} violations, {} skipped)",
                        outcome.worst_deviation,
                        outcome.table.rows.len(),
                        outcome.violations,
                        outcome.skipped
                    );
                    if outcome.violations > 0 {
                        exit = 1;
                    }
                    Ok(outcome.table)
                }
                Err(e) => Err(e),
            }
        }
    };
    match result {
        Ok(table) => {
            if let Err(e) = emit(cli, &table) {
                eprintln!("error: {e}");
                return 1;
            }
            exit
        }
        Err(e @ (Error::Config(_) | Error::Domain { .. })) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(cli: &Cli) -> phasesense::Result<RunConfig> {
    match &cli.config {
        None => Ok(RunConfig::empty()),
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?),
    }
}

fn emit(cli: &Cli, table: &Table) -> phasesense::Result<()> {
    let format = match cli.format {
        Format::Csv => OutputFormat::Csv,
        Format::Tsv => OutputFormat::Tsv,
    };
    match &cli.out {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_table(&mut lock, table, format)?;
            lock.flush()?;
            Ok(())
        }
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_table(&mut file, table, format)?;
            file.flush()?;
            Ok(())
        }
    }
}
