use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use harness::sim::{Dynamics, SimConfig};
use harness_cli::{exact_table, figs, simulate, verify};
use std::path::PathBuf;
use std::process::ExitCode;

/// Gaussian lattice interface toolkit: exact space-time correlation tables,
/// verification suites, heat-bath simulations, and relaxation/profile CSVs.
#[derive(Parser)]
#[command(name = "harness", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the closed-form and asymptotic kernel values as CSV.
    ExactTable {
        #[arg(long, default_value_t = 20)]
        t_max: u64,
        #[arg(long, default_value_t = 20)]
        j_max: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named invariant suite and report PASS/FAIL per check.
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Run one replica of either dynamics and write summary observables.
    Simulate {
        #[arg(long, value_enum)]
        dynamics: DynamicsArg,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        warmup: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        snapshot_stride: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Relaxation of the three kernels at the origin (random-sequential).
    Fig2 {
        #[arg(long, default_value_t = 100_000)]
        length: usize,
        #[arg(long, default_value_t = 200)]
        t1: u64,
        #[arg(long, default_value_t = 20)]
        t_max: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spatial kernel profiles at a fixed time (random-sequential).
    Fig3 {
        #[arg(long, default_value_t = 100_000)]
        length: usize,
        #[arg(long, default_value_t = 200)]
        t1: u64,
        #[arg(long, default_value_t = 10)]
        t: u64,
        #[arg(long, default_value_t = 40)]
        j_max: i64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Exact,
    Spectral,
    Oracle,
    Mc,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum DynamicsArg {
    Sublattice,
    Sequential,
}

fn write_out(path: &PathBuf, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::ExactTable { t_max, j_max, out } => {
            let table = exact_table::exact_table(t_max, j_max)?;
            write_out(&out, &exact_table::render_csv(&table, t_max, j_max))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite } => {
            let suite = match suite {
                SuiteArg::Exact => verify::Suite::Exact,
                SuiteArg::Spectral => verify::Suite::Spectral,
                SuiteArg::Oracle => verify::Suite::Oracle,
                SuiteArg::Mc => verify::Suite::Mc,
                SuiteArg::All => verify::Suite::All,
            };
            let checks = verify::run_suite(suite);
            if verify::report(&checks) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Simulate {
            dynamics,
            length,
            dim,
            rounds,
            warmup,
            seed,
            snapshot_stride,
            out,
        } => {
            let config = SimConfig {
                length,
                dim,
                dynamics: match dynamics {
                    DynamicsArg::Sublattice => Dynamics::SublatticeParallel,
                    DynamicsArg::Sequential => Dynamics::RandomSequential,
                },
                seed,
                warmup_rounds: warmup,
                measure_rounds: rounds,
                snapshot_stride,
                replicas: 1,
            };
            let report = simulate::simulate(&config)?;
            write_out(&out, &report.csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fig2 {
            length,
            t1,
            t_max,
            seed,
            out,
        } => {
            let data = figs::fig2_data(length, t1, t_max, seed)?;
            write_out(&out, &figs::render_fig2_csv(&data))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fig3 {
            length,
            t1,
            t,
            j_max,
            seed,
            out,
        } => {
            let data = figs::fig3_data(length, t1, t, j_max, seed)?;
            write_out(&out, &figs::render_fig3_csv(&data))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    // Optional worker-count override for the replica/sweep parallelism.
    if let Ok(threads) = std::env::var("HARNESS_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            // configuration errors are usage errors (exit 2), the rest exit 1
            let usage = err
                .downcast_ref::<harness::Error>()
                .map(|e| {
                    matches!(
                        e,
                        harness::Error::Domain(_) | harness::Error::Parity { .. }
                    )
                })
                .unwrap_or(false);
            eprintln!("error: {err:#}");
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
