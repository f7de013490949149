#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use depthbound_cli::config::Format;
use depthbound_cli::output;
use depthbound_cli::scan::{self, ScanOutput};
use depthbound_cli::selftest::run_selftest;
use depthbound_cli::{compute_single_bound, ConfigArgs, CliError, CliResult};

#[derive(Parser)]
#[command(name = "depthbound", version, about = "Correlation-based circuit-depth lower bounds for thermal states")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the bound at the first (beta, x_AB) point of the config.
    Bound(ConfigArgs),
    /// Evaluate every (beta, x_AB) point and write a dataset.
    Scan(ConfigArgs),
    /// Write the ratio panel and the depth-versus-beta panel.
    Fig2(ConfigArgs),
    /// Run the built-in numerical checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bound(args) => {
            let cfg = args.resolve()?;
            let record = compute_single_bound(&cfg)?;
            log::info!(
                "criterion {:.6e}, threshold {:.6e}, depth >= {}",
                record.criterion,
                record.threshold,
                record.depth_lb
            );
            let bytes = match cfg.format {
                Format::Csv => output::scan_csv(std::slice::from_ref(&record))?,
                Format::Json => output::to_json(&record)?,
            };
            output::emit(cfg.out.as_deref(), &bytes)
        }
        Command::Scan(args) => {
            let cfg = args.resolve()?;
            let result: ScanOutput = scan::run_scan(&cfg)?;
            log::info!(
                "{} rows ({} failed) in {:.2} s",
                result.meta.timing.rows,
                result.meta.timing.failed_rows,
                result.meta.timing.total_seconds
            );
            scan::write_scan(&cfg, &result)
        }
        Command::Fig2(args) => {
            let cfg = args.resolve()?;
            let fig = scan::emit_fig2_dataset(&cfg)?;
            scan::write_fig2(&cfg, &fig)
        }
        Command::Selftest { seed } => {
            let outcomes = run_selftest(seed);
            for o in &outcomes {
                println!("[{}] {}: {}", if o.passed { "pass" } else { "FAIL" }, o.name, o.detail);
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                return Err(CliError::Numerical(format!("{failed} self-check(s) failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("depthbound: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
